//! Infix rendering. The output is valid input for the DAE parser.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::Expr;

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

/// Renders an expression with state indices mapped to `vars`. Indices
/// without a name print as `x1`, `x2`, ...
pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    vars: &'a [String],
}

impl<'a> ExprDisplay<'a> {
    pub fn new(expr: &'a Expr, vars: &'a [String]) -> Self {
        ExprDisplay { expr, vars }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self.expr, self.vars).0)
    }
}

fn primes(order: u32) -> Option<&'static str> {
    match order {
        0 => Some(""),
        1 => Some("'"),
        2 => Some("''"),
        3 => Some("'''"),
        _ => None,
    }
}

pub(crate) fn var_name(vars: &[String], var: usize) -> String {
    vars.get(var)
        .cloned()
        .unwrap_or_else(|| format!("x{}", var + 1))
}

fn wrap(s: (String, u8), min: u8) -> String {
    if s.1 >= min {
        s.0
    } else {
        format!("({})", s.0)
    }
}

/// Splits a leading minus sign off `e`, returning the magnitude.
fn split_sign(e: &Expr) -> (bool, Expr) {
    match e {
        Expr::Neg(x) => (true, (**x).clone()),
        Expr::Const(c) if c.is_negative() => (true, Expr::Const(-c)),
        Expr::Mul(xs) => match xs.first() {
            Some(Expr::Const(c)) if c.is_negative() => {
                let mut rest = xs.clone();
                let m = -c;
                if m.is_one() {
                    rest.remove(0);
                } else {
                    rest[0] = Expr::Const(m);
                }
                let mag = match rest.len() {
                    0 => Expr::one(),
                    1 => rest.pop().unwrap(),
                    _ => Expr::Mul(rest),
                };
                (true, mag)
            }
            _ => (false, e.clone()),
        },
        _ => (false, e.clone()),
    }
}

fn render_const(c: &BigRational) -> (String, u8) {
    if c.is_negative() {
        let inner = render_const(&-c);
        return (format!("-{}", wrap(inner, PREC_POW)), PREC_NEG);
    }
    if c.is_integer() {
        (c.numer().to_string(), PREC_ATOM)
    } else {
        (format!("{}/{}", c.numer(), c.denom()), PREC_MUL)
    }
}

fn render(e: &Expr, vars: &[String]) -> (String, u8) {
    match e {
        Expr::Const(c) => render_const(c),
        Expr::Time => ("t".to_string(), PREC_ATOM),
        Expr::Param(p) => (p.clone(), PREC_ATOM),
        Expr::State { var, order } => {
            let name = var_name(vars, *var);
            match primes(*order) {
                Some(p) => (format!("{name}{p}"), PREC_ATOM),
                None => (format!("diff({name}, {order})"), PREC_ATOM),
            }
        }
        Expr::Input { name, order } => match primes(*order) {
            Some(p) => (format!("{name}{p}(t)"), PREC_ATOM),
            None => (format!("diff({name}(t), {order})"), PREC_ATOM),
        },
        Expr::Func(f, a) => (
            format!("{}({})", f.name(), render(a, vars).0),
            PREC_ATOM,
        ),
        Expr::Neg(x) => {
            let (neg, mag) = split_sign(x);
            if neg {
                return render(&mag, vars);
            }
            (
                format!("-{}", wrap(render(x, vars), PREC_MUL)),
                PREC_NEG,
            )
        }
        Expr::Pow(b, k) => {
            if *k < 0 {
                let den = Expr::Pow(b.clone(), -k);
                let d = if *k == -1 {
                    wrap(render(b, vars), PREC_POW)
                } else {
                    wrap(render(&den, vars), PREC_POW)
                };
                return (format!("1/{d}"), PREC_MUL);
            }
            (
                format!("{}^{}", wrap(render(b, vars), PREC_ATOM), k),
                PREC_POW,
            )
        }
        Expr::Add(xs) => {
            if xs.is_empty() {
                return ("0".to_string(), PREC_ATOM);
            }
            let mut out = String::new();
            for (i, x) in xs.iter().enumerate() {
                let (neg, mag) = split_sign(x);
                let body = wrap(render(&mag, vars), PREC_MUL);
                match (i, neg) {
                    (0, false) => out.push_str(&body),
                    (0, true) => {
                        out.push('-');
                        out.push_str(&body);
                    }
                    (_, false) => {
                        out.push_str(" + ");
                        out.push_str(&body);
                    }
                    (_, true) => {
                        out.push_str(" - ");
                        out.push_str(&body);
                    }
                }
            }
            (out, PREC_ADD)
        }
        Expr::Mul(xs) => render_product(xs, vars),
    }
}

fn render_product(xs: &[Expr], vars: &[String]) -> (String, u8) {
    if xs.is_empty() {
        return ("1".to_string(), PREC_ATOM);
    }
    let mut negative = false;
    let mut num: Vec<String> = Vec::new();
    let mut den: Vec<String> = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        match x {
            Expr::Const(c) if i == 0 => {
                if c.is_negative() {
                    negative = true;
                }
                let a = c.abs();
                if !a.numer().is_one() || xs.len() == 1 {
                    num.push(a.numer().to_string());
                }
                if !a.denom().is_one() {
                    den.push(a.denom().to_string());
                }
            }
            Expr::Pow(b, k) if *k < 0 => {
                let d = if *k == -1 {
                    (**b).clone()
                } else {
                    Expr::Pow(b.clone(), -k)
                };
                den.push(wrap(render(&d, vars), PREC_POW));
            }
            other => num.push(wrap(render(other, vars), PREC_NEG + 1)),
        }
    }
    let mut s = String::new();
    if negative {
        s.push('-');
    }
    if num.is_empty() {
        s.push('1');
    } else {
        s.push_str(&num.join("*"));
    }
    match den.len() {
        0 => {}
        1 => {
            s.push('/');
            s.push_str(&den[0]);
        }
        _ => {
            s.push_str("/(");
            s.push_str(&den.join("*"));
            s.push(')');
        }
    }
    let prec = if negative {
        PREC_NEG
    } else if num.len() == 1 && den.is_empty() && xs.len() == 1 {
        render(&xs[0], vars).1
    } else {
        PREC_MUL
    };
    (s, prec)
}
