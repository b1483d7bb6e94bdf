//! Total and partial differentiation.
//!
//! The total derivative treats every `x_j^(k)` and `h^(k)(t)` as a function
//! of `t` whose derivative is the next order up; parameters are constant.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::{simplify, Expr, Func};

fn is_literal_zero(e: &Expr) -> bool {
    e.is_zero_const()
}

fn sum(terms: Vec<Expr>) -> Expr {
    let mut kept: Vec<Expr> = terms.into_iter().filter(|t| !is_literal_zero(t)).collect();
    match kept.len() {
        0 => Expr::zero(),
        1 => kept.pop().unwrap(),
        _ => Expr::Add(kept),
    }
}

fn product(factors: Vec<Expr>) -> Expr {
    if factors.iter().any(is_literal_zero) {
        return Expr::zero();
    }
    let mut kept: Vec<Expr> = factors
        .into_iter()
        .filter(|f| !matches!(f, Expr::Const(c) if c.is_one()))
        .collect();
    match kept.len() {
        0 => Expr::one(),
        1 => kept.pop().unwrap(),
        _ => Expr::Mul(kept),
    }
}

/// Chain-rule derivative, with `leaf` giving the derivative of each symbol.
fn derive(e: &Expr, leaf: &impl Fn(&Expr) -> Expr) -> Expr {
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Time | Expr::State { .. } | Expr::Input { .. } | Expr::Param(_) => leaf(e),
        Expr::Add(xs) => sum(xs.iter().map(|x| derive(x, leaf)).collect()),
        Expr::Neg(x) => {
            let d = derive(x, leaf);
            if is_literal_zero(&d) {
                d
            } else {
                Expr::Neg(Box::new(d))
            }
        }
        Expr::Mul(xs) => {
            let mut terms = Vec::with_capacity(xs.len());
            for i in 0..xs.len() {
                let d = derive(&xs[i], leaf);
                if is_literal_zero(&d) {
                    continue;
                }
                let mut fs = xs.clone();
                fs[i] = d;
                terms.push(product(fs));
            }
            sum(terms)
        }
        Expr::Pow(b, k) => {
            let d = derive(b, leaf);
            if is_literal_zero(&d) || *k == 0 {
                return Expr::zero();
            }
            let k_expr = Expr::Const(BigRational::from_integer(BigInt::from(*k)));
            let base = if *k == 1 {
                Expr::one()
            } else {
                Expr::Pow(b.clone(), k - 1)
            };
            product(vec![k_expr, base, d])
        }
        Expr::Func(f, a) => {
            let d = derive(a, leaf);
            if is_literal_zero(&d) {
                return Expr::zero();
            }
            let a = (**a).clone();
            let outer = match f {
                Func::Sin => Expr::cos(a),
                Func::Cos => Expr::Neg(Box::new(Expr::sin(a))),
                Func::Exp => Expr::exp(a),
                Func::Ln => a.pow(-1),
                Func::Sqrt => product(vec![Expr::rational(1, 2), Expr::sqrt(a).pow(-1)]),
            };
            product(vec![outer, d])
        }
    }
}

fn time_leaf(e: &Expr) -> Expr {
    match e {
        Expr::Time => Expr::one(),
        Expr::State { var, order } => Expr::state(*var, order + 1),
        Expr::Input { name, order } => Expr::input(name.clone(), order + 1),
        _ => Expr::zero(),
    }
}

/// `d^times e / dt^times` by the product and chain rules, without
/// simplification. The tree keeps every formally occurring derivative.
pub fn total_derivative_raw(e: &Expr, times: u32) -> Expr {
    let mut out = e.clone();
    for _ in 0..times {
        out = derive(&out, &time_leaf);
    }
    out
}

/// Simplified total derivative. Each step is simplified before the next so
/// intermediate trees stay small.
pub fn total_derivative(e: &Expr, times: u32) -> Expr {
    let mut out = simplify(e);
    for _ in 0..times {
        out = simplify(&derive(&out, &time_leaf));
    }
    out
}

/// Partial derivative with respect to the symbol `x_var^(order)`, all other
/// symbols held fixed. Not simplified.
pub fn partial_raw(e: &Expr, var: usize, order: u32) -> Expr {
    derive(e, &|leaf: &Expr| match leaf {
        Expr::State { var: v, order: k } if *v == var && *k == order => Expr::one(),
        _ => Expr::zero(),
    })
}

/// Simplified partial derivative with respect to `x_var^(order)`.
pub fn partial(e: &Expr, var: usize, order: u32) -> Expr {
    simplify(&partial_raw(&simplify(e), var, order))
}
