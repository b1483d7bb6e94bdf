//! Immutable symbolic expressions over time `t`, state derivatives
//! `x_j^(k)`, parameters and driving functions of `t`.
//!
//! Every operation returns a new [`Expr`]; nothing is mutated in place.
//! [`simplify`] maps an expression to a canonical expanded form, which is
//! what [`hod`], [`partial`] and [`total_derivative`] report on.

mod diff;
mod display;
mod eval;
mod numeric;
pub(crate) mod simplify;
pub(crate) mod zero;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub use diff::{partial, partial_raw, total_derivative, total_derivative_raw};
pub use display::ExprDisplay;
pub use eval::{eval, eval_approx, Approx, EvalError, ProbePoint};
pub use simplify::{cancel_reciprocals, common_factor, exact_quotient, simplify};
pub use zero::{is_zero, probe_vanishes, ZeroTest, ZeroVerdict};

/// Analytic functions of one argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// A symbolic expression node.
///
/// `State { var, order }` is `x_var^(order)`, with `order == 0` meaning the
/// variable itself. `Input` is a driving function `h(t)` differentiated
/// `order` times.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Const(BigRational),
    Time,
    State { var: usize, order: u32 },
    Input { name: String, order: u32 },
    Param(String),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, i32),
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
}

/// A symbol that can be bound in a [`ProbePoint`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Time,
    State { var: usize, order: u32 },
    Input { name: String, order: u32 },
    Param(String),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(BigRational::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(BigRational::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::Const(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn state(var: usize, order: u32) -> Expr {
        Expr::State { var, order }
    }

    pub fn input(name: impl Into<String>, order: u32) -> Expr {
        Expr::Input {
            name: name.into(),
            order,
        }
    }

    pub fn param(name: impl Into<String>) -> Expr {
        Expr::Param(name.into())
    }

    pub fn func(f: Func, arg: Expr) -> Expr {
        Expr::Func(f, Box::new(arg))
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::func(Func::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::func(Func::Cos, arg)
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::func(Func::Exp, arg)
    }

    pub fn ln(arg: Expr) -> Expr {
        Expr::func(Func::Ln, arg)
    }

    pub fn sqrt(arg: Expr) -> Expr {
        Expr::func(Func::Sqrt, arg)
    }

    pub fn pow(self, exponent: i32) -> Expr {
        Expr::Pow(Box::new(self), exponent)
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Expr::Const(_))
    }

    /// True for the literal `Const(0)` node.
    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn children(&self) -> &[Expr] {
        match self {
            Expr::Add(xs) | Expr::Mul(xs) => xs,
            Expr::Pow(b, _) | Expr::Neg(b) | Expr::Func(_, b) => std::slice::from_ref(b),
            _ => &[],
        }
    }

    /// Highest derivative order of `x_var` on this tree as written, `None`
    /// when the variable does not occur. No simplification is applied.
    pub fn formal_hod(&self, var: usize) -> Option<u32> {
        match self {
            Expr::State { var: v, order } if *v == var => Some(*order),
            _ => self
                .children()
                .iter()
                .filter_map(|c| c.formal_hod(var))
                .max(),
        }
    }

    /// Largest state index occurring in the tree.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::State { var, .. } => Some(*var),
            _ => self.children().iter().filter_map(Expr::max_var).max(),
        }
    }

    pub fn contains_state(&self) -> bool {
        match self {
            Expr::State { .. } => true,
            _ => self.children().iter().any(Expr::contains_state),
        }
    }

    /// All symbols occurring in the tree.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    pub(crate) fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Expr::Time => {
                out.insert(Symbol::Time);
            }
            Expr::State { var, order } => {
                out.insert(Symbol::State {
                    var: *var,
                    order: *order,
                });
            }
            Expr::Input { name, order } => {
                out.insert(Symbol::Input {
                    name: name.clone(),
                    order: *order,
                });
            }
            Expr::Param(p) => {
                out.insert(Symbol::Param(p.clone()));
            }
            _ => {
                for c in self.children() {
                    c.collect_symbols(out);
                }
            }
        }
    }

    /// Replaces state symbols found in `map` simultaneously. Replacements are
    /// not themselves rewritten.
    pub fn substitute_states(&self, map: &BTreeMap<(usize, u32), Expr>) -> Expr {
        self.map_leaves(&mut |e| match e {
            Expr::State { var, order } => map.get(&(*var, *order)).cloned(),
            _ => None,
        })
    }

    /// Renumbers state indices through `f`.
    pub fn remap_vars(&self, f: &impl Fn(usize) -> usize) -> Expr {
        self.map_leaves(&mut |e| match e {
            Expr::State { var, order } => Some(Expr::state(f(*var), *order)),
            _ => None,
        })
    }

    fn map_leaves(&self, f: &mut impl FnMut(&Expr) -> Option<Expr>) -> Expr {
        if let Some(r) = f(self) {
            return r;
        }
        match self {
            Expr::Add(xs) => Expr::Add(xs.iter().map(|x| x.map_leaves(f)).collect()),
            Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| x.map_leaves(f)).collect()),
            Expr::Pow(b, k) => Expr::Pow(Box::new(b.map_leaves(f)), *k),
            Expr::Neg(b) => Expr::Neg(Box::new(b.map_leaves(f))),
            Expr::Func(g, b) => Expr::Func(*g, Box::new(b.map_leaves(f))),
            other => other.clone(),
        }
    }

    /// Number of nodes, used to prefer small pivots and bound expansion.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Expr::size).sum::<usize>()
    }

    pub fn display<'a>(&'a self, vars: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay::new(self, vars)
    }
}

/// `hod(e, j)`: highest derivative order of `x_j` in `e` after
/// simplification; `None` stands for minus infinity.
pub fn hod(e: &Expr, var: usize) -> Option<u32> {
    simplify(e).formal_hod(var)
}

/// `hod` of a vector or matrix of expressions: the maximum over entries.
pub fn hod_all<'a>(es: impl IntoIterator<Item = &'a Expr>, var: usize) -> Option<u32> {
    es.into_iter().filter_map(|e| hod(e, var)).max()
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        ExprDisplay::new(self, &[]).fmt(f)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<BigRational> for Expr {
    fn from(r: BigRational) -> Expr {
        Expr::Const(r)
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, rhs])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, Expr::Neg(Box::new(rhs))])
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, rhs])
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, rhs.pow(-1)])
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl<'a> ops::Add<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        self.clone() + rhs.clone()
    }
}

impl<'a> ops::Sub<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self.clone() - rhs.clone()
    }
}

impl<'a> ops::Mul<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        self.clone() * rhs.clone()
    }
}
