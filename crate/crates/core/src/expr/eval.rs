//! Evaluation at rational probe points.
//!
//! Polynomial and rational operations are exact. Analytic functions use the
//! fixed-point approximations in `numeric`; every value carries `log2` of an
//! absolute error bound, which is `-inf` for exact results.

use std::collections::HashMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::numeric::{self, log2_abs, NumericError};
use super::{Expr, Func};

/// Values for the symbols of an expression.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProbePoint {
    pub time: Option<BigRational>,
    pub states: HashMap<(usize, u32), BigRational>,
    pub inputs: HashMap<(String, u32), BigRational>,
    pub params: HashMap<String, BigRational>,
}

impl ProbePoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_time(mut self, t: BigRational) -> Self {
        self.time = Some(t);
        self
    }

    pub fn with_state(mut self, var: usize, order: u32, v: BigRational) -> Self {
        self.states.insert((var, order), v);
        self
    }

    pub fn with_input(mut self, name: &str, order: u32, v: BigRational) -> Self {
        self.inputs.insert((name.to_string(), order), v);
        self
    }

    pub fn with_param(mut self, name: &str, v: BigRational) -> Self {
        self.params.insert(name.to_string(), v);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("no value bound for {0}")]
    MissingBinding(String),
    #[error("{function} is undefined at {argument}")]
    DomainError { function: String, argument: String },
}

/// An approximate value with `log2` of its absolute error bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Approx {
    pub value: BigRational,
    pub err_log2: f64,
}

impl Approx {
    fn exact(value: BigRational) -> Self {
        Approx {
            value,
            err_log2: f64::NEG_INFINITY,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.err_log2 == f64::NEG_INFINITY
    }

    /// True when the error bound excludes zero.
    pub fn certainly_nonzero(&self) -> bool {
        if self.is_exact() {
            !self.value.is_zero()
        } else {
            log2_abs(&self.value) > self.err_log2 + 1.0
        }
    }

    /// `log2` of an upper bound on the magnitude of the true value.
    fn magnitude(&self) -> f64 {
        log2_add(log2_abs(&self.value), self.err_log2)
    }
}

impl fmt::Display for Approx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", self.value)
        } else {
            write!(f, "{:e} (+/- 2^{:.0})", to_f64(&self.value), self.err_log2)
        }
    }
}

fn to_f64(r: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// `log2(2^a + 2^b)`.
fn log2_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (1.0 + (lo - hi).exp2()).log2()
}

fn domain(function: &str, arg: &Approx) -> EvalError {
    EvalError::DomainError {
        function: function.to_string(),
        argument: arg.to_string(),
    }
}

fn mul(a: &Approx, b: &Approx) -> Approx {
    let value = &a.value * &b.value;
    if a.is_exact() && b.is_exact() {
        return Approx::exact(value);
    }
    let err = log2_add(
        log2_abs(&a.value) + b.err_log2,
        b.magnitude() + a.err_log2,
    );
    Approx {
        value,
        err_log2: err,
    }
}

fn recip(a: &Approx) -> Result<Approx, EvalError> {
    if a.is_exact() {
        if a.value.is_zero() {
            return Err(domain("1/", a));
        }
        return Ok(Approx::exact(a.value.recip()));
    }
    let mag = log2_abs(&a.value);
    if mag <= a.err_log2 + 1.0 {
        return Err(domain("1/", a));
    }
    // |1/(v+d) - 1/v| <= |d| / (|v| (|v| - |d|)) <= 2|d| / |v|^2
    Ok(Approx {
        value: a.value.recip(),
        err_log2: a.err_log2 - 2.0 * mag + 1.0,
    })
}

fn powi(base: &Approx, k: i32) -> Result<Approx, EvalError> {
    let b = if k < 0 { recip(base)? } else { base.clone() };
    let mut acc = Approx::exact(BigRational::one());
    for _ in 0..k.unsigned_abs() {
        acc = mul(&acc, &b);
    }
    Ok(acc)
}

fn apply(f: Func, a: &Approx) -> Result<Approx, EvalError> {
    let map = |r: Result<numeric::Approx, NumericError>| {
        r.map(|(value, err_log2)| Approx { value, err_log2 })
            .map_err(|_| domain(f.name(), a))
    };
    let out = match f {
        Func::Sin => map(numeric::sin_cos(&a.value).map(|(s, _)| s))?,
        Func::Cos => map(numeric::sin_cos(&a.value).map(|(_, c)| c))?,
        Func::Exp => map(numeric::exp(&a.value))?,
        Func::Ln => {
            if !a.is_exact() && log2_abs(&a.value) <= a.err_log2 + 1.0 {
                return Err(domain("ln", a));
            }
            map(numeric::ln(&a.value))?
        }
        Func::Sqrt => {
            if !a.is_exact() && a.value.is_negative() {
                return Err(domain("sqrt", a));
            }
            map(numeric::sqrt(&a.value))?
        }
    };
    if a.is_exact() {
        return Ok(out);
    }
    // Propagate the argument error through the function's modulus of continuity.
    let propagated = match f {
        Func::Sin | Func::Cos => a.err_log2,
        Func::Exp => out.magnitude() + a.err_log2 + 1.0,
        Func::Ln => a.err_log2 - log2_abs(&a.value) + 1.0,
        Func::Sqrt => a.err_log2 / 2.0 + 1.0,
    };
    Ok(Approx {
        err_log2: log2_add(out.err_log2, propagated),
        value: out.value,
    })
}

/// Evaluates `e` at `pt`, tracking an error bound.
pub fn eval_approx(e: &Expr, pt: &ProbePoint) -> Result<Approx, EvalError> {
    Ok(match e {
        Expr::Const(c) => Approx::exact(c.clone()),
        Expr::Time => Approx::exact(
            pt.time
                .clone()
                .ok_or_else(|| EvalError::MissingBinding("t".to_string()))?,
        ),
        Expr::State { var, order } => Approx::exact(
            pt.states
                .get(&(*var, *order))
                .cloned()
                .ok_or_else(|| EvalError::MissingBinding(e.to_string()))?,
        ),
        Expr::Input { name, order } => Approx::exact(
            pt.inputs
                .get(&(name.clone(), *order))
                .cloned()
                .ok_or_else(|| EvalError::MissingBinding(e.to_string()))?,
        ),
        Expr::Param(p) => Approx::exact(
            pt.params
                .get(p)
                .cloned()
                .ok_or_else(|| EvalError::MissingBinding(p.clone()))?,
        ),
        Expr::Add(xs) => {
            let mut value = BigRational::zero();
            let mut err = f64::NEG_INFINITY;
            for x in xs {
                let a = eval_approx(x, pt)?;
                value += a.value;
                err = log2_add(err, a.err_log2);
            }
            Approx {
                value,
                err_log2: err,
            }
        }
        Expr::Mul(xs) => {
            let mut acc = Approx::exact(BigRational::one());
            for x in xs {
                acc = mul(&acc, &eval_approx(x, pt)?);
            }
            acc
        }
        Expr::Neg(x) => {
            let a = eval_approx(x, pt)?;
            Approx {
                value: -a.value,
                err_log2: a.err_log2,
            }
        }
        Expr::Pow(b, k) => powi(&eval_approx(b, pt)?, *k)?,
        Expr::Func(f, a) => apply(*f, &eval_approx(a, pt)?)?,
    })
}

/// Evaluates `e` at `pt`. Exact for expressions built from rational
/// operations; analytic functions contribute their 224-bit approximation.
pub fn eval(e: &Expr, pt: &ProbePoint) -> Result<BigRational, EvalError> {
    eval_approx(e, pt).map(|a| a.value)
}
