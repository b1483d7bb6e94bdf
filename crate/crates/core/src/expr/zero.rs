//! Tri-state zero testing.
//!
//! `ProvenZero` comes only from simplification to `Const(0)`. Otherwise the
//! expression is evaluated at pseudo-random rational points drawn from a
//! ChaCha8 stream seeded with [`ZeroTest::seed`]: every symbol gets
//! `p/q` with `p` uniform in `[-50, 50]` and `q` uniform in `[1, 50]`. A
//! value whose error bound excludes zero gives `ProvenNonZero`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::eval::{eval_approx, EvalError, ProbePoint};
use super::{simplify, Expr, Symbol};

/// Probing parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZeroTest {
    pub budget: usize,
    pub seed: u64,
}

impl Default for ZeroTest {
    fn default() -> Self {
        ZeroTest { budget: 8, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "verdict")]
pub enum ZeroVerdict {
    ProvenZero,
    ProvenNonZero,
    /// Zero at `probes` points. `degraded` is set when domain errors left
    /// fewer than the requested number of usable points.
    ProbablyZero { probes: usize, degraded: bool },
}

impl ZeroVerdict {
    /// Treated as zero for singularity decisions.
    pub fn is_zero_like(self) -> bool {
        !matches!(self, ZeroVerdict::ProvenNonZero)
    }

    pub fn is_nonzero(self) -> bool {
        matches!(self, ZeroVerdict::ProvenNonZero)
    }

    pub fn is_probable(self) -> bool {
        matches!(self, ZeroVerdict::ProbablyZero { .. })
    }
}

/// Draws one rational with numerator in `[-50, 50]`, denominator in `[1, 50]`.
pub(crate) fn draw_rational(rng: &mut impl Rng) -> BigRational {
    let p: i64 = rng.gen_range(-50..=50);
    let q: i64 = rng.gen_range(1..=50);
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// A point binding every symbol in `symbols`.
pub(crate) fn draw_point(symbols: &BTreeSet<Symbol>, rng: &mut impl Rng) -> ProbePoint {
    let mut pt = ProbePoint::new();
    for s in symbols {
        let v = draw_rational(rng);
        match s {
            Symbol::Time => pt.time = Some(v),
            Symbol::State { var, order } => {
                pt.states.insert((*var, *order), v);
            }
            Symbol::Input { name, order } => {
                pt.inputs.insert((name.clone(), *order), v);
            }
            Symbol::Param(p) => {
                pt.params.insert(p.clone(), v);
            }
        }
    }
    pt
}

pub(crate) fn probe_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

impl ZeroTest {
    pub fn new(budget: usize, seed: u64) -> Self {
        ZeroTest {
            budget: budget.max(1),
            seed,
        }
    }

    /// Classifies `e`. Domain errors cause a redraw, up to `10 * budget`
    /// draws in total.
    pub fn check(&self, e: &Expr) -> ZeroVerdict {
        let s = simplify(e);
        if s.is_zero_const() {
            return ZeroVerdict::ProvenZero;
        }
        if let Expr::Const(_) = s {
            return ZeroVerdict::ProvenNonZero;
        }
        let symbols = s.symbols();
        let mut rng = probe_rng(self.seed);
        let budget = self.budget.max(1);
        let mut used = 0;
        for _ in 0..budget * 10 {
            if used == budget {
                break;
            }
            let pt = draw_point(&symbols, &mut rng);
            match eval_approx(&s, &pt) {
                Ok(v) => {
                    if v.certainly_nonzero() {
                        return ZeroVerdict::ProvenNonZero;
                    }
                    used += 1;
                }
                Err(EvalError::DomainError { .. }) => continue,
                Err(EvalError::MissingBinding(_)) => unreachable!("probe binds every symbol"),
            }
        }
        ZeroVerdict::ProbablyZero {
            probes: used,
            degraded: used < budget,
        }
    }
}

/// Evaluates `e` as written, without simplification, at `points` random
/// points drawn from `seed`. Returns the number of points evaluated, or
/// `None` when some point certifies a nonzero value. Domain errors cause a
/// redraw, up to `10 * points` draws.
pub fn probe_vanishes(e: &Expr, points: usize, seed: u64) -> Option<usize> {
    let symbols = e.symbols();
    let mut rng = probe_rng(seed);
    let mut used = 0;
    for _ in 0..points.max(1) * 10 {
        if used == points {
            break;
        }
        let pt = draw_point(&symbols, &mut rng);
        match eval_approx(e, &pt) {
            Ok(v) if v.certainly_nonzero() => return None,
            Ok(_) => used += 1,
            Err(_) => continue,
        }
    }
    Some(used)
}

/// [`ZeroTest::check`] with the given budget and the default seed.
pub fn is_zero(e: &Expr, budget: usize) -> ZeroVerdict {
    ZeroTest::new(budget, ZeroTest::default().seed).check(e)
}
