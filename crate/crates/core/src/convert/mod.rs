//! The linear-combination (LC) and expression-substitution (ES) conversions
//! and the driver that applies them until the System Jacobian is
//! generically nonsingular.
//!
//! Every conversion strictly decreases the value of the signature matrix,
//! so the driver stops after at most `val(Sigma)` steps.

mod driver;
mod es;
mod lc;

pub use driver::{
    analyze_system, fix_dae, trace_step, ConversionReport, FixOptions, Snapshot, Status, Step,
    StepChecks, SystemAnalysis,
};
pub use es::{
    check_es_block_structure, es_analyze, es_apply, es_residual_check, EsAnalysis, EsApplied,
    EsSubstitution,
};
pub use lc::{lc_analyze, lc_apply, lc_recover_check, lc_residual_check, LcAnalysis};

use serde::Serialize;

use crate::dae::DaeError;
use crate::linalg::LinalgError;
use crate::structural::StructuralError;

/// Number of random points used by the residual-equivalence checks.
pub const RESIDUAL_PROBES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "LC")]
    Lc,
    #[serde(rename = "ES")]
    Es,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Lc => "LC",
            Method::Es => "ES",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Decision {
    UseLc(usize),
    UseEs(usize),
    Neither,
}

/// Global when the multiplier `u_l` or divisor `v_l` is a nonzero constant,
/// so the converted DAE has the same solutions everywhere; Local otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Grade {
    Global,
    Local,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ConvertError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("order bound violated: {0}")]
    OrderBound(String),
    #[error("signature value did not decrease ({before} -> {after:?})")]
    NoDecrease { before: i64, after: Option<i64> },
    #[error("self-check failed: {0}")]
    SelfCheck(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Structural(#[from] StructuralError),
    #[error(transparent)]
    Dae(#[from] DaeError),
}

/// Method selection: prefer the method whose pivot is a nonzero constant; on a tie
/// prefer LC, which keeps the system size. `l` is the smallest index of the
/// preferred set.
pub fn choose_method(lc: &LcAnalysis, es: &EsAnalysis) -> Decision {
    select_method(&lc.l_hat, &lc.l_set, &es.j_hat, &es.j_set)
}

pub(crate) fn select_method(l_hat: &[usize], l_set: &[usize], j_hat: &[usize], j_set: &[usize]) -> Decision {
    if let Some(&l) = l_hat.first() {
        return Decision::UseLc(l);
    }
    if let Some(&l) = l_set.first() {
        return match j_hat.first() {
            Some(&j) => Decision::UseEs(j),
            None => Decision::UseLc(l),
        };
    }
    match j_hat.first().or(j_set.first()) {
        Some(&j) => Decision::UseEs(j),
        None => Decision::Neither,
    }
}

/// Highest order of `x_j` over the entries of a vector, `None` for absent.
pub(crate) fn vector_hod(entries: &[crate::Expr], j: usize) -> Option<i64> {
    entries
        .iter()
        .filter_map(|e| e.formal_hod(j))
        .max()
        .map(i64::from)
}

/// `h < bound` with `None` as minus infinity.
pub(crate) fn below(h: Option<i64>, bound: i64) -> bool {
    h.map_or(true, |h| h < bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{NullVector, Side};
    use crate::{Expr, ZeroTest};

    fn lc(l_set: &[usize], l_hat: &[usize]) -> LcAnalysis {
        LcAnalysis {
            u: NullVector::new(Side::Cokernel, vec![Expr::one()], &ZeroTest::default()),
            i_set: l_set.to_vec(),
            c_under: 0,
            l_set: l_set.to_vec(),
            l_hat: l_hat.to_vec(),
            condition_ok: !l_set.is_empty(),
        }
    }

    fn es(j_set: &[usize], j_hat: &[usize]) -> EsAnalysis {
        EsAnalysis {
            v: NullVector::new(Side::Kernel, vec![Expr::one()], &ZeroTest::default()),
            j_set: j_set.to_vec(),
            s: j_set.len(),
            i_set: vec![],
            c_over: 0,
            j_hat: j_hat.to_vec(),
            condition_ok: !j_set.is_empty(),
        }
    }

    #[test]
    fn method_selection_rule() {
        // rows: L_hat nonempty / only L / L empty; columns: J_hat / only Jset / empty
        let lcs = [lc(&[1, 2], &[2]), lc(&[1, 2], &[]), lc(&[], &[])];
        let ess = [es(&[0, 3], &[3]), es(&[0, 3], &[]), es(&[], &[])];
        let expected = [
            [Decision::UseLc(2), Decision::UseLc(2), Decision::UseLc(2)],
            [Decision::UseEs(3), Decision::UseLc(1), Decision::UseLc(1)],
            [Decision::UseEs(3), Decision::UseEs(0), Decision::Neither],
        ];
        for (r, l) in lcs.iter().enumerate() {
            for (c, e) in ess.iter().enumerate() {
                assert_eq!(choose_method(l, e), expected[r][c], "row {r} col {c}");
            }
        }
    }
}
