//! Linear-combination conversion: replace one equation by a combination of
//! derivatives of equations weighted by a cokernel vector of `J`.

use serde::Serialize;

use super::{below, vector_hod, ConvertError, RESIDUAL_PROBES};
use crate::dae::{DaeSystem, Mode, Provenance};
use crate::expr::{cancel_reciprocals, probe_vanishes, total_derivative, total_derivative_raw, Expr};
use crate::linalg::{NullVector, Side};
use crate::structural::{signature_matrix, OffsetPair};
use crate::ZeroTest;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LcAnalysis {
    #[serde(skip)]
    pub u: NullVector,
    /// Rows with `u_i` not identically zero.
    pub i_set: Vec<usize>,
    /// `min c_i` over `i_set`.
    pub c_under: i64,
    /// Rows of `i_set` attaining `c_under`; empty when the condition fails.
    pub l_set: Vec<usize>,
    /// Rows of `l_set` with constant `u_l`.
    pub l_hat: Vec<usize>,
    /// `hod(x_j, u) < d_j - c_under` for every `j`.
    pub condition_ok: bool,
}

/// Derives the index sets for `u` and checks the order condition.
pub fn lc_analyze(pair: &OffsetPair, u: &NullVector) -> LcAnalysis {
    let i_set = u.support();
    let c_under = i_set.iter().map(|&i| pair.c[i]).min().unwrap_or(0);
    let condition_ok = !i_set.is_empty()
        && (0..pair.d.len()).all(|j| below(vector_hod(&u.entries, j), pair.d[j] - c_under));
    let (l_set, l_hat) = if condition_ok {
        let l_set: Vec<usize> = i_set.iter().copied().filter(|&i| pair.c[i] == c_under).collect();
        let l_hat = l_set.iter().copied().filter(|&i| u.is_nonzero_constant(i)).collect();
        (l_set, l_hat)
    } else {
        (Vec::new(), Vec::new())
    };
    LcAnalysis {
        u: u.clone(),
        i_set,
        c_under,
        l_set,
        l_hat,
        condition_ok,
    }
}

/// Terms `u_i f_i^(c_i - c_under)` for `i` in `I`, differentiated by `form`.
fn combination(
    sys: &DaeSystem,
    pair: &OffsetPair,
    an: &LcAnalysis,
    skip: Option<usize>,
    form: impl Fn(&DaeSystem, usize, u32) -> Expr,
) -> Vec<Expr> {
    an.i_set
        .iter()
        .filter(|&&i| Some(i) != skip)
        .map(|&i| an.u.entries[i].clone() * form(sys, i, (pair.c[i] - an.c_under) as u32))
        .collect()
}

fn raw_derivative(sys: &DaeSystem, i: usize, k: u32) -> Expr {
    total_derivative_raw(&sys.equations[i].raw, k)
}

/// Replaces `f_l` by the combination. The new equation is stored in
/// canonical form, so formal and true signatures agree on it.
pub fn lc_apply(
    sys: &DaeSystem,
    pair: &OffsetPair,
    an: &LcAnalysis,
    l: usize,
    mode: Mode,
) -> Result<DaeSystem, ConvertError> {
    if an.u.side != Side::Cokernel {
        return Err(ConvertError::PreconditionViolated("LC needs a cokernel vector".into()));
    }
    if !an.condition_ok {
        return Err(ConvertError::PreconditionViolated("LC condition does not hold".into()));
    }
    if !an.l_set.contains(&l) {
        return Err(ConvertError::PreconditionViolated(format!(
            "row {} is not in L",
            l + 1
        )));
    }
    let terms = combination(sys, pair, an, None, |s, i, k| {
        total_derivative(&s.equations[i].simplified, k)
    });
    let fbar = cancel_reciprocals(&Expr::Add(terms));
    for j in 0..sys.n() {
        let bound = pair.d[j] - an.c_under;
        if !below(fbar.formal_hod(j).map(i64::from), bound) {
            return Err(ConvertError::OrderBound(format!(
                "x{} occurs in the new equation at order >= {bound}",
                j + 1
            )));
        }
    }
    let out = sys.replace_equation(l, fbar, Provenance::LcReplaced)?;
    let before = pair.d.iter().sum::<i64>() - pair.c.iter().sum::<i64>();
    let after = signature_matrix(&out, mode).value;
    if !below(after, before) {
        return Err(ConvertError::NoDecrease { before, after });
    }
    Ok(out)
}

/// Checks `u_l f_l = fbar_l - sum_{i in I, i != l} u_i f_i^(c_i - c_under)`,
/// so `f_l` can be recovered wherever `u_l` is nonzero.
pub fn lc_recover_check(
    original: &DaeSystem,
    converted: &DaeSystem,
    pair: &OffsetPair,
    an: &LcAnalysis,
    l: usize,
    zt: &ZeroTest,
) -> bool {
    let rest = combination(original, pair, an, Some(l), raw_derivative);
    let lhs = an.u.entries[l].clone() * original.equations[l].raw.clone();
    let rhs = converted.equations[l].raw.clone() - Expr::Add(rest);
    zt.check(&(lhs - rhs)).is_zero_like()
}

/// Evaluates the new equation and the combination of original equations,
/// both as written, at [`RESIDUAL_PROBES`] random points.
pub fn lc_residual_check(
    original: &DaeSystem,
    converted: &DaeSystem,
    pair: &OffsetPair,
    an: &LcAnalysis,
    l: usize,
    seed: u64,
) -> bool {
    let terms = combination(original, pair, an, None, raw_derivative);
    let diff = converted.equations[l].raw.clone() - Expr::Add(terms);
    probe_vanishes(&diff, RESIDUAL_PROBES, seed).is_some()
}
