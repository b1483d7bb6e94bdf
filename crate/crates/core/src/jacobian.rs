//! The System Jacobian `J_ij = ∂f_i/∂x_j^(d_j - c_i)` where
//! `d_j - c_i = sigma_ij`, and zero elsewhere.
//!
//! Entries are first partials of the undifferentiated `f_i`, which equal
//! the partials of `f_i^(c_i)` with respect to `x_j^(d_j)`.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::dae::{DaeSystem, Mode};
use crate::expr::{eval_approx, partial, simplify, Expr, ZeroTest, ZeroVerdict};
use crate::structural::{best_value, OffsetPair, SignatureMatrix};

/// Largest `n` for which the determinant is expanded symbolically.
pub const DET_BOUND: usize = 8;

/// Number of random points for the rank test above [`DET_BOUND`].
pub const RANK_PROBES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    GenericallyNonsingular,
    /// No transversal avoids entries proven zero.
    StructurallySingular,
    /// A transversal exists but the determinant is proven zero.
    IdenticallySingular,
    /// A transversal exists and the determinant vanished at every probe
    /// without being proven zero. Treated as identically singular.
    UnknownProbable,
}

impl Classification {
    pub fn is_singular(self) -> bool {
        self != Classification::GenericallyNonsingular
    }

    /// Identically but not structurally singular (proven or probable).
    pub fn is_identically_singular(self) -> bool {
        matches!(
            self,
            Classification::IdenticallySingular | Classification::UnknownProbable
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum JacobianError {
    #[error("matrix of size {0} exceeds the symbolic determinant bound {DET_BOUND}")]
    SizeExceeded(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemJacobian {
    pub n: usize,
    pub entries: Vec<Vec<Expr>>,
    pub verdicts: Vec<Vec<ZeroVerdict>>,
    pub c: Vec<i64>,
    pub d: Vec<i64>,
    /// `(i, j)` with `d_j - c_i > sigma_ij` (finite or not): forced zeros.
    pub shaded: Vec<(usize, usize)>,
}

/// Builds the System Jacobian of `sys` for the offsets `pair`.
pub fn system_jacobian(
    sys: &DaeSystem,
    sigma: &SignatureMatrix,
    pair: &OffsetPair,
    mode: Mode,
    zt: &ZeroTest,
) -> SystemJacobian {
    let n = sys.n();
    let mut entries = vec![vec![Expr::zero(); n]; n];
    let mut verdicts = vec![vec![ZeroVerdict::ProvenZero; n]; n];
    let mut shaded = Vec::new();
    for i in 0..n {
        let f = sys.equations[i].expr(mode);
        for j in 0..n {
            let gap = pair.d[j] - pair.c[i];
            match sigma.entries[i][j] {
                Some(s) if s == gap => {
                    let e = partial(f, j, s as u32);
                    verdicts[i][j] = zt.check(&e);
                    entries[i][j] = e;
                }
                Some(_) => shaded.push((i, j)),
                None => {}
            }
        }
    }
    SystemJacobian {
        n,
        entries,
        verdicts,
        c: pair.c.clone(),
        d: pair.d.clone(),
        shaded,
    }
}

impl SystemJacobian {
    /// Whether some transversal avoids entries proven zero.
    pub fn has_structural_transversal(&self) -> bool {
        let w: Vec<Vec<Option<i64>>> = self
            .verdicts
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| (*v != ZeroVerdict::ProvenZero).then_some(0))
                    .collect()
            })
            .collect();
        let all: Vec<usize> = (0..self.n).collect();
        best_value(&w, &all, &all).is_some()
    }

    pub fn transpose(&self) -> Vec<Vec<Expr>> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.entries[i][j].clone()).collect())
            .collect()
    }
}

/// Determinant by Laplace expansion along rows, memoised over the set of
/// remaining columns. Division free, so it is exact in the expression ring.
pub fn det_symbolic(m: &[Vec<Expr>]) -> Result<Expr, JacobianError> {
    let n = m.len();
    if n > DET_BOUND {
        return Err(JacobianError::SizeExceeded(n));
    }
    if n == 0 {
        return Ok(Expr::one());
    }
    let mut memo: HashMap<u32, Expr> = HashMap::new();
    let full: u32 = ((1u64 << n) - 1) as u32;
    Ok(minor(m, 0, full, &mut memo))
}

/// Determinant of rows `row..n` against the columns in `cols`.
fn minor(m: &[Vec<Expr>], row: usize, cols: u32, memo: &mut HashMap<u32, Expr>) -> Expr {
    if cols == 0 {
        return Expr::one();
    }
    if let Some(e) = memo.get(&cols) {
        return e.clone();
    }
    let mut terms = Vec::new();
    let mut sign_pos = 0;
    for j in 0..m.len() {
        if cols & (1 << j) == 0 {
            continue;
        }
        let a = &m[row][j];
        if !a.is_zero_const() {
            let sub = minor(m, row + 1, cols & !(1 << j), memo);
            if !sub.is_zero_const() {
                let t = a.clone() * sub;
                terms.push(if sign_pos % 2 == 0 { t } else { -t });
            }
        }
        sign_pos += 1;
    }
    let out = simplify(&Expr::Add(terms));
    memo.insert(cols, out.clone());
    out
}

/// Result of [`classify`].
#[derive(Clone, Debug, PartialEq)]
pub struct JacobianVerdict {
    pub classification: Classification,
    /// The symbolic determinant, when `n <= DET_BOUND`.
    pub det: Option<Expr>,
    pub det_verdict: Option<ZeroVerdict>,
    /// A probabilistic test decided the outcome.
    pub probable: bool,
}

/// Structural check, then the determinant's zero verdict (or a randomized
/// rank test above [`DET_BOUND`]).
pub fn classify(j: &SystemJacobian, zt: &ZeroTest) -> JacobianVerdict {
    if !j.has_structural_transversal() {
        return JacobianVerdict {
            classification: Classification::StructurallySingular,
            det: None,
            det_verdict: None,
            probable: false,
        };
    }
    match det_symbolic(&j.entries) {
        Ok(det) => {
            let v = zt.check(&det);
            let classification = match v {
                ZeroVerdict::ProvenZero => Classification::IdenticallySingular,
                ZeroVerdict::ProvenNonZero => Classification::GenericallyNonsingular,
                ZeroVerdict::ProbablyZero { .. } => Classification::UnknownProbable,
            };
            JacobianVerdict {
                classification,
                det: Some(det),
                det_verdict: Some(v),
                probable: v.is_probable(),
            }
        }
        Err(JacobianError::SizeExceeded(_)) => {
            let full = probe_full_rank(&j.entries, zt);
            JacobianVerdict {
                classification: if full {
                    Classification::GenericallyNonsingular
                } else {
                    Classification::UnknownProbable
                },
                det: None,
                det_verdict: None,
                probable: !full,
            }
        }
    }
}

/// Evaluates `m` at [`RANK_PROBES`] random points and reports whether the
/// determinant is certainly nonzero at any of them. Analytic-function
/// rounding is covered by a Hadamard-type bound on the perturbation.
fn probe_full_rank(m: &[Vec<Expr>], zt: &ZeroTest) -> bool {
    use crate::expr::zero::{draw_point, probe_rng};
    let mut symbols = std::collections::BTreeSet::new();
    for e in m.iter().flatten() {
        e.collect_symbols(&mut symbols);
    }
    let mut rng = probe_rng(zt.seed);
    let mut done = 0;
    for _ in 0..RANK_PROBES * 10 {
        if done == RANK_PROBES {
            break;
        }
        let pt = draw_point(&symbols, &mut rng);
        let vals: Result<Vec<Vec<_>>, _> = m
            .iter()
            .map(|r| r.iter().map(|e| eval_approx(e, &pt)).collect())
            .collect();
        let Ok(vals) = vals else { continue };
        done += 1;
        let a: Vec<Vec<BigRational>> = vals
            .iter()
            .map(|r| r.iter().map(|x| x.value.clone()).collect())
            .collect();
        let det = rational_det(a.clone());
        if det.is_zero() {
            continue;
        }
        let exact = vals.iter().flatten().all(|x| x.is_exact());
        if exact {
            return true;
        }
        // |det(A+E) - det(A)| <= prod(|a_i| + |e_i|) - prod |a_i|
        //                     = prod |a_i| * (exp(sum ln(1 + |e_i|/|a_i|)) - 1)
        let n = m.len() as f64;
        let mut log_prod = 0.0f64;
        let mut growth = 0.0f64;
        for (row, vrow) in a.iter().zip(&vals) {
            let norm: f64 = row
                .iter()
                .map(|x| num_traits::ToPrimitive::to_f64(&x.abs()).unwrap_or(f64::MAX).powi(2))
                .sum::<f64>()
                .sqrt();
            let err = vrow.iter().map(|x| x.err_log2).fold(f64::NEG_INFINITY, f64::max);
            log_prod += norm.log2();
            growth += (n.sqrt() * err.exp2() / norm).ln_1p();
        }
        let bound = log_prod + growth.exp_m1().log2();
        let mag = num_traits::ToPrimitive::to_f64(&det.abs())
            .unwrap_or(f64::MAX)
            .log2();
        if mag > bound + 1.0 {
            return true;
        }
    }
    false
}

/// Exact determinant of a rational matrix by Gaussian elimination.
pub(crate) fn rational_det(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let n = a.len();
    let mut det = BigRational::from_integer(1.into());
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pivot = a[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &pivot;
            for k in col..n {
                let t = &f * &a[col][k];
                a[r][k] -= t;
            }
        }
    }
    det
}
