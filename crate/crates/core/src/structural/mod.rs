//! Signature-matrix analysis.
//!
//! `sigma[i][j]` is the highest order to which `x_j` occurs in `f_i`, `None`
//! standing for minus infinity. Offsets satisfy `c_i >= 0`,
//! `d_j - c_i >= sigma[i][j]`, with equality on a highest-value transversal.

mod assignment;
mod scheme;

use serde::Serialize;

use crate::dae::{DaeSystem, Mode};
use crate::expr::{partial, ZeroTest, ZeroVerdict};

pub use scheme::{solution_scheme, SolutionScheme, Stage};

pub(crate) use assignment::best_value;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StructuralError {
    #[error("the system is structurally ill posed (no finite transversal)")]
    NotSwp,
    #[error("offset iteration did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("computed offsets failed validation")]
    InvalidOffsets,
}

/// Square matrix over `Int ∪ {-inf}` with a cached highest-value transversal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignatureMatrix {
    pub n: usize,
    pub entries: Vec<Vec<Option<i64>>>,
    /// `valΣ`, `None` when the system is structurally ill posed.
    pub value: Option<i64>,
    /// One HVT as `(row, col)` pairs sorted by row; empty when ill posed.
    pub hvt: Vec<(usize, usize)>,
}

impl SignatureMatrix {
    pub fn from_entries(entries: Vec<Vec<Option<i64>>>) -> Self {
        let n = entries.len();
        assert!(entries.iter().all(|r| r.len() == n), "signature matrix must be square");
        let (value, hvt) = match hvt(&entries) {
            Some((v, t)) => (Some(v), t),
            None => (None, Vec::new()),
        };
        SignatureMatrix {
            n,
            entries,
            value,
            hvt,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<i64> {
        self.entries[i][j]
    }

    /// Structurally well posed.
    pub fn is_swp(&self) -> bool {
        self.value.is_some()
    }

    pub fn max_entry(&self) -> Option<i64> {
        self.entries.iter().flatten().flatten().copied().max()
    }
}

/// `Σ` of `sys`: formal mode reads the trees as written, true mode the
/// simplified equations.
pub fn signature_matrix(sys: &DaeSystem, mode: Mode) -> SignatureMatrix {
    let n = sys.n();
    let entries = sys
        .equations
        .iter()
        .map(|eq| {
            let e = eq.expr(mode);
            (0..n).map(|j| e.formal_hod(j).map(i64::from)).collect()
        })
        .collect();
    SignatureMatrix::from_entries(entries)
}

/// Highest-value transversal: `(valΣ, transversal)`, or `None` when no
/// transversal avoids `-inf`. Ties go to the lexicographically smallest
/// row-to-column assignment.
pub fn hvt(entries: &[Vec<Option<i64>>]) -> Option<(i64, Vec<(usize, usize)>)> {
    assignment::max_transversal(entries)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OffsetPair {
    pub c: Vec<i64>,
    pub d: Vec<i64>,
    pub canonical: bool,
}

/// Elementwise-smallest valid offsets by the fixed-point iteration
/// `d_j = max_i (sigma_ij + c_i)`, `c_i = d_T(i) - sigma_i,T(i)` from `c = 0`.
pub fn canonical_offsets(sigma: &SignatureMatrix) -> Result<OffsetPair, StructuralError> {
    if !sigma.is_swp() {
        return Err(StructuralError::NotSwp);
    }
    let n = sigma.n;
    let max = sigma.max_entry().unwrap_or(0).max(0) as usize;
    let cap = (n + 1) * (max + 2);
    let mut c = vec![0i64; n];
    let mut d = vec![0i64; n];
    for _ in 0..cap {
        for (j, dj) in d.iter_mut().enumerate() {
            *dj = (0..n)
                .filter_map(|i| sigma.entries[i][j].map(|s| s + c[i]))
                .max()
                .expect("an SWP column has a finite entry");
        }
        let mut changed = false;
        for &(i, j) in &sigma.hvt {
            let ci = d[j] - sigma.entries[i][j].expect("HVT entries are finite");
            if ci != c[i] {
                c[i] = ci;
                changed = true;
            }
        }
        if !changed {
            let pair = OffsetPair {
                c,
                d,
                canonical: true,
            };
            if !validate_offsets(sigma, &pair) {
                return Err(StructuralError::InvalidOffsets);
            }
            return Ok(pair);
        }
    }
    Err(StructuralError::NoConvergence(cap))
}

/// True iff `c >= 0`, `d_j - c_i >= sigma_ij` everywhere and equality holds
/// on the cached HVT (hence on every HVT).
pub fn validate_offsets(sigma: &SignatureMatrix, pair: &OffsetPair) -> bool {
    let n = sigma.n;
    if pair.c.len() != n || pair.d.len() != n || pair.c.iter().any(|&c| c < 0) {
        return false;
    }
    for i in 0..n {
        for j in 0..n {
            if let Some(s) = sigma.entries[i][j] {
                if pair.d[j] - pair.c[i] < s {
                    return false;
                }
            }
        }
    }
    let Some(value) = sigma.value else {
        return false;
    };
    let on_hvt: i64 = sigma.hvt.iter().map(|&(i, j)| pair.d[j] - pair.c[i]).sum();
    on_hvt == value
}

/// `ν_S = max_i c_i + (1 if min_j d_j = 0)` for canonical offsets.
pub fn structural_index(pair: &OffsetPair) -> i64 {
    let max_c = pair.c.iter().copied().max().unwrap_or(0);
    let min_d = pair.d.iter().copied().min().unwrap_or(1);
    max_c + i64::from(min_d == 0)
}

/// Degrees of freedom `valΣ`, checked against `Σd - Σc` of the canonical pair.
pub fn dof(sigma: &SignatureMatrix) -> Result<i64, StructuralError> {
    let value = sigma.value.ok_or(StructuralError::NotSwp)?;
    let pair = canonical_offsets(sigma)?;
    let from_offsets = pair.d.iter().sum::<i64>() - pair.c.iter().sum::<i64>();
    if from_offsets != value {
        return Err(StructuralError::InvalidOffsets);
    }
    Ok(value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Quasilinearity {
    JointlyLinear,
    Nonlinear,
}

/// Whether the stage-0 unknowns `x_j^(d_j)` occur jointly linearly in the
/// `f_i^(c_i)`. For `c_i >= 1`, `f_i^(c_i)` is linear in its highest-order
/// symbols and their coefficients have lower order, so only rows with
/// `c_i = 0` need second partials.
pub fn quasilinearity(
    sys: &DaeSystem,
    pair: &OffsetPair,
    mode: Mode,
    zt: &ZeroTest,
) -> Quasilinearity {
    let n = sys.n();
    for (i, eq) in sys.equations.iter().enumerate() {
        if pair.c[i] != 0 {
            continue;
        }
        let f = eq.expr(mode);
        for j in 0..n {
            if pair.d[j] < 0 {
                continue;
            }
            let first = partial(f, j, pair.d[j] as u32);
            if first.is_zero_const() {
                continue;
            }
            for k in j..n {
                if pair.d[k] < 0 {
                    continue;
                }
                let second = partial(&first, k, pair.d[k] as u32);
                if zt.check(&second) != ZeroVerdict::ProvenZero {
                    return Quasilinearity::Nonlinear;
                }
            }
        }
    }
    Quasilinearity::JointlyLinear
}

/// Differences between a formal and a true signature matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignatureComparison {
    /// `(i, j, formal, true)` where the formal entry exceeds the true one.
    pub differing: Vec<(usize, usize, Option<i64>, Option<i64>)>,
    pub formal_value: Option<i64>,
    pub true_value: Option<i64>,
    /// Set when `valΣ̃ > valΣ`: the formal System Jacobian must then be
    /// structurally singular.
    pub formal_jacobian_singular: bool,
}

impl SignatureComparison {
    pub fn is_empty(&self) -> bool {
        self.differing.is_empty() && self.formal_value == self.true_value
    }
}

pub fn compare_signatures(formal: &SignatureMatrix, true_: &SignatureMatrix) -> SignatureComparison {
    assert_eq!(formal.n, true_.n, "signature matrices differ in size");
    let mut differing = Vec::new();
    for i in 0..formal.n {
        for j in 0..formal.n {
            let (a, b) = (formal.entries[i][j], true_.entries[i][j]);
            if a != b {
                differing.push((i, j, a, b));
            }
        }
    }
    let singular = match (formal.value, true_.value) {
        (Some(a), Some(b)) => a > b,
        (Some(_), None) => true,
        _ => false,
    };
    SignatureComparison {
        differing,
        formal_value: formal.value,
        true_value: true_.value,
        formal_jacobian_singular: singular,
    }
}
