//! Kernel and cokernel vectors of a singular symbolic matrix.
//!
//! Elimination is fraction-free Gauss-Jordan: a row update is
//! `p * row_i - a_ic * row_pivot`, followed by removal of any factor common
//! to the whole row. Pivots must be proven nonzero, so a reduced row never
//! hides a cancellation that only holds on a subvariety.

use serde::Serialize;

use crate::expr::simplify::{is_nowhere_zero, leading_coeff, term_count};
use crate::expr::{common_factor, exact_quotient, simplify, Expr, ZeroTest, ZeroVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    /// `J v = 0`.
    Kernel,
    /// `J^T u = 0`.
    Cokernel,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LinalgError {
    /// Column `col` has no proven-nonzero pivot candidate but an entry that
    /// is only probably zero.
    #[error("elimination stuck at column {col}: entry `{entry}` is only probably zero")]
    EliminationStuck { row: usize, col: usize, entry: String },
    #[error("null vector failed verification: residual entry {0} is nonzero")]
    ResidualNonzero(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct NullVector {
    pub side: Side,
    pub entries: Vec<Expr>,
    /// Entry is a constant.
    pub constant: Vec<bool>,
    pub nonzero: Vec<ZeroVerdict>,
}

impl NullVector {
    pub fn new(side: Side, entries: Vec<Expr>, zt: &ZeroTest) -> NullVector {
        let entries: Vec<Expr> = entries.iter().map(simplify).collect();
        let constant = entries.iter().map(Expr::is_const).collect();
        let nonzero = entries.iter().map(|e| zt.check(e)).collect();
        NullVector {
            side,
            entries,
            constant,
            nonzero,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Indices of entries not identically zero.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.nonzero[i].is_zero_like()).collect()
    }

    /// Entry `i` is a nonzero constant.
    pub fn is_nonzero_constant(&self, i: usize) -> bool {
        self.constant[i] && self.nonzero[i] == ZeroVerdict::ProvenNonZero
    }

    pub fn constant_count(&self) -> usize {
        (0..self.len()).filter(|&i| self.is_nonzero_constant(i)).count()
    }

    /// Some verdict on an entry is only probable.
    pub fn is_probable(&self) -> bool {
        self.nonzero.iter().any(|v| v.is_probable())
    }
}

/// `J v` for a kernel vector, `J^T u` for a cokernel vector.
pub fn residual(j: &[Vec<Expr>], v: &NullVector) -> Vec<Expr> {
    let n = j.len();
    (0..n)
        .map(|k| {
            let terms: Vec<Expr> = (0..n)
                .filter(|&m| !v.entries[m].is_zero_const())
                .map(|m| {
                    let a = match v.side {
                        Side::Kernel => &j[k][m],
                        Side::Cokernel => &j[m][k],
                    };
                    a.clone() * v.entries[m].clone()
                })
                .collect();
            simplify(&Expr::Add(terms))
        })
        .collect()
}

/// Residual entries vanish (proven or probably) and some entry of `v` is
/// proven nonzero.
pub fn verify(j: &[Vec<Expr>], v: &NullVector, zt: &ZeroTest) -> Result<(), LinalgError> {
    if !v.nonzero.contains(&ZeroVerdict::ProvenNonZero) {
        return Err(LinalgError::ResidualNonzero(usize::MAX));
    }
    for (k, r) in residual(j, v).iter().enumerate() {
        if !zt.check(r).is_zero_like() {
            return Err(LinalgError::ResidualNonzero(k));
        }
    }
    Ok(())
}

struct Reduced {
    rows: Vec<Vec<Expr>>,
    /// `(row, col)` of each pivot; pivot rows are zero in other pivot columns.
    pivots: Vec<(usize, usize)>,
}

fn pivot_rank(e: &Expr) -> (bool, usize) {
    (!e.is_const(), e.size())
}

/// Divides every entry by `q` when all divisions are exact.
fn divide_all(entries: &[Expr], q: &Expr) -> Option<Vec<Expr>> {
    entries
        .iter()
        .map(|e| {
            if e.is_zero_const() {
                Some(Expr::zero())
            } else {
                exact_quotient(e, q)
            }
        })
        .collect()
}

/// Removes the monomial content and any of `hints` that divide every entry.
fn strip_common(mut entries: Vec<Expr>, hints: &[Expr]) -> Vec<Expr> {
    let nonzero: Vec<Expr> = entries.iter().filter(|e| !e.is_zero_const()).cloned().collect();
    if nonzero.is_empty() {
        return entries;
    }
    let g = common_factor(&nonzero);
    if g != Expr::one() {
        if let Some(q) = divide_all(&entries, &g) {
            entries = q;
        }
    }
    let mut changed = true;
    while changed {
        changed = false;
        let mut candidates: Vec<Expr> = hints.to_vec();
        candidates.extend(entries.iter().filter(|e| !e.is_zero_const()).cloned());
        for q in candidates {
            if q.is_const() || term_count(&q) < 2 {
                continue;
            }
            if let Some(next) = divide_all(&entries, &q) {
                if next != entries {
                    entries = next;
                    changed = true;
                    break;
                }
            }
        }
    }
    entries
}

fn eliminate(mut a: Vec<Vec<Expr>>, zt: &ZeroTest) -> Result<Reduced, LinalgError> {
    let nrows = a.len();
    let ncols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == nrows {
            break;
        }
        let mut best: Option<usize> = None;
        let mut ambiguous: Option<usize> = None;
        for i in r..nrows {
            match zt.check(&a[i][col]) {
                ZeroVerdict::ProvenNonZero => {
                    if best.map_or(true, |b| pivot_rank(&a[i][col]) < pivot_rank(&a[b][col])) {
                        best = Some(i);
                    }
                }
                ZeroVerdict::ProbablyZero { .. } if !a[i][col].is_zero_const() => {
                    ambiguous.get_or_insert(i);
                }
                _ => {}
            }
        }
        let Some(p_row) = best else {
            if let Some(i) = ambiguous {
                return Err(LinalgError::EliminationStuck {
                    row: i,
                    col,
                    entry: a[i][col].to_string(),
                });
            }
            continue;
        };
        a.swap(r, p_row);
        let p = a[r][col].clone();
        for i in 0..nrows {
            if i == r || a[i][col].is_zero_const() {
                continue;
            }
            let f = a[i][col].clone();
            let row: Vec<Expr> = (0..ncols)
                .map(|k| {
                    if k == col {
                        Expr::zero()
                    } else {
                        simplify(&(p.clone() * a[i][k].clone() - f.clone() * a[r][k].clone()))
                    }
                })
                .collect();
            a[i] = strip_common(row, std::slice::from_ref(&p));
        }
        pivots.push((r, col));
        r += 1;
    }
    Ok(Reduced { rows: a, pivots })
}

fn normalize_sign(entries: Vec<Expr>) -> Vec<Expr> {
    match entries.iter().find(|e| !e.is_zero_const()) {
        Some(first) if leading_coeff(first) < num_rational::BigRational::from_integer(0.into()) => {
            entries.into_iter().map(|e| simplify(&-e)).collect()
        }
        _ => entries,
    }
}

/// One null vector per free column of the reduced matrix, lowest free
/// column first. Empty when the matrix has full rank.
pub fn nullspace_basis(
    j: &[Vec<Expr>],
    side: Side,
    zt: &ZeroTest,
) -> Result<Vec<NullVector>, LinalgError> {
    let n = j.len();
    let m: Vec<Vec<Expr>> = match side {
        Side::Kernel => j.iter().map(|r| r.iter().map(simplify).collect()).collect(),
        Side::Cokernel => (0..n).map(|c| (0..n).map(|r| simplify(&j[r][c])).collect()).collect(),
    };
    let red = eliminate(m, zt)?;
    let pivot_cols: Vec<usize> = red.pivots.iter().map(|&(_, c)| c).collect();
    let mut out = Vec::new();
    for f in (0..n).filter(|c| !pivot_cols.contains(c)) {
        let involved: Vec<(usize, usize)> = red
            .pivots
            .iter()
            .copied()
            .filter(|&(r, _)| !red.rows[r][f].is_zero_const())
            .collect();
        let pivot_val = |r: usize, c: usize| red.rows[r][c].clone();
        let product = |skip: Option<usize>| {
            Expr::Mul(
                involved
                    .iter()
                    .filter(|&&(r, _)| Some(r) != skip)
                    .map(|&(r, c)| pivot_val(r, c))
                    .collect(),
            )
        };
        let mut entries = vec![Expr::zero(); n];
        entries[f] = simplify(&product(None));
        for &(r, c) in &involved {
            entries[c] = simplify(&-(red.rows[r][f].clone() * product(Some(r))));
        }
        let hints: Vec<Expr> = involved.iter().map(|&(r, c)| pivot_val(r, c)).collect();
        let entries = normalize_sign(strip_common(entries, &hints));
        let v = NullVector::new(side, entries, zt);
        verify(j, &v, zt)?;
        out.push(v);
    }
    Ok(out)
}

/// The first basis vector, `None` when the matrix has full rank.
pub fn nullspace_vector(
    j: &[Vec<Expr>],
    side: Side,
    zt: &ZeroTest,
) -> Result<Option<NullVector>, LinalgError> {
    Ok(nullspace_basis(j, side, zt)?.into_iter().next())
}

/// Rescalings of `v` to try in the conversion conditions: `v` itself and
/// `v / v_k` for each proven-nonzero `v_k` that divides every entry exactly
/// or vanishes nowhere. Verified candidates with more constant entries come
/// first. A vector of constants yields only itself.
pub fn normalize_candidates(j: &[Vec<Expr>], v: &NullVector, zt: &ZeroTest) -> Vec<NullVector> {
    if v.entries.iter().all(Expr::is_const) {
        return vec![v.clone()];
    }
    let mut out = vec![v.clone()];
    for k in 0..v.len() {
        if v.nonzero[k] != ZeroVerdict::ProvenNonZero {
            continue;
        }
        let q = &v.entries[k];
        let scaled = divide_all(&v.entries, q).or_else(|| {
            is_nowhere_zero(q).then(|| {
                let inv = Expr::pow(q.clone(), -1);
                v.entries.iter().map(|e| simplify(&(e.clone() * inv.clone()))).collect()
            })
        });
        let Some(entries) = scaled else { continue };
        let w = NullVector::new(v.side, entries, zt);
        if out.iter().any(|o| o.entries == w.entries) || verify(j, &w, zt).is_err() {
            continue;
        }
        out.push(w);
    }
    out.sort_by_key(|w| std::cmp::Reverse(w.constant_count()));
    out
}
