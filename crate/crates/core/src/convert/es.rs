//! Expression-substitution conversion: introduce `s - 1` new variables along
//! a kernel vector of `J`, substitute them into the equations that attain
//! their offsets, and append their defining equations.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{below, vector_hod, ConvertError, RESIDUAL_PROBES};
use crate::dae::{DaeSystem, Equation, Mode, Provenance};
use crate::expr::{
    cancel_reciprocals, exact_quotient, probe_vanishes, simplify, total_derivative,
    total_derivative_raw, Expr,
};
use crate::linalg::{NullVector, Side};
use crate::structural::{signature_matrix, OffsetPair, SignatureMatrix};
use crate::ZeroVerdict;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EsAnalysis {
    #[serde(skip)]
    pub v: NullVector,
    /// Columns with `v_j` not identically zero; empty when the conditions
    /// fail.
    pub j_set: Vec<usize>,
    pub s: usize,
    /// Rows attaining `d_j - c_i = sigma_ij` for some `j` in the support.
    pub i_set: Vec<usize>,
    /// `max c_i` over `i_set`.
    pub c_over: i64,
    /// Columns of `j_set` with constant `v_j`.
    pub j_hat: Vec<usize>,
    pub condition_ok: bool,
}

/// Which derivatives of `x_j` (`j` in `Jset`, `j != l`) are rewritten in
/// row `i` of `Iset`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EsSubstitution {
    /// Only `x_j^(d_j - c_i)`.
    #[default]
    Literal,
    /// Every `x_j^(k)` with `k >= d_j - c_over`.
    Full,
}

/// Result of an ES step with the data needed to check it.
#[derive(Clone, Debug, PartialEq)]
pub struct EsApplied {
    pub system: DaeSystem,
    pub l: usize,
    pub c_over: i64,
    /// `(j, index of y_j)` for each introduced variable.
    pub new_vars: Vec<(usize, usize)>,
    /// `v_j / v_l` for each introduced variable.
    pub ratios: Vec<Expr>,
    /// `y_j` in terms of the original variables.
    pub definitions: Vec<Expr>,
}

/// Derives the index sets for `v` and checks the ES conditions.
pub fn es_analyze(sigma: &SignatureMatrix, pair: &OffsetPair, v: &NullVector) -> EsAnalysis {
    let support = v.support();
    let n = pair.d.len();
    let i_set: Vec<usize> = (0..n)
        .filter(|&i| {
            support
                .iter()
                .any(|&j| sigma.get(i, j) == Some(pair.d[j] - pair.c[i]))
        })
        .collect();
    let c_over = i_set.iter().map(|&i| pair.c[i]).max().unwrap_or(0);
    let condition_ok = !support.is_empty()
        && !i_set.is_empty()
        && (0..n).all(|j| {
            let gap = pair.d[j] - c_over;
            let h = vector_hod(&v.entries, j);
            if support.contains(&j) {
                below(h, gap) && gap >= 0
            } else {
                below(h, gap + 1)
            }
        });
    let (j_set, j_hat) = if condition_ok {
        let j_hat = support.iter().copied().filter(|&j| v.is_nonzero_constant(j)).collect();
        (support, j_hat)
    } else {
        (Vec::new(), Vec::new())
    };
    EsAnalysis {
        v: v.clone(),
        s: j_set.len(),
        j_set,
        i_set,
        c_over,
        j_hat,
        condition_ok,
    }
}

fn ratio(vj: &Expr, vl: &Expr) -> Expr {
    exact_quotient(vj, vl).unwrap_or_else(|| simplify(&(vj.clone() * Expr::pow(vl.clone(), -1))))
}

/// Substitutes until no target remains; the replacements only lower the
/// orders of substituted variables, so this terminates.
fn substitute_to_fixed_point(
    e: &Expr,
    map: &BTreeMap<(usize, u32), Expr>,
) -> Result<Expr, ConvertError> {
    let mut cur = simplify(e);
    for _ in 0..64 {
        let next = simplify(&cur.substitute_states(map));
        if next == cur {
            return Ok(cur);
        }
        cur = next;
    }
    Err(ConvertError::PreconditionViolated(
        "substitution did not terminate".into(),
    ))
}

/// Introduces `y_j = x_j^(d_j - c_over) - (v_j / v_l) x_l^(d_l - c_over)`
/// for `j` in `Jset \ {l}`, rewrites the rows of `Iset` and appends the
/// defining equations. New names continue the existing numbering when the
/// names form a sequence.
pub fn es_apply(
    sys: &DaeSystem,
    pair: &OffsetPair,
    an: &EsAnalysis,
    l: usize,
    substitution: EsSubstitution,
    mode: Mode,
) -> Result<EsApplied, ConvertError> {
    if an.v.side != Side::Kernel {
        return Err(ConvertError::PreconditionViolated("ES needs a kernel vector".into()));
    }
    if !an.condition_ok {
        return Err(ConvertError::PreconditionViolated("ES conditions do not hold".into()));
    }
    if !an.j_set.contains(&l) {
        return Err(ConvertError::PreconditionViolated(format!(
            "column {} is not in Jset",
            l + 1
        )));
    }
    if an.v.nonzero[l] != ZeroVerdict::ProvenNonZero {
        return Err(ConvertError::PreconditionViolated(format!(
            "v_{} is not proven nonzero",
            l + 1
        )));
    }
    let c_over = an.c_over;
    let vl = &an.v.entries[l];
    let xl = Expr::state(l, (pair.d[l] - c_over) as u32);
    let mut out = sys.clone();
    let mut new_vars = Vec::new();
    let mut ratios = Vec::new();
    let mut definitions = Vec::new();
    for &j in an.j_set.iter().filter(|&&j| j != l) {
        let r = ratio(&an.v.entries[j], vl);
        let def = Expr::state(j, (pair.d[j] - c_over) as u32) - r.clone() * xl.clone();
        let (var_alias, eq_alias) = (format!("y{}", j + 1), format!("g{}", j + 1));
        let (var_name, eq_name) = out.fresh_names(&var_alias, &eq_alias);
        let idx = out.vars.len();
        out.vars.push(var_name);
        let mut eq = Equation::new(eq_name, -Expr::state(idx, 0) + def.clone());
        eq.provenance = Provenance::EsAppended {
            var_alias,
            eq_alias,
        };
        out.equations.push(eq);
        new_vars.push((j, idx));
        ratios.push(r);
        definitions.push(simplify(&def));
    }
    // x_j = y_j + r_j x_l^(d_l - c_over), differentiated as needed
    let replacement = |p: usize, m: u32| {
        let (_, idx) = new_vars[p];
        total_derivative(&(Expr::state(idx, 0) + ratios[p].clone() * xl.clone()), m)
    };
    for &i in &an.i_set {
        let row = &sys.equations[i].simplified;
        let mut map = BTreeMap::new();
        for (p, &(j, _)) in new_vars.iter().enumerate() {
            let base = pair.d[j] - c_over;
            match substitution {
                EsSubstitution::Literal => {
                    let k = pair.d[j] - pair.c[i];
                    map.insert((j, k as u32), replacement(p, (c_over - pair.c[i]) as u32));
                }
                EsSubstitution::Full => {
                    let top = row.formal_hod(j).map_or(-1, i64::from);
                    for k in base..=top {
                        map.insert((j, k as u32), replacement(p, (k - base) as u32));
                    }
                }
            }
        }
        // ratios with a non-constant v_l cancel only over a common denominator
        let e = cancel_reciprocals(&substitute_to_fixed_point(row, &map)?);
        if e != *row {
            let eq = &mut out.equations[i];
            eq.raw = e.clone();
            eq.simplified = e;
            eq.provenance = Provenance::EsRewritten;
        }
    }
    let before = pair.d.iter().sum::<i64>() - pair.c.iter().sum::<i64>();
    let after = signature_matrix(&out, mode).value;
    if !below(after, before) {
        return Err(ConvertError::NoDecrease { before, after });
    }
    Ok(EsApplied {
        system: out,
        l,
        c_over,
        new_vars,
        ratios,
        definitions,
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Rel {
    Less,
    AtMost,
    Equal,
    Absent,
}

/// Rebuilds the auxiliary `y_l`, `g_l = -y_l + x_l^(d_l - c_over)` and checks
/// the block form of the enlarged signature matrix against the offsets
/// `c` extended and `d` extended by `c_over`.
pub fn check_es_block_structure(
    pair: &OffsetPair,
    an: &EsAnalysis,
    applied: &EsApplied,
    mode: Mode,
) -> Result<(), String> {
    let n = pair.c.len();
    let l = applied.l;
    let c_over = applied.c_over;
    let mut aux = applied.system.clone();
    let yl = aux.vars.len();
    aux.vars.push(format!("__y{}", l + 1));
    aux.equations.push(Equation::new(
        format!("__g{}", l + 1),
        -Expr::state(yl, 0) + Expr::state(l, (pair.d[l] - c_over) as u32),
    ));
    let sigma = signature_matrix(&aux, mode);
    let size = aux.vars.len();
    let mut cbar = pair.c.clone();
    let mut dbar = pair.d.clone();
    cbar.resize(size, c_over);
    dbar.resize(size, c_over);
    let others: Vec<usize> = applied.new_vars.iter().map(|&(j, _)| j).collect();
    let expected = |i: usize, j: usize| -> Rel {
        let in_jset = an.j_set.contains(&j);
        if i < n {
            return if j == yl {
                Rel::Absent
            } else if j < n && in_jset && j != l {
                Rel::Less
            } else {
                Rel::AtMost
            };
        }
        if i == yl {
            return if j == l || j == yl { Rel::Equal } else { Rel::Absent };
        }
        let own = others[i - n];
        if j >= n {
            return if j == i { Rel::Equal } else { Rel::Absent };
        }
        if j == own || j == l {
            Rel::Equal
        } else if in_jset {
            Rel::Less
        } else {
            Rel::AtMost
        }
    };
    for i in 0..size {
        for j in 0..size {
            let gap = dbar[j] - cbar[i];
            let s = sigma.get(i, j);
            let ok = match expected(i, j) {
                Rel::Less => below(s, gap),
                Rel::AtMost => below(s, gap + 1),
                Rel::Equal => s == Some(gap),
                Rel::Absent => s.is_none(),
            };
            if !ok {
                return Err(format!(
                    "entry ({}, {}) = {:?} breaks {:?} against d - c = {gap}",
                    aux.equations[i].name,
                    aux.vars[j],
                    s,
                    expected(i, j)
                ));
            }
        }
    }
    Ok(())
}

/// Substitutes each `y_j` by its definition and evaluates, as written, the
/// difference between every rewritten equation and its original, and every
/// appended equation, at [`RESIDUAL_PROBES`] random points.
pub fn es_residual_check(original: &DaeSystem, applied: &EsApplied, seed: u64) -> bool {
    let sys = &applied.system;
    let top = sys
        .equations
        .iter()
        .flat_map(|eq| applied.new_vars.iter().filter_map(|&(_, idx)| eq.raw.formal_hod(idx)))
        .max()
        .unwrap_or(0);
    let mut map = BTreeMap::new();
    for (p, &(_, idx)) in applied.new_vars.iter().enumerate() {
        for m in 0..=top {
            map.insert((idx, m), total_derivative_raw(&applied.definitions[p], m));
        }
    }
    sys.equations.iter().enumerate().all(|(i, eq)| {
        let mut diff = eq.raw.substitute_states(&map);
        if i < original.n() {
            diff = diff - original.equations[i].raw.clone();
        }
        probe_vanishes(&diff, RESIDUAL_PROBES, seed.wrapping_add(i as u64)).is_some()
    })
}
