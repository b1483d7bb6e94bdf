//! Generators and checks shared by the property suites and the acceptance
//! harness. Checks return `Err` with a message instead of panicking.
#![allow(dead_code)]

use daefix::convert::{
    analyze_system, check_es_block_structure, es_analyze, es_apply, es_residual_check, fix_dae, lc_analyze,
    lc_apply, lc_recover_check, lc_residual_check, EsSubstitution, FixOptions, Status,
};
use daefix::dae::Mode;
use daefix::expr::{hod, partial, simplify, total_derivative, Func};
use daefix::jacobian::Classification;
use daefix::linalg::{normalize_candidates, nullspace_basis, Side};
use daefix::structural::{canonical_offsets, signature_matrix, validate_offsets, SignatureMatrix};
use daefix::{DaeSystem, Expr, ZeroTest, ZeroVerdict};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

pub const VARS: usize = 3;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-4i64..=4).prop_map(Expr::int),
        Just(Expr::Time),
        (0..VARS, 0u32..=2).prop_map(|(v, k)| Expr::state(v, k)),
        (0u32..=1).prop_map(|k| Expr::input("h", k)),
        Just(Expr::param("a")),
    ]
}

/// Trees over `+`, `*`, `-`, small integer powers, `sin`, `cos` and `exp`.
pub fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Expr::Add),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Expr::Mul),
            inner.clone().prop_map(|e| -e),
            (inner.clone(), -1i32..=3).prop_map(|(e, k)| e.pow(k)),
            (inner, 0usize..3).prop_map(|(e, f)| {
                let f = [Func::Sin, Func::Cos, Func::Exp][f];
                // keep exp arguments small enough to evaluate
                let arg = if f == Func::Exp { Expr::func(Func::Sin, e) } else { e };
                Expr::func(f, arg)
            }),
        ]
    })
}

/// `d e / d x_j^(q) = d e' / d x_j^(q+1)` for `q = hod(e, j) + extra`.
pub fn griewank(e: &Expr, j: usize, extra: u32) -> Result<(), String> {
    let q = hod(e, j).map_or(extra, |h| h + extra);
    let lhs = partial(e, j, q);
    let rhs = partial(&total_derivative(e, 1), j, q + 1);
    let verdict = ZeroTest::default().check(&(lhs - rhs));
    ensure!(verdict == ZeroVerdict::ProvenZero, "x{j}^({q}): {verdict:?}");
    Ok(())
}

pub type Entries = Vec<Vec<Option<i64>>>;

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn transversal_sum(w: &Entries, p: &[usize]) -> Option<i64> {
    p.iter().enumerate().map(|(i, &j)| w[i][j]).sum()
}

/// Maximum over all permutations, `None` when every one meets `-inf`.
pub fn brute_value(w: &Entries) -> Option<i64> {
    permutations(w.len())
        .iter()
        .filter_map(|p| transversal_sum(w, p))
        .max()
}

/// Entries in `{-inf, 0..=max}` with a planted finite permutation.
pub fn swp_matrix(n: usize, max: i64) -> impl Strategy<Value = Entries> {
    let cell = prop_oneof![2 => Just(None), 3 => (0..=max).prop_map(Some)];
    (
        prop::collection::vec(prop::collection::vec(cell, n), n),
        Just(permutations(n)),
        any::<prop::sample::Index>(),
        prop::collection::vec(0..=max, n),
    )
        .prop_map(|(mut w, perms, idx, planted)| {
            let p = idx.get(&perms);
            for (i, &j) in p.iter().enumerate() {
                if w[i][j].is_none() {
                    w[i][j] = Some(planted[i]);
                }
            }
            w
        })
}

/// Every valid pair with `c <= bound`, with each `d` at its least value
/// `max_i (sigma_ij + c_i)` for the given `c`.
pub fn brute_valid_pairs(w: &Entries, value: i64, bound: i64) -> Vec<(Vec<i64>, Vec<i64>)> {
    let n = w.len();
    let mut out = Vec::new();
    let mut c = vec![0i64; n];
    loop {
        let d: Vec<i64> = (0..n)
            .map(|j| (0..n).filter_map(|i| w[i][j].map(|s| s + c[i])).max().unwrap_or(0))
            .collect();
        if d.iter().sum::<i64>() - c.iter().sum::<i64>() == value {
            out.push((c.clone(), d));
        }
        let mut k = 0;
        while k < n && c[k] == bound {
            c[k] = 0;
            k += 1;
        }
        if k == n {
            return out;
        }
        c[k] += 1;
    }
}

/// The canonical pair is valid and elementwise below every valid pair
/// found by exhaustive search with entries of `c` up to `3n + 1`.
pub fn canonical_is_smallest(w: &Entries) -> Result<(), String> {
    let sigma = SignatureMatrix::from_entries(w.clone());
    let value = brute_value(w).ok_or("no finite transversal")?;
    let pair = canonical_offsets(&sigma).map_err(|e| e.to_string())?;
    ensure!(validate_offsets(&sigma, &pair), "canonical pair invalid");
    ensure!(
        pair.d.iter().sum::<i64>() - pair.c.iter().sum::<i64>() == value,
        "sum d - sum c differs from val {value}"
    );
    let bound = w.len() as i64 * 3 + 1;
    let all = brute_valid_pairs(w, value, bound);
    ensure!(all.iter().any(|(c, d)| *c == pair.c && *d == pair.d), "canonical pair not found by search");
    for (c, d) in &all {
        ensure!(c.iter().zip(&pair.c).all(|(a, b)| b <= a), "c {c:?} below canonical {:?}", pair.c);
        ensure!(d.iter().zip(&pair.d).all(|(a, b)| b <= a), "d {d:?} below canonical {:?}", pair.d);
    }
    Ok(())
}

fn coefficient(rng: &mut ChaCha8Rng, with_t: bool) -> Expr {
    let k = Expr::int(rng.gen_range(-2..=2));
    if with_t && rng.gen_bool(0.25) {
        k * Expr::Time
    } else {
        k
    }
}

fn matmul(a: &[Vec<Expr>], b: &[Vec<Expr>]) -> Vec<Vec<Expr>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| simplify(&Expr::Add((0..n).map(|k| a[i][k].clone() * b[k][j].clone()).collect())))
                .collect()
        })
        .collect()
}

/// Row-permuted product of unit lower and unit upper triangular matrices.
fn unimodular(n: usize, rng: &mut ChaCha8Rng, with_t: bool) -> Vec<Vec<Expr>> {
    let tri = |rng: &mut ChaCha8Rng, upper: bool| -> Vec<Vec<Expr>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match (i == j, (j > i) == upper) {
                        (true, _) => Expr::one(),
                        (false, true) => coefficient(rng, with_t),
                        (false, false) => Expr::zero(),
                    })
                    .collect()
            })
            .collect()
    };
    let l = tri(rng, false);
    let u = tri(rng, true);
    let mut m = matmul(&l, &u);
    m.shuffle(rng);
    m
}

/// A semi-explicit index-1 system in `z`, rewritten through `z = T x` and
/// mixed by `M`, with `T` and `M` unimodular and possibly depending on `t`.
/// Leading derivatives then occur in every equation, so the System
/// Jacobian is usually identically singular while the solution set is
/// unchanged.
pub fn linear_instance(seed: u64) -> DaeSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=4);
    let m = rng.gen_range(1..n);
    let with_t = seed % 3 == 0;
    let t = unimodular(n, &mut rng, with_t);
    let mix = unimodular(n, &mut rng, with_t);
    let z: Vec<Expr> = (0..n)
        .map(|k| simplify(&Expr::Add((0..n).map(|j| t[k][j].clone() * Expr::state(j, 0)).collect())))
        .collect();
    let g: Vec<Expr> = (0..n)
        .map(|k| {
            let lead = if k < m { total_derivative(&z[k], 1) } else { z[k].clone() };
            let coupling: Vec<Expr> = (0..m)
                .map(|j| Expr::int(rng.gen_range(-3..=3)) * z[j].clone())
                .collect();
            lead + Expr::Add(coupling) - Expr::input(format!("b{}", k + 1), 0)
        })
        .collect();
    let equations = (0..n)
        .map(|i| {
            let f = Expr::Add((0..n).map(|k| mix[i][k].clone() * g[k].clone()).collect());
            (format!("f{}", i + 1), simplify(&f))
        })
        .collect();
    DaeSystem::new(
        format!("random{seed}"),
        (0..n).map(|j| format!("x{}", j + 1)).collect(),
        equations,
        vec![],
        (0..n).map(|k| format!("b{}", k + 1)).collect(),
    )
    .unwrap()
}

#[derive(Debug, Default)]
pub struct Tally {
    pub singular: usize,
    pub lc: usize,
    pub es: usize,
    pub block_checks: usize,
    pub driver_steps: usize,
}

/// Every LC application (all pivots of every candidate), every ES
/// application (both substitution modes, every provably nonzero pivot),
/// then the unforced driver. Each must lower val, and pass recovery,
/// residual and block-structure checks.
pub fn exercise_conversions(sys: &DaeSystem, seed: u64, tally: &mut Tally) -> Result<(), String> {
    let zt = ZeroTest::default();
    let a = analyze_system(sys, Mode::True, &zt).map_err(|e| e.to_string())?;
    if a.classification() != Some(Classification::IdenticallySingular) {
        return Ok(());
    }
    tally.singular += 1;
    let value = a.value().ok_or("ill posed")?;
    let pair = a.pair.as_ref().ok_or("no offsets")?;
    let j = &a.jacobian.as_ref().ok_or("no Jacobian")?.entries;

    for u0 in nullspace_basis(j, Side::Cokernel, &zt).map_err(|e| e.to_string())? {
        for u in normalize_candidates(j, &u0, &zt) {
            let an = lc_analyze(pair, &u);
            for &l in &an.l_set {
                let out = lc_apply(sys, pair, &an, l, Mode::True).map_err(|e| e.to_string())?;
                let after = signature_matrix(&out, Mode::True).value;
                ensure!(after.map_or(true, |v| v < value), "seed {seed}: LC {value} -> {after:?}");
                ensure!(lc_recover_check(sys, &out, pair, &an, l, &zt), "seed {seed}: LC recovery");
                ensure!(lc_residual_check(sys, &out, pair, &an, l, seed), "seed {seed}: LC residual");
                tally.lc += 1;
            }
        }
    }

    for v0 in nullspace_basis(j, Side::Kernel, &zt).map_err(|e| e.to_string())? {
        for v in normalize_candidates(j, &v0, &zt) {
            let an = es_analyze(&a.sigma, pair, &v);
            for &l in &an.j_set {
                if v.nonzero[l] != ZeroVerdict::ProvenNonZero {
                    continue;
                }
                for mode in [EsSubstitution::Literal, EsSubstitution::Full] {
                    let applied = es_apply(sys, pair, &an, l, mode, Mode::True).map_err(|e| e.to_string())?;
                    let after = signature_matrix(&applied.system, Mode::True).value;
                    ensure!(after.map_or(true, |v| v < value), "seed {seed}: ES {value} -> {after:?}");
                    check_es_block_structure(pair, &an, &applied, Mode::True)
                        .map_err(|e| format!("seed {seed}: block structure: {e}"))?;
                    tally.block_checks += 1;
                    ensure!(es_residual_check(sys, &applied, seed), "seed {seed}: ES residual");
                    tally.es += 1;
                }
            }
        }
    }

    let report = fix_dae(sys, &FixOptions::default()).map_err(|e| format!("seed {seed}: {e}"))?;
    ensure!(report.status == Status::Success, "seed {seed}: driver {:?}", report.status);
    ensure!(report.steps.len() as i64 <= value, "seed {seed}: more steps than val");
    let mut last = value;
    for step in &report.steps {
        let after = step.after.value.ok_or("driver produced an ill-posed system")?;
        ensure!(after < last, "seed {seed}: driver {last} -> {after}");
        last = after;
        let c = &step.checks;
        for check in [c.recovery, c.residual, c.block_structure].into_iter().flatten() {
            ensure!(check, "seed {seed}: driver self-check");
        }
        tally.driver_steps += 1;
    }
    Ok(())
}
