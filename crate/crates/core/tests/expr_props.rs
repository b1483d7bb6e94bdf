//! Properties of differentiation, simplification and `hod` on random
//! expression trees.

use std::collections::BTreeMap;

use daefix::expr::{
    eval_approx, hod, simplify, total_derivative, Approx, Func, ProbePoint, Symbol,
};
use daefix::{Expr, ZeroTest, ZeroVerdict};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use proptest::prelude::*;

mod common;

use common::{expr, griewank, VARS};

fn point(e: &Expr, seed: &[i64]) -> ProbePoint {
    let mut pt = ProbePoint::new();
    for (k, s) in e.symbols().into_iter().enumerate() {
        let n = seed[k % seed.len()] + k as i64;
        let v = BigRational::new(BigInt::from(n), BigInt::from(7 + k as i64));
        match s {
            Symbol::Time => pt.time = Some(v),
            Symbol::State { var, order } => {
                pt.states.insert((var, order), v);
            }
            Symbol::Input { name, order } => {
                pt.inputs.insert((name, order), v);
            }
            Symbol::Param(p) => {
                pt.params.insert(p, v);
            }
        }
    }
    pt
}

/// `|a - b|` lies within the sum of the two error bounds.
fn agree(a: &Approx, b: &Approx) -> bool {
    let diff = (&a.value - &b.value).abs();
    if a.is_exact() && b.is_exact() {
        return diff == BigRational::from_integer(0.into());
    }
    let bound = a.err_log2.max(b.err_log2) + 2.0;
    let diff = diff.to_f64().unwrap_or(f64::INFINITY);
    diff == 0.0 || diff.log2() <= bound
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// d e / d x_j^(q) = d e' / d x_j^(q+1) whenever hod(e, j) <= q.
    #[test]
    fn griewank_identity(e in expr(), j in 0..VARS, extra in 0u32..=1) {
        let r = griewank(&e, j, extra);
        prop_assert!(r.is_ok(), "{}", r.unwrap_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn linearity_of_total_derivative(e1 in expr(), e2 in expr()) {
        let a = Expr::param("c");
        let lhs = total_derivative(&(a.clone() * e1.clone() + e2.clone()), 1);
        let rhs = a * total_derivative(&e1, 1) + total_derivative(&e2, 1);
        prop_assert_eq!(ZeroTest::default().check(&(lhs - rhs)), ZeroVerdict::ProvenZero);
    }

    #[test]
    fn simplify_preserves_value(e in expr(), seed in prop::collection::vec(-20i64..=20, 4)) {
        let pt = point(&e, &seed);
        let raw = eval_approx(&e, &pt);
        prop_assume!(raw.is_ok());
        let s = eval_approx(&simplify(&e), &pt);
        prop_assert!(s.is_ok(), "simplified form fails where the original evaluates");
        prop_assert!(agree(&raw.unwrap(), &s.unwrap()));
    }

    #[test]
    fn simplify_is_idempotent(e in expr()) {
        let once = simplify(&e);
        prop_assert_eq!(simplify(&once), once);
    }

    #[test]
    fn substitution_of_identity_map_is_identity(e in expr()) {
        let map: BTreeMap<(usize, u32), Expr> = BTreeMap::new();
        prop_assert_eq!(e.substitute_states(&map), e);
    }
}

/// Leading terms here cannot cancel under one differentiation.
#[test]
fn hod_increases_by_one_on_non_cancelling_corpus() {
    let x = |j, k| Expr::state(j, k);
    let corpus = vec![
        (x(0, 0), 0),
        (x(0, 2) * x(1, 0), 0),
        (x(0, 1).pow(2) + Expr::Time * x(1, 1), 0),
        (Expr::func(Func::Sin, x(0, 1)) + x(2, 0), 0),
        (Expr::func(Func::Exp, x(0, 0) * x(1, 2)), 1),
        (x(1, 1) * x(1, 0) + x(0, 0).pow(3), 1),
        (x(2, 3) - Expr::input("h", 0), 2),
        (Expr::param("a") * x(2, 1) + x(0, 0) * x(2, 0), 2),
        (x(1, 0).pow(-1) + x(0, 1), 1),
        (Expr::func(Func::Cos, x(0, 0) + x(1, 0)), 0),
    ];
    for (e, j) in corpus {
        let h = hod(&e, j).expect("variable occurs");
        let d = total_derivative(&e, 1);
        assert_eq!(hod(&d, j), Some(h + 1), "{e}");
    }
}

#[test]
fn hod_can_drop_after_cancellation() {
    let x0 = Expr::state(0, 1);
    let e = x0.clone() - x0 + Expr::state(0, 0);
    assert_eq!(hod(&e, 0), Some(0));
    assert_eq!(e.formal_hod(0), Some(1));
}
