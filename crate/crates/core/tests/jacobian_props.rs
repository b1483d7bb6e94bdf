//! The System Jacobian's determinant does not depend on the valid offset
//! pair, and entries off the equality positions are zero.

use daefix::dae::Mode;
use daefix::jacobian::{det_symbolic, system_jacobian};
use daefix::structural::{canonical_offsets, signature_matrix, validate_offsets, OffsetPair};
use daefix::{parse_dae, ZeroTest, ZeroVerdict};

const SYSTEMS: &[&str] = &[
    "dae pendulum\nvars x, y, lam\nparams G, L\neq f1: x'' + x*lam = 0\neq f2: y'' + y*lam - G = 0\neq f3: x^2 + y^2 - L^2 = 0\n",
    "dae lc\nvars x1, x2, x3, x4\ninput g1, g2\neq f1: -x1' + x3 = 0\neq f2: -x2' + x4 = 0\neq f3: x1*x2 + g1(t) = 0\neq f4: -x1 - x2 + g1'(t) - g2(t) = 0\n",
    "dae chain\nvars a, b, c\neq f1: a'' + b*c = 0\neq f2: b' - a*c' = 0\neq f3: a + b + c^2 = 0\n",
    "dae mixed\nvars p, q, r\ninput u\neq f1: p' + q^2 - u(t) = 0\neq f2: q'' + p*r = 0\neq f3: r + p' + q' = 0\n",
];

/// Every valid pair with `c <= bound` and `d` at its least value for `c`.
fn valid_pairs(sigma: &daefix::structural::SignatureMatrix, bound: i64) -> Vec<OffsetPair> {
    let n = sigma.n;
    let mut out = Vec::new();
    let mut c = vec![0i64; n];
    loop {
        let d = (0..n)
            .map(|j| (0..n).filter_map(|i| sigma.entries[i][j].map(|s| s + c[i])).max().unwrap())
            .collect();
        let pair = OffsetPair {
            c: c.clone(),
            d,
            canonical: false,
        };
        if validate_offsets(sigma, &pair) {
            out.push(pair);
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

#[test]
fn determinant_is_offset_independent() {
    let zt = ZeroTest::default();
    for src in SYSTEMS {
        let sys = parse_dae(src).unwrap();
        let sigma = signature_matrix(&sys, Mode::True);
        let canon = canonical_offsets(&sigma).unwrap();
        let reference = det_symbolic(&system_jacobian(&sys, &sigma, &canon, Mode::True, &zt).entries).unwrap();
        let pairs = valid_pairs(&sigma, 4);
        assert!(pairs.len() > 1, "{}: no second valid pair", sys.name);
        for pair in pairs {
            let j = system_jacobian(&sys, &sigma, &pair, Mode::True, &zt);
            let det = det_symbolic(&j.entries).unwrap();
            assert_eq!(
                zt.check(&(det - reference.clone())),
                ZeroVerdict::ProvenZero,
                "{}: c = {:?}",
                sys.name,
                pair.c
            );
        }
    }
}

#[test]
fn entries_off_equality_positions_are_zero() {
    let zt = ZeroTest::default();
    for src in SYSTEMS {
        let sys = parse_dae(src).unwrap();
        let sigma = signature_matrix(&sys, Mode::True);
        for pair in valid_pairs(&sigma, 2) {
            let j = system_jacobian(&sys, &sigma, &pair, Mode::True, &zt);
            for r in 0..sys.n() {
                for c in 0..sys.n() {
                    let on = sigma.entries[r][c] == Some(pair.d[c] - pair.c[r]);
                    if !on {
                        assert!(j.entries[r][c].is_zero_const(), "{} ({r}, {c})", sys.name);
                    }
                    let shaded = matches!(sigma.entries[r][c], Some(s) if s < pair.d[c] - pair.c[r]);
                    assert_eq!(j.shaded.contains(&(r, c)), shaded);
                }
            }
        }
    }
}
