// Coded storage and the exact capacity arithmetic.

use num_traits::ToPrimitive;
use pirlab_core::capacity::*;
use pirlab_core::scheme::{registry_build, Overrides, SchemeId};
use pirlab_core::seed::rng_from_seed;
use pirlab_core::storage::{k_subsets, StorageCode};
use pirlab_core::{Error, FieldPrime};
use rand::Rng;

fn fp(p: u32) -> FieldPrime {
    FieldPrime::new(p).unwrap()
}

fn code_2422(p: u32) -> StorageCode {
    StorageCode::from_rows(fp(p), &[[1, 0], [0, 1], [1, 1], [1, 2]]).unwrap()
}

fn msg(p: u32, len: usize, seed: u64) -> Vec<u32> {
    let mut rng = rng_from_seed(seed);
    (0..len).map(|_| rng.gen_range(0..p)).collect()
}

// --- storage -----------------------------------------------------------------

#[test]
fn two_symbol_code_shares() {
    let p = 349;
    let w = msg(p, 12, 1);
    let (a, b) = w.split_at(6);
    let s = code_2422(p).encode(&w).unwrap().shares;
    assert_eq!(s[0], a);
    assert_eq!(s[1], b);
    let add = |k: u32| -> Vec<u32> { a.iter().zip(b).map(|(x, y)| (x + k * y) % p).collect() };
    assert_eq!(s[2], add(1));
    assert_eq!(s[3], add(2));
}

#[test]
fn parity_code_fourth_share_is_sum() {
    let p = 10007;
    let w = msg(p, 12, 2);
    let s = StorageCode::parity(fp(p), 3).encode(&w).unwrap().shares;
    for i in 0..4 {
        assert_eq!(s[3][i], (w[i] + w[4 + i] + w[8 + i]) % p);
        assert_eq!(s[1][i], w[4 + i]);
    }
}

#[test]
fn zero_message_gives_zero_shares() {
    let s = code_2422(349).encode(&[0; 12]).unwrap();
    assert!(s.shares.iter().flatten().all(|&x| x == 0));
}

#[test]
fn mds_check_over_349() {
    let r = code_2422(349).check_mds();
    assert!(r.passed);
    assert_eq!(r.subsets.len(), 6);
}

#[test]
fn mds_check_fails_over_2() {
    let r = code_2422(2).check_mds();
    assert!(!r.passed);
    // oracle: 2x2 minors computed by hand-written determinant mod 2
    let g = [[1i64, 0], [0, 1], [1, 1], [1, 2]];
    for (s, ok) in &r.subsets {
        let (x, y) = (g[s[0]], g[s[1]]);
        let det = (x[0] * y[1] - x[1] * y[0]).rem_euclid(2);
        assert_eq!(*ok, det != 0, "subset {s:?}");
    }
    // x + 2y collapses onto x
    assert!(r.subsets.iter().any(|(s, ok)| *s == vec![0, 3] && !ok));
    assert!(r.subsets.iter().filter(|(_, ok)| !ok).count() == 1);
}

#[test]
fn ternary_table_code_is_mds() {
    let s = registry_build(SchemeId::Tab2432, &Overrides::default()).unwrap();
    assert_eq!(s.params.field.p(), 13);
    let r = s.code.check_mds();
    assert!(r.passed);
    assert_eq!(r.subsets.len(), 6);
}

#[test]
fn reconstruct_from_any_pair() {
    let p = 349;
    let c = code_2422(p);
    for seed in 0..20 {
        let w = msg(p, 12, seed);
        let s = c.encode(&w).unwrap().shares;
        for pair in k_subsets(4, 2) {
            let got = c.reconstruct(&[(pair[0], s[pair[0]].clone()), (pair[1], s[pair[1]].clone())]).unwrap();
            assert_eq!(got, w, "pair {pair:?}");
        }
    }
}

#[test]
fn reconstruct_needs_k_c_shares() {
    let c = code_2422(349);
    let s = c.encode(&msg(349, 4, 9)).unwrap().shares;
    assert!(matches!(c.reconstruct(&[(0, s[0].clone())]), Err(Error::BadShareSet(_))));
    assert!(matches!(c.reconstruct(&[(1, s[1].clone()), (1, s[1].clone())]), Err(Error::BadShareSet(_))));
}

#[test]
fn length_must_divide() {
    assert_eq!(code_2422(7).encode(&[1, 2, 3]), Err(Error::LengthNotDivisible { len: 3, by: 2 }));
}

// --- capacity ----------------------------------------------------------------

fn f(r: &Rational) -> f64 {
    r.to_f64().unwrap()
}

/// Floating evaluation of `1 / sum_{i<k} r^i`.
fn geo(r: f64, k: u32) -> f64 {
    1.0 / (0..k).map(|i| r.powi(i as i32)).sum::<f64>()
}

#[test]
fn closed_forms() {
    assert_eq!(capacity_formula(CapacityKind::Fghk, 2, 4, 2, 2).unwrap(), ratio(4, 7));
    assert_eq!(capacity_formula(CapacityKind::Theorem3, 2, 4, 2, 3).unwrap(), ratio(6, 11));
    assert_eq!(capacity_formula(CapacityKind::Tpir, 2, 4, 3, 1).unwrap(), ratio(4, 7));
    assert_eq!(capacity_formula(CapacityKind::Pir, 1, 4, 1, 1).unwrap(), ratio(1, 1));
}

#[test]
fn closed_forms_match_float_oracle() {
    for k in 1..8 {
        for n in 2..7 {
            for t in 1..=n {
                let tp = capacity_formula(CapacityKind::Tpir, k, n, t, 1).unwrap();
                assert!((f(&tp) - geo(t as f64 / n as f64, k)).abs() < 1e-12);
                for kc in 1..=n {
                    let m = capacity_formula(CapacityKind::MdsPir, k, n, 1, kc).unwrap();
                    assert!((f(&m) - geo(kc as f64 / n as f64, k)).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn four_case_row() {
    let v: Vec<Rational> = four_case_table().into_iter().map(|r| r.value).collect();
    assert_eq!(v, vec![ratio(6, 11), ratio(4, 7), ratio(4, 7), ratio(4, 7)]);
}

#[test]
fn family_bound_values() {
    assert_eq!(outer_bound_2422_family(1).unwrap(), ratio(1, 1));
    assert_eq!(outer_bound_2422_family(2).unwrap(), ratio(8, 13));
    // by hand: 1 / (1 + 39/64 + 5/12) = 192/389
    assert_eq!(outer_bound_2422_family(3).unwrap(), ratio(192, 389));
    let c100 = outer_bound_2422_family(100).unwrap();
    assert!((f(&c100) - 5.0 / 14.0).abs() < 1e-9);
    assert_eq!(bound_2422_limit(), ratio(5, 14));
}

#[test]
fn family_bound_float_oracle() {
    let mut c = 1.0f64;
    let series = outer_bound_2422_series(40);
    for k in 2..=40u32 {
        c = 1.0 / (1.0 + 3.0 / (8.0 * c) + 0.75 * (1.0 - (2.0f64 / 3.0).powi(k as i32 - 1)));
        assert!((f(&series[k as usize - 1]) - c).abs() < 1e-12, "K = {k}");
    }
}

#[test]
fn general_bound_reduces_to_theorem3() {
    for n in 3..=12u32 {
        for t in 2..n {
            let g = outer_bound_general(2, n, t, n - 1).unwrap();
            let th = theorem3(n, t).unwrap();
            assert_eq!(g, th, "N={n} T={t}");
            let (ni, ti) = (n as i64, t as i64);
            assert_eq!(th, ratio(ni * ni - ni, 2 * ni * ni - 3 * ni + ti));
        }
    }
    assert_eq!(outer_bound_general(2, 3, 2, 2).unwrap(), ratio(6, 11));
}

#[test]
fn general_bound_scaled_limit() {
    for (n, t, kc) in [(4u32, 2u32, 3u32), (4, 3, 2), (5, 3, 4), (6, 4, 5)] {
        let lim = general_scaled_limit(n, t, kc).unwrap();
        assert_eq!(lim, ratio((t * kc) as i64, (n * (kc + t - n)) as i64));
        let k = 10_000;
        let scaled = k as f64 * outer_bound_general_f64(k, n, t, kc).unwrap();
        assert!((scaled - f(&lim)).abs() < 1e-3, "({n},{t},{kc}) {scaled} vs {}", f(&lim));
    }
}

#[test]
fn general_bound_rejects_n_at_least_t_plus_kc() {
    assert!(matches!(outer_bound_general(2, 4, 2, 2), Err(Error::BadParams(_))));
}

#[test]
fn fractions_are_reduced() {
    for r in outer_bound_2422_series(30) {
        use num_integer::Integer;
        assert!(r.numer().gcd(r.denom()) == 1.into());
    }
}
