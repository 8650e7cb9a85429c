// Property-based invariants.

use pirlab_core::capacity::{outer_bound_2422_series, ratio, theorem3};
use pirlab_core::matrix::row_space_intersect;
use pirlab_core::scheme::{registry_build, Overrides, SchemeId};
use pirlab_core::seed::derive_seed;
use pirlab_core::session::run_seeded;
use pirlab_core::stats::chi2_sf;
use pirlab_core::storage::{k_subsets, StorageCode};
use pirlab_core::{FieldPrime, Matrix};
use proptest::prelude::*;

const PRIMES: [u32; 6] = [2, 3, 5, 13, 349, 10007];

fn field() -> impl Strategy<Value = FieldPrime> {
    prop::sample::select(PRIMES.to_vec()).prop_map(|p| FieldPrime::new(p).unwrap())
}

fn matrix(rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> impl Strategy<Value = Matrix> {
    (field(), rows, cols).prop_flat_map(|(f, r, c)| {
        prop::collection::vec(0..f.p(), r * c).prop_map(move |d| Matrix::from_vec(f, r, c, d).unwrap())
    })
}

fn square_pair() -> impl Strategy<Value = (Matrix, Matrix)> {
    (field(), 1usize..6).prop_flat_map(|(f, n)| {
        let m = move || prop::collection::vec(0..f.p(), n * n).prop_map(move |d| Matrix::from_vec(f, n, n, d).unwrap());
        (m(), m())
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn field_axioms(f in field(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let (a, b, c) = (a % f.p(), b % f.p(), c % f.p());
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(f.sub(a, b), b), a);
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn rank_is_transpose_invariant(m in matrix(1..7, 1..7)) {
        prop_assert_eq!(m.rank(), m.transpose().rank());
        prop_assert!(m.rank() <= m.rows().min(m.cols()));
    }

    #[test]
    fn product_transpose((a, b) in square_pair()) {
        prop_assert_eq!(a.mul(&b).unwrap().transpose(), b.transpose().mul(&a.transpose()).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().det().unwrap(), a.field().mul(a.det().unwrap(), b.det().unwrap()));
    }

    #[test]
    fn rref_certificate(m in matrix(1..6, 1..7)) {
        let r = m.rref();
        prop_assert_eq!(r.basis_change.mul(&m).unwrap(), r.rref.clone());
        prop_assert_eq!(r.basis_change.rank(), m.rows());
        prop_assert_eq!(r.pivots.len(), m.rank());
    }

    #[test]
    fn inverse_round_trip((a, _) in square_pair()) {
        match a.invert() {
            Ok(inv) => {
                prop_assert_ne!(a.det().unwrap(), 0);
                prop_assert_eq!(a.mul(&inv).unwrap(), Matrix::identity(a.field(), a.rows()));
            }
            Err(_) => prop_assert_eq!(a.det().unwrap(), 0),
        }
    }

    #[test]
    fn null_space_dimension(m in matrix(1..6, 1..7)) {
        let ns = m.null_space();
        prop_assert_eq!(ns.rows() + m.rank(), m.cols());
        if ns.rows() > 0 {
            prop_assert!(m.mul(&ns.transpose()).unwrap().is_zero());
            prop_assert_eq!(ns.rank(), ns.rows());
        }
    }

    #[test]
    fn intersection_dimension(f in field(), r1 in 1usize..5, r2 in 1usize..5, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = pirlab_core::seed::rng_from_seed(seed);
        let mut draw = |r: usize| Matrix::from_vec(f, r, 5, (0..r * 5).map(|_| rng.gen_range(0..f.p())).collect()).unwrap();
        let (a, b) = (draw(r1), draw(r2));
        let i = row_space_intersect(&a, &b).unwrap();
        let stack = Matrix::vstack(f, 5, &[&a, &b]).unwrap();
        prop_assert_eq!(i.rank(), a.rank() + b.rank() - stack.rank());
        prop_assert!(a.spans(&i) && b.spans(&i));
    }

    #[test]
    fn parity_code_round_trip(kc in 1usize..5, blocks in 1usize..4, seed in any::<u64>()) {
        use rand::Rng;
        let f = FieldPrime::new(10007).unwrap();
        let code = StorageCode::parity(f, kc);
        let mut rng = pirlab_core::seed::rng_from_seed(seed);
        let w: Vec<u32> = (0..kc * blocks).map(|_| rng.gen_range(0..f.p())).collect();
        let shares = code.encode(&w).unwrap().shares;
        prop_assert!(code.check_mds().passed);
        for s in k_subsets(kc + 1, kc) {
            let picked: Vec<(usize, Vec<u32>)> = s.iter().map(|&n| (n, shares[n].clone())).collect();
            prop_assert_eq!(code.reconstruct(&picked).unwrap(), w.clone());
        }
    }

    #[test]
    fn chi2_tail_is_monotone(df in 1usize..200, x in 0.0f64..500.0, dx in 0.0f64..50.0) {
        let a = chi2_sf(x, df);
        let b = chi2_sf(x + dx, df);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a + 1e-12);
    }

    #[test]
    fn seeds_do_not_collide(base in any::<u64>(), i in 0u64..1_000_000, j in 0u64..1_000_000) {
        prop_assume!(i != j);
        prop_assert_ne!(derive_seed(base, i), derive_seed(base, j));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn zero_error_schemes_always_decode(idx in 0usize..8, theta in 0usize..2, seed in any::<u64>()) {
        let ids = [
            SchemeId::Ctrex2422,
            SchemeId::ClassT2 { n: 4 },
            SchemeId::Tab2322,
            SchemeId::Tab2432,
            SchemeId::Cyclic2422,
            SchemeId::Ex1Restricted,
            SchemeId::Ex2Restricted,
            SchemeId::BaselineDownloadAll { k: 2 },
        ];
        let s = registry_build(ids[idx], &Overrides::default()).unwrap();
        let (msgs, t) = run_seeded(&s, theta, seed).unwrap();
        prop_assert_eq!(t.decoded.as_ref().unwrap(), &msgs[theta]);
        prop_assert_eq!(t.counts.download, s.download_total());
        prop_assert_eq!(ratio(s.params.l as i64, t.counts.download as i64), s.declared_rate.clone());
    }
}

#[test]
fn family_bound_decreases_toward_limit() {
    let s = outer_bound_2422_series(60);
    for w in s.windows(2) {
        assert!(w[1] < w[0]);
        assert!(w[1] > ratio(5, 14));
    }
}

#[test]
fn theorem3_between_half_and_one() {
    for n in 2..30 {
        for t in 1..=n {
            let v = theorem3(n, t).unwrap();
            assert!(v >= ratio(1, 2) && v <= ratio(1, 1), "N={n} T={t}");
        }
    }
}
