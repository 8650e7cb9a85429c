// Combining matrices and the spreading matrix for the general-T class.

use pirlab_core::combiner::*;
use pirlab_core::scheme::{registry_build, Overrides, SchemeId};
use pirlab_core::{Error, FieldPrime, Matrix};

fn fp(p: u32) -> FieldPrime {
    FieldPrime::new(p).unwrap()
}

fn ctrex_structure(p: u32) -> InterferenceStructure {
    let s = registry_build(SchemeId::Ctrex2422, &Overrides::queries_only(Some(p))).unwrap();
    InterferenceStructure::for_scheme(&s).unwrap()
}

#[test]
fn reference_combiner_passes_every_realization() {
    let st = ctrex_structure(349);
    assert_eq!(st.realization_count(), 1296);
    let r = verify_combiner(&ctrex_reference_combiner(fp(349)), &st);
    assert_eq!(r.p1, vec![true; 4]);
    assert_eq!((r.realizations, r.failures), (1296, 0));
    assert!(r.pass);
}

/// Combiners whose directly downloaded rows are exactly the reference symbols
/// for one realization, so the interference matrix of that realization is I.
fn identity_realizing(f: FieldPrime) -> CombinerSet {
    let orders = ctrex_reference_orders();
    let basis = ctrex_reference_basis();
    let matrices = (0..4)
        .map(|n| {
            let wanted: Vec<usize> = basis.iter().filter(|(s, _)| *s == n).map(|(_, r)| *r).collect();
            let pos = |canon: usize| orders[n].iter().position(|&c| c == canon).unwrap();
            let rest = (0..3).find(|c| !wanted.contains(c)).unwrap();
            let mut m = Matrix::zeros(f, 3, 3);
            m.set(0, pos(wanted[0]), 1);
            m.set(1, pos(wanted[1]), 1);
            m.set(2, pos(rest), 1);
            m
        })
        .collect();
    CombinerSet { matrices, field: f, provenance: Provenance::Explicit }
}

#[test]
fn selection_combiner_gives_identity_interference_matrix() {
    let f = fp(349);
    let st = ctrex_structure(349);
    let set = identity_realizing(f);
    let c = interference_matrix(&set, &st, &ctrex_reference_orders(), &ctrex_reference_basis()).unwrap();
    assert_eq!(c, Matrix::identity(f, 8));
    assert_eq!(verify_combiner(&set, &st).p1, vec![true; 4]);
}

#[test]
fn zero_row_fails_p1() {
    let f = fp(349);
    let st = ctrex_structure(349);
    let mut set = ctrex_reference_combiner(f);
    for c in 0..3 {
        set.matrices[2].set(1, c, 0);
    }
    let r = verify_combiner(&set, &st);
    assert!(!r.p1[2]);
    assert!(r.p1[0] && r.p1[1] && r.p1[3]);
    assert!(!r.pass);
}

#[test]
fn class_t2_search_succeeds_quickly() {
    let s = registry_build(SchemeId::ClassT2 { n: 4 }, &Overrides::queries_only(Some(10007))).unwrap();
    let st = InterferenceStructure::for_scheme(&s).unwrap();
    let mut ok = 0;
    for seed in 0..20 {
        if let Ok(set) = search_combiner(&st, seed, 5) {
            assert!(verify_combiner(&set, &st).pass);
            assert!(matches!(set.provenance, Provenance::Searched { seed: s0, .. } if s0 == seed));
            assert!((1..=5).contains(&set_tries(&set)));
            ok += 1;
        }
    }
    // failure odds per try are O(1/p); all twenty should succeed
    assert_eq!(ok, 20);
}

fn set_tries(s: &CombinerSet) -> usize {
    match s.provenance {
        Provenance::Searched { tries, .. } => tries,
        _ => usize::MAX,
    }
}

#[test]
fn search_over_f2_exhausts() {
    let st = ctrex_structure(2);
    assert_eq!(search_combiner(&st, 1, 64), Err(Error::SearchExhausted { tries: 64 }));
}

#[test]
fn search_is_seed_deterministic() {
    let st = ctrex_structure(349);
    let a = search_combiner(&st, 42, 64).unwrap();
    let b = search_combiner(&st, 42, 64).unwrap();
    assert_eq!(a, b);
    assert!(verify_combiner(&a, &st).pass);
    assert!(matches!(search_combiner(&st, 42, 0), Err(Error::BadParams(_))));
}

#[test]
fn per_session_schemes_have_no_fixed_structure() {
    let s = registry_build(SchemeId::ClassTgen { n: 4, t: 3 }, &Overrides::default()).unwrap();
    assert!(matches!(InterferenceStructure::for_scheme(&s), Err(Error::BadParams(_))));
}

// --- spreading matrix ---------------------------------------------------------

fn unit_combo(f: FieldPrime, v: &[i64]) -> Vec<u32> {
    // normalise by the first nonzero entry, matching the library convention
    let m = Matrix::from_signed(f, &[v]);
    let lead = m.data().iter().copied().find(|&x| x != 0).unwrap();
    m.scale(f.inv(lead).unwrap()).data().to_vec()
}

#[test]
fn reference_p_matrix_common_vectors() {
    let f = fp(10007);
    let p = reference_p_matrix(f);
    let pm = check_p_matrix(&p, 4, 3).unwrap();
    let get = |s: &[usize]| pm.common.iter().find(|(k, _)| k == s).unwrap().1.clone();
    assert_eq!(get(&[0, 1]), unit_combo(f, &[1, 1, 0]));
    assert_eq!(get(&[0, 3]), unit_combo(f, &[1, 0, 0]));
    assert_eq!(get(&[2, 3]), unit_combo(f, &[0, 1, 1]));
    assert_eq!(common_vector(&p, 4, 3, &[0, 3]).unwrap(), vec![1, 0, 0]);
}

#[test]
fn reference_p_matrix_triple_ranks() {
    let f = fp(10007);
    let pm = check_p_matrix(&reference_p_matrix(f), 4, 3).unwrap();
    for triple in [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
        let rows: Vec<Vec<u32>> = (0..3)
            .map(|i| {
                let rest: Vec<usize> = triple.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, &j)| j).collect();
                pm.common.iter().find(|(k, _)| *k == rest).unwrap().1.clone()
            })
            .collect();
        assert_eq!(Matrix::from_row_vecs(f, 3, &rows).unwrap().rank(), 3, "{triple:?}");
    }
}

#[test]
fn common_vector_lies_in_each_block() {
    let f = fp(101);
    let pm = build_p_matrix(5, 3, f, 9, 64).unwrap();
    for (s, v) in &pm.common {
        assert!(v.iter().any(|&x| x != 0));
        for &j in s {
            let block = pm.matrix.row_range(j * 2, j * 2 + 2);
            assert!(block.spans(&Matrix::row_vector(f, v)), "{s:?}");
        }
    }
}

#[test]
fn equal_blocks_are_rejected() {
    let f = fp(10007);
    let mut p = reference_p_matrix(f);
    for c in 0..3 {
        let (a, b) = (p.get(0, c), p.get(1, c));
        p.set(2, c, a);
        p.set(3, c, b);
    }
    assert!(check_p_matrix(&p, 4, 3).is_err());
    assert!(matches!(common_vector(&p, 4, 3, &[0, 1]), Err(Error::NotUnique(_))));
}

#[test]
fn pmatrix_search_over_101() {
    let pm = build_p_matrix(4, 3, fp(101), 1, 64).unwrap();
    assert_eq!(pm.common.len(), 6);
    assert!(matches!(build_p_matrix(4, 3, fp(101), 1, 0), Err(Error::BadParams(_))));
}
