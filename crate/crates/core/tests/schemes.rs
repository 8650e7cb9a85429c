// Scheme registry, query/answer/decode behaviour and session plumbing.

use pirlab_core::capacity::ratio;
use pirlab_core::scheme::*;
use pirlab_core::seed::rng_from_seed;
use pirlab_core::session::{adversary_view, random_messages, run_seeded, run_session};
use pirlab_core::storage::ShareSet;
use pirlab_core::{Error, Matrix};
use rand::Rng;

fn build(id: SchemeId) -> SchemeInstance {
    registry_build(id, &Overrides::default()).unwrap()
}

fn encode_all(s: &SchemeInstance, msgs: &[Vec<u32>]) -> Vec<ShareSet> {
    msgs.iter().map(|m| s.code.encode(m).unwrap()).collect()
}

// --- registry ----------------------------------------------------------------

#[test]
fn registry_parameters() {
    let c = build(SchemeId::Ctrex2422);
    let p = &c.params;
    assert_eq!((p.k, p.n, p.t, p.k_c, p.field.p(), p.l), (2, 4, 2, 2, 349, 12));
    assert_eq!(c.declared_rate, ratio(3, 5));
    assert_eq!(c.error_model, ErrorModel::ZeroError);

    let t2 = build(SchemeId::ClassT2 { n: 4 });
    assert_eq!((t2.params.k, t2.params.n, t2.params.t, t2.params.k_c, t2.params.l), (2, 4, 2, 3, 12));
    assert_eq!(t2.declared_rate, ratio(6, 11));

    let tg = build(SchemeId::ClassTgen { n: 4, t: 3 });
    assert_eq!(tg.declared_rate, ratio(12, 23));
    assert_eq!(tg.error_model, ErrorModel::EpsilonError);

    assert_eq!(build(SchemeId::BaselineDownloadAll { k: 2 }).declared_rate, ratio(1, 2));
}

#[test]
fn declared_rates_are_l_over_download() {
    let expect = [
        (SchemeId::Ctrex2422, (12, 20)),
        (SchemeId::ClassT2 { n: 4 }, (12, 22)),
        (SchemeId::Tab2322, (6, 11)),
        (SchemeId::Tab2432, (4, 7)),
        (SchemeId::Cyclic2422, (8, 13)),
        (SchemeId::Disjoint2423, (4, 7)),
        (SchemeId::Ex1Restricted, (4, 6)),
        (SchemeId::Ex2Restricted, (4, 7)),
    ];
    for (id, (l, d)) in expect {
        let s = registry_build(id, &Overrides::queries_only(None)).unwrap();
        assert_eq!(s.declared_rate, ratio(l, d), "{id}");
        assert_eq!(declared_rate(&s), ratio(s.params.l as i64, s.download_total() as i64), "{id}");
    }
}

#[test]
fn collusion_sets_respect_t() {
    for id in SchemeId::all_defaults() {
        let s = registry_build(id, &Overrides::queries_only(None)).unwrap();
        assert!(!s.params.collusion_sets.is_empty());
        assert!(s.params.collusion_sets.iter().all(|c| c.len() <= s.params.t), "{id}");
        assert_eq!(s.params.l % s.code.granularity(), 0, "{id}");
    }
}

#[test]
fn ids_round_trip_and_reject_junk() {
    for id in SchemeId::all_defaults() {
        assert_eq!(SchemeId::parse(&id.to_string()).unwrap(), id);
    }
    assert!(matches!(SchemeId::parse("ctrex"), Err(Error::UnknownScheme(_))));
    assert!(matches!(SchemeId::parse("class-t2(x)"), Err(Error::UnknownScheme(_))));
    assert!(registry_build(SchemeId::Ctrex2422, &Overrides::with_prime(350)).is_err());
}

// --- queries -----------------------------------------------------------------

#[test]
fn ctrex_server3_query_rows() {
    let s = build(SchemeId::Ctrex2422);
    let mut seen = std::collections::BTreeSet::new();
    for seed in 0..200 {
        let plan = gen_queries(&s, 1, &mut rng_from_seed(seed)).unwrap();
        let Secret::Aligned { desired_secret, undesired_secret, orders } = &plan.secret else { panic!() };
        let Payload::Linear { parts, .. } = &plan.queries[2] else { panic!() };
        let des = &parts[1][0];
        let und = &parts[0][0];
        assert_eq!((des.rows(), des.cols()), (3, 6));
        // desired rows are a reordering of rows 2, 4, 6 of the secret
        let mut rows: Vec<Vec<u32>> = des.to_rows();
        let mut want: Vec<Vec<u32>> = [1, 3, 5].iter().map(|&i| desired_secret[0].row(i).to_vec()).collect();
        rows.sort();
        want.sort();
        assert_eq!(rows, want);
        // undesired rows: canonical {U0, U1, U3} (unit rows of S') in the recorded order
        let u_can = Matrix::vstack(s.params.field, 6, &[&undesired_secret[0].select_rows(&[0, 1, 3])]).unwrap();
        assert_eq!(*und, u_can.select_rows(&orders[0][2][0]));
        seen.insert(orders[0][2][1].clone());
    }
    assert_eq!(seen.len(), 6, "every ordering of the desired rows should occur");
}

#[test]
fn binary_table_row_8() {
    let s = build(SchemeId::Tab2322);
    let plan = gen_queries_with_index(&s, 0, 7).unwrap();
    let q: Vec<&TableQuery> = plan.queries.iter().map(|p| match p {
        Payload::Table(t) => t,
        _ => panic!(),
    }).collect();
    // 0-based share positions: a1,a3 / b1,b3 ; a4,a6 / b4,b5 ; L3(alpha3, alpha4, beta3, beta4)
    assert_eq!((q[0].op, q[0].x.clone(), q[0].y.clone()), (TableOp::Direct, vec![0, 2], vec![0, 2]));
    assert_eq!((q[1].op, q[1].x.clone(), q[1].y.clone()), (TableOp::Direct, vec![0, 2], vec![0, 1]));
    assert_eq!((q[2].op, q[2].x.clone(), q[2].y.clone()), (TableOp::MixL3, vec![2, 3], vec![2, 3]));
}

#[test]
fn equal_seeds_equal_plans() {
    for id in SchemeId::all_defaults() {
        let s = build(id);
        let a = gen_queries(&s, 0, &mut rng_from_seed(99)).unwrap();
        let b = gen_queries(&s, 0, &mut rng_from_seed(99)).unwrap();
        assert_eq!(a, b, "{id}");
    }
}

// --- answers -----------------------------------------------------------------

#[test]
fn binary_table_mix_answer() {
    let s = build(SchemeId::Tab2322);
    let p = s.params.field.p();
    let mut rng = rng_from_seed(4);
    for _ in 0..50 {
        let msgs = random_messages(&s, &mut rng);
        let st = encode_all(&s, &msgs);
        let plan = gen_queries_with_index(&s, 0, 0).unwrap();
        let alpha = &st[0].shares[2];
        let beta = &st[1].shares[2];
        let a4 = alpha.iter().sum::<u32>() % p;
        let ans = server_answer(&s, 2, &plan.queries[2], &[alpha.clone(), beta.clone()]).unwrap();
        assert_eq!(ans, vec![(alpha[2] + beta[1]) % p, (a4 + beta[1]) % p, (beta[0] + beta[1]) % p]);
    }
}

#[test]
fn ctrex_answer_mixes_only_last_symbol() {
    let s = build(SchemeId::Ctrex2422);
    let plan = gen_queries(&s, 0, &mut rng_from_seed(1)).unwrap();
    let msgs = random_messages(&s, &mut rng_from_seed(2));
    let st = encode_all(&s, &msgs);
    for n in 0..4 {
        let own = |k: usize, zero: bool| if zero { vec![0; 6] } else { st[k].shares[n].clone() };
        let both = server_answer(&s, n, &plan.queries[n], &[own(0, false), own(1, false)]).unwrap();
        let only1 = server_answer(&s, n, &plan.queries[n], &[own(0, false), own(1, true)]).unwrap();
        let only2 = server_answer(&s, n, &plan.queries[n], &[own(0, true), own(1, false)]).unwrap();
        assert_eq!(both.len(), 5);
        // positions 0,1 carry message 1 only, 2,3 message 2 only, 4 both
        assert_eq!(&both[..2], &only1[..2]);
        assert!(only2[..2].iter().all(|&x| x == 0));
        assert_eq!(&both[2..4], &only2[2..4]);
        assert!(only1[2..4].iter().all(|&x| x == 0));
        assert_eq!(both[4], (only1[4] + only2[4]) % 349);
    }
}

#[test]
fn zero_shares_zero_answers() {
    for id in SchemeId::all_defaults() {
        let s = build(id);
        let plan = gen_queries(&s, 0, &mut rng_from_seed(5)).unwrap();
        let b = s.params.l / s.params.k_c;
        for (n, q) in plan.queries.iter().enumerate() {
            let ans = server_answer(&s, n, q, &vec![vec![0; b]; s.params.k]).unwrap();
            assert!(ans.iter().all(|&x| x == 0), "{id} server {n}");
        }
    }
}

#[test]
fn answers_depend_only_on_own_shares() {
    for id in SchemeId::all_defaults() {
        let s = build(id);
        let mut rng = rng_from_seed(6);
        let plan = gen_queries(&s, 1 % s.params.k, &mut rng).unwrap();
        let msgs = random_messages(&s, &mut rng);
        let st = encode_all(&s, &msgs);
        let honest = answer_all(&s, &plan, &st).unwrap();
        for n in 0..s.params.n {
            let mut garbled = st.clone();
            for set in garbled.iter_mut() {
                for (m, share) in set.shares.iter_mut().enumerate() {
                    if m != n {
                        share.iter_mut().for_each(|x| *x = rng.gen_range(0..s.params.field.p()));
                    }
                }
            }
            assert_eq!(answer_all(&s, &plan, &garbled).unwrap().answers[n], honest.answers[n], "{id} server {n}");
        }
    }
}

// --- decode ------------------------------------------------------------------

#[test]
fn ternary_table_case_131() {
    let s = build(SchemeId::Tab2432);
    // row 0 has (i1, i2, i3) = (1, 3, 1)
    let plan = gen_queries_with_index(&s, 0, 0).unwrap();
    let Payload::Table(q4) = &plan.queries[3] else { panic!() };
    assert_eq!(q4.x, vec![1], "i4 = 4");
    let mut rng = rng_from_seed(7);
    for _ in 0..50 {
        let msgs = random_messages(&s, &mut rng);
        let ans = answer_all(&s, &plan, &encode_all(&s, &msgs)).unwrap();
        assert_eq!(decode(&s, &plan, &ans).unwrap(), msgs[0]);
    }
}

#[test]
fn ctrex_decodes_exactly() {
    let s = build(SchemeId::Ctrex2422);
    for seed in 0..100u64 {
        let (msgs, t) = run_seeded(&s, (seed % 2) as usize, seed).unwrap();
        assert_eq!(t.decoded.as_ref().unwrap(), &msgs[t.theta]);
        assert_eq!(t.counts.download, 20);
    }
}

#[test]
fn zero_messages_decode_to_zero() {
    for id in SchemeId::all_defaults() {
        if id == SchemeId::Disjoint2423 {
            continue; // undecodable by construction
        }
        let s = build(id);
        let zeros = vec![vec![0; s.params.l]; s.params.k];
        let t = run_session(&s, &zeros, 0, &mut rng_from_seed(8)).unwrap();
        assert_eq!(t.decoded.unwrap(), vec![0; s.params.l], "{id}");
    }
}

#[test]
fn disjoint_scheme_is_undecodable() {
    let s = build(SchemeId::Disjoint2423);
    let (_, t) = run_seeded(&s, 0, 1).unwrap();
    assert!(matches!(t.decoded, Err(Error::DecodeFailure(_))));
}

// --- sessions ----------------------------------------------------------------

#[test]
fn session_download_counts() {
    let cases = [(SchemeId::Ctrex2422, 20, vec![5, 5, 5, 5]), (SchemeId::Tab2432, 7, vec![2, 2, 2, 1]), (SchemeId::Ex1Restricted, 6, vec![])];
    for (id, total, per) in cases {
        let s = build(id);
        let (_, t) = run_seeded(&s, 0, 3).unwrap();
        assert_eq!(t.counts.download, total, "{id}");
        assert_eq!(t.counts.download, t.answers.iter().map(Vec::len).sum::<usize>());
        if !per.is_empty() {
            assert_eq!(t.counts.download_per_server, per);
        }
    }
    let e1 = build(SchemeId::Ex1Restricted);
    assert_eq!(ratio(e1.params.l as i64, 6), ratio(2, 3));
}

#[test]
fn rate_realized_every_session() {
    for id in SchemeId::all_defaults() {
        let s = build(id);
        for seed in 0..10 {
            let (_, t) = run_seeded(&s, (seed % 2) as usize, seed).unwrap();
            assert_eq!(ratio(s.params.l as i64, t.counts.download as i64), s.declared_rate, "{id}");
        }
    }
}

#[test]
fn adversary_views() {
    let s = build(SchemeId::Ctrex2422);
    let (_, t) = run_seeded(&s, 0, 4).unwrap();
    let v = adversary_view(&t, &[0, 2]).unwrap();
    assert_eq!(v.servers, vec![0, 2]);
    for q in &v.queries {
        let Payload::Linear { parts, .. } = q else { panic!() };
        assert_eq!(parts.len(), 2);
        for m in parts {
            assert_eq!((m[0].rows(), m[0].cols()), (3, 6));
        }
    }
    assert_eq!(v.shares[1][0], t.stored[0].shares[2]);
    let all = adversary_view(&t, &[0, 1, 2, 3]).unwrap();
    assert_eq!(all.answers.iter().map(Vec::len).sum::<usize>(), t.counts.download);
    let none = adversary_view(&t, &[]).unwrap();
    assert!(none.queries.is_empty() && none.answers.is_empty() && none.shares.is_empty());
    assert!(adversary_view(&t, &[4]).is_err());
}

#[test]
fn replay_is_deterministic() {
    for id in SchemeId::all_defaults() {
        let s = build(id);
        let a = run_seeded(&s, 0, 123).unwrap();
        let b = run_seeded(&s, 0, 123).unwrap();
        assert_eq!(a, b, "{id}");
    }
}

#[test]
fn bad_inputs_are_rejected() {
    let s = build(SchemeId::Ctrex2422);
    let mut rng = rng_from_seed(0);
    assert!(matches!(run_session(&s, &[vec![0; 12]], 0, &mut rng), Err(Error::ShapeMismatch(_))));
    assert!(matches!(run_session(&s, &[vec![0; 12], vec![0; 10]], 0, &mut rng), Err(Error::ShapeMismatch(_))));
    assert!(matches!(run_session(&s, &[vec![0; 12], vec![400; 12]], 0, &mut rng), Err(Error::ShapeMismatch(_))));
    assert!(gen_queries(&s, 2, &mut rng).is_err());
}
