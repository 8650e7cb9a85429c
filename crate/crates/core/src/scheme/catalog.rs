use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;

use super::tables::{TableKind, TableSpec};
use super::{
    bad, Aligned, CombinerChoice, Construction, ErrorModel, Overrides, QueryForm, SchemeId, SchemeInstance, SchemeParams,
    DEFAULT_COMBINER_SEED, DEFAULT_SEARCH_TRIES,
};
use crate::capacity::{ratio, Rational};
use crate::combiner::{self, InterferenceStructure};
use crate::error::Result;
use crate::field::FieldPrime;
use crate::matrix::Matrix;
use crate::storage::{k_subsets, StorageCode};

const CODE_2422: [[i64; 2]; 4] = [[1, 0], [0, 1], [1, 1], [1, 2]];

fn sel(f: FieldPrime, cols: usize, idx: &[usize]) -> Matrix {
    let mut m = Matrix::zeros(f, idx.len(), cols);
    for (r, &c) in idx.iter().enumerate() {
        m.set(r, c, 1);
    }
    m
}

fn all_subsets(n: usize, t: usize) -> Vec<Vec<usize>> {
    k_subsets(n, t)
}

fn default_prime(id: SchemeId) -> u32 {
    match id {
        SchemeId::Ctrex2422 => 349,
        SchemeId::Tab2322 => 2,
        SchemeId::Tab2432 => 13,
        SchemeId::ClassT2 { n } if n >= 5 => 2_147_483_647,
        _ => 10007,
    }
}

struct AlignedDraft {
    k_c: usize,
    t: usize,
    code: StorageCode,
    aligned: Aligned,
    replicas: usize,
    collusion_sets: Vec<Vec<usize>>,
    error_model: ErrorModel,
    base_l: usize,
}

pub(super) fn build(id: SchemeId, o: &Overrides) -> Result<SchemeInstance> {
    let p = o.prime.unwrap_or_else(|| default_prime(id));
    let f = FieldPrime::new(p)?;
    match id {
        SchemeId::Tab2322 | SchemeId::Tab2432 => {
            let (kind, spec, n, t, l) = match id {
                SchemeId::Tab2322 => (TableKind::Binary3, TableSpec::binary3(), 3, 2, 6),
                _ => (TableKind::Ternary4, TableSpec::ternary4(), 4, 3, 4),
            };
            let code = TableSpec::code(kind, f)?;
            let params = SchemeParams { k: 2, n, t, k_c: 2, l, replicas: 1, field: f, collusion_sets: all_subsets(n, t) };
            let mut s = SchemeInstance {
                id,
                params,
                code,
                declared_rate: ratio(1, 1),
                error_model: ErrorModel::ZeroError,
                construction: Construction::Table(spec),
                combiner: None,
                pmatrix: None,
            };
            s.declared_rate = ratio(l as i64, s.download_total() as i64);
            Ok(s)
        }
        SchemeId::BaselineDownloadAll { k } => {
            if k == 0 {
                return Err(bad("K >= 1"));
            }
            let code = StorageCode::from_rows(f, &CODE_2422)?;
            let params = SchemeParams { k: k as usize, n: 4, t: 4, k_c: 2, l: 4, replicas: 1, field: f, collusion_sets: all_subsets(4, 2) };
            let mut s = SchemeInstance {
                id,
                params,
                code,
                declared_rate: ratio(1, 1),
                error_model: ErrorModel::ZeroError,
                construction: Construction::Baseline,
                combiner: None,
                pmatrix: None,
            };
            s.declared_rate = ratio(4, s.download_total() as i64);
            Ok(s)
        }
        _ => build_aligned(id, f, o),
    }
}

fn build_aligned(id: SchemeId, f: FieldPrime, o: &Overrides) -> Result<SchemeInstance> {
    let mut pmatrix = None;
    let d = match id {
        SchemeId::Ctrex2422 => ctrex(f)?,
        SchemeId::ClassT2 { n } => class_t2(f, n as usize)?,
        SchemeId::ClassTgen { n, t } => {
            let (d, pm) = class_tgen(f, n as usize, t as usize)?;
            pmatrix = Some(pm);
            d
        }
        SchemeId::Cyclic2422 => cyclic(f)?,
        SchemeId::Disjoint2423 => disjoint(f)?,
        SchemeId::Ex1Restricted => ex1(f)?,
        SchemeId::Ex2Restricted => ex2(f)?,
        _ => unreachable!("non-aligned ids handled by caller"),
    };
    let n = d.aligned.desired.len();
    let params = SchemeParams {
        k: 2,
        n,
        t: d.t,
        k_c: d.k_c,
        l: d.base_l * d.replicas,
        replicas: d.replicas,
        field: f,
        collusion_sets: d.collusion_sets,
    };
    let per_session = d.aligned.per_session_combiner;
    let mut s = SchemeInstance {
        id,
        params,
        code: d.code,
        declared_rate: ratio(1, 1),
        error_model: d.error_model,
        construction: Construction::Aligned(d.aligned),
        combiner: None,
        pmatrix,
    };
    s.declared_rate = Rational::new((s.params.l as i64).into(), (s.download_total() as i64).into());
    if !per_session {
        s.combiner = match o.combiner {
            CombinerChoice::Skip => None,
            CombinerChoice::Default if id == SchemeId::Ctrex2422 && f.p() == 349 => Some(combiner::ctrex_reference_combiner(f)),
            CombinerChoice::Default => Some(search(&s, DEFAULT_COMBINER_SEED, DEFAULT_SEARCH_TRIES)?),
            CombinerChoice::Search { seed, max_tries } => Some(search(&s, seed, max_tries)?),
        };
    }
    Ok(s)
}

fn search(s: &SchemeInstance, seed: u64, tries: usize) -> Result<combiner::CombinerSet> {
    let st = InterferenceStructure::for_scheme(s)?;
    combiner::search_combiner(&st, seed, tries)
}

/// Per server, canonical (unpermuted) undesired projection rows over the
/// message, with a fixed full-rank secret matrix. Used to certify combiners.
pub fn canonical_undesired_rows(s: &SchemeInstance) -> Result<Vec<Matrix>> {
    let a = s.aligned().ok_or_else(|| bad("not an aligned scheme"))?;
    let f = s.params.field;
    let b = a.share_len;
    let mut s_u = Matrix::zeros(f, a.u_rows, b);
    for i in 0..a.u_rows {
        if i < b {
            s_u.set(i, i, 1);
        } else {
            let x = (i - b + 2) as u32;
            for c in 0..b {
                s_u.set(i, c, f.pow(x, c as u64));
            }
        }
    }
    let mut out = Vec::with_capacity(s.params.n);
    for n in 0..s.params.n {
        let one = a.undesired[n].mul(&s_u)?;
        let q = Matrix::block_diag(f, &vec![one; s.params.replicas]);
        out.push(q.mul(&s.code.share_map(n, s.params.l)?)?);
    }
    Ok(out)
}

fn rows(f: FieldPrime, r: &[&[i64]]) -> Matrix {
    Matrix::from_signed(f, r)
}

fn ctrex(f: FieldPrime) -> Result<AlignedDraft> {
    let code = StorageCode::from_rows(f, &CODE_2422)?;
    let desired = [[0, 1, 2], [0, 3, 4], [1, 3, 5], [2, 4, 5]].iter().map(|i| sel(f, 6, i)).collect();
    let u = |i: usize| -> [i64; 6] {
        let mut v = [0; 6];
        match i {
            0..=5 => v[i] = 1,
            6 => (v[1], v[2]) = (1, 1),
            7 => (v[1], v[2]) = (1, 2),
            8 => (v[3], v[4]) = (1, 1),
            9 => (v[3], v[4]) = (1, 2),
            _ => unreachable!(),
        }
        v
    };
    let sets: [[usize; 3]; 4] = [[0, 6, 8], [0, 7, 9], [0, 1, 3], [0, 2, 4]];
    let undesired = sets.iter().map(|s| rows(f, &[&u(s[0]), &u(s[1]), &u(s[2])])).collect();
    Ok(AlignedDraft {
        k_c: 2,
        t: 2,
        code,
        aligned: Aligned {
            share_len: 6,
            v_rows: 6,
            u_rows: 6,
            desired,
            undesired,
            form: QueryForm::Ordered,
            direct: vec![2; 4],
            interference_dim: 8,
            basis: vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![1, 2]],
            per_session_combiner: false,
        },
        replicas: 1,
        collusion_sets: all_subsets(4, 2),
        error_model: ErrorModel::ZeroError,
        base_l: 12,
    })
}

fn class_t2(f: FieldPrime, n: usize) -> Result<AlignedDraft> {
    if n < 3 {
        return Err(bad(format!("class-t2 needs N >= 3 (N={n})")));
    }
    if (f.p() as usize) < n - 1 {
        return Err(bad(format!("class-t2({n}) needs p >= {}", n - 1)));
    }
    let code = StorageCode::parity(f, n - 1);
    let desired = (0..n).map(|i| sel(f, n, &(0..n).filter(|&j| j != i).collect::<Vec<_>>())).collect();
    let undesired = (0..n)
        .map(|i| {
            let mut m = sel(f, n, &(0..n - 2).collect::<Vec<_>>());
            let mut tilde = Matrix::zeros(f, 1, n);
            if i < n - 1 {
                tilde.set(0, n - 2, 1);
                tilde.set(0, n - 1, i as u32);
            } else {
                tilde.set(0, n - 1, 1);
            }
            m = Matrix::vstack(f, n, &[&m, &tilde]).expect("same width");
            m
        })
        .collect();
    let direct = (0..n).map(|i| if i < 2 { n - 1 } else { n - 2 }).collect();
    let basis = (0..n)
        .map(|i| if i < 2 { (0..n - 1).collect() } else { (0..n - 1).filter(|&r| r != n - 1 - i).collect() })
        .collect();
    Ok(AlignedDraft {
        k_c: n - 1,
        t: 2,
        code,
        aligned: Aligned {
            share_len: n,
            v_rows: n,
            u_rows: n,
            desired,
            undesired,
            form: QueryForm::Ordered,
            direct,
            interference_dim: n * n - 2 * n + 2,
            basis,
            per_session_combiner: false,
        },
        replicas: 1,
        collusion_sets: all_subsets(n, 2),
        error_model: ErrorModel::ZeroError,
        base_l: n * (n - 1),
    })
}

fn class_tgen(f: FieldPrime, n: usize, t: usize) -> Result<(AlignedDraft, combiner::PMatrix)> {
    if t < 2 || t >= n {
        return Err(bad(format!("class-tgen needs 2 <= T < N (N={n}, T={t})")));
    }
    let pm = if (n, t) == (4, 3) {
        combiner::check_p_matrix(&combiner::reference_p_matrix(f), n, t)
            .or_else(|_| combiner::build_p_matrix(n, t, f, DEFAULT_COMBINER_SEED, DEFAULT_SEARCH_TRIES))?
    } else {
        combiner::build_p_matrix(n, t, f, DEFAULT_COMBINER_SEED, DEFAULT_SEARCH_TRIES)?
    };
    let code = StorageCode::parity(f, n - 1);
    let l = n * (n - 1);
    let i_dim = n * n - 2 * n + t;
    let replicas = n / n.gcd(&(l + i_dim));
    let desired = (0..n).map(|i| sel(f, n, &(0..n).filter(|&j| j != i).collect::<Vec<_>>())).collect();
    let undesired = (0..n)
        .map(|i| {
            let mut m = Matrix::zeros(f, n - 1, n);
            for r in 0..n - t {
                m.set(r, r, 1);
            }
            for r in 0..t - 1 {
                for c in 0..t {
                    m.set(n - t + r, n - t + c, pm.matrix.get(i * (t - 1) + r, c));
                }
            }
            m
        })
        .collect();
    let direct = vec![i_dim * replicas / n; n];
    Ok((
        AlignedDraft {
            k_c: n - 1,
            t,
            code,
            aligned: Aligned {
                share_len: n,
                v_rows: n,
                u_rows: n,
                desired,
                undesired,
                form: QueryForm::Space,
                direct,
                interference_dim: i_dim,
                basis: Vec::new(),
                per_session_combiner: true,
            },
            replicas,
            collusion_sets: all_subsets(n, t),
            error_model: ErrorModel::EpsilonError,
            base_l: l,
        },
        pm,
    ))
}

fn cyclic(f: FieldPrime) -> Result<AlignedDraft> {
    let code = StorageCode::from_rows(f, &CODE_2422)?;
    let desired = [[0, 1], [1, 2], [2, 3], [3, 0]].iter().map(|i| sel(f, 4, i)).collect();
    let undesired = vec![
        rows(f, &[&[1, 0, 0, 0], &[0, 1, 1, 0]]),
        rows(f, &[&[1, 0, 0, 0], &[0, 1, 2, 0]]),
        rows(f, &[&[1, 0, 0, 0], &[0, 1, 0, 0]]),
        rows(f, &[&[1, 0, 0, 0], &[0, 0, 1, 0]]),
    ];
    Ok(AlignedDraft {
        k_c: 2,
        t: 2,
        code,
        aligned: Aligned {
            share_len: 4,
            v_rows: 4,
            u_rows: 4,
            desired,
            undesired,
            form: QueryForm::Ordered,
            direct: vec![2, 1, 1, 1],
            interference_dim: 5,
            basis: vec![vec![0, 1], vec![0], vec![1], vec![1]],
            per_session_combiner: false,
        },
        replicas: 1,
        collusion_sets: vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]],
        error_model: ErrorModel::ZeroError,
        base_l: 8,
    })
}

fn disjoint(f: FieldPrime) -> Result<AlignedDraft> {
    let code = StorageCode::parity(f, 3);
    let desired = [[0, 2, 4], [0, 2, 4], [1, 3, 5], [1, 3, 5]].iter().map(|i| sel(f, 6, i)).collect();
    let undesired = (0..4).map(|_| sel(f, 6, &[0, 1, 2])).collect();
    Ok(AlignedDraft {
        k_c: 3,
        t: 2,
        code,
        aligned: Aligned {
            share_len: 4,
            v_rows: 6,
            u_rows: 6,
            desired,
            undesired,
            form: QueryForm::Ordered,
            direct: vec![3, 2, 2, 2],
            interference_dim: 9,
            basis: vec![vec![0, 1, 2], vec![1, 2], vec![0, 2], vec![0, 1]],
            per_session_combiner: false,
        },
        replicas: 1,
        collusion_sets: vec![vec![0, 1], vec![2, 3]],
        error_model: ErrorModel::ZeroError,
        base_l: 12,
    })
}

fn ex1(f: FieldPrime) -> Result<AlignedDraft> {
    let code = StorageCode::from_rows(f, &CODE_2422)?;
    let desired = [[0], [0], [1], [1]].iter().map(|i| sel(f, 2, i)).collect();
    let undesired = (0..4).map(|_| sel(f, 2, &[0])).collect();
    Ok(AlignedDraft {
        k_c: 2,
        t: 2,
        code,
        aligned: Aligned {
            share_len: 2,
            v_rows: 2,
            u_rows: 2,
            desired,
            undesired,
            form: QueryForm::Ordered,
            direct: vec![1, 1, 0, 0],
            interference_dim: 2,
            basis: vec![vec![0], vec![0], vec![], vec![]],
            per_session_combiner: false,
        },
        replicas: 1,
        collusion_sets: vec![vec![0, 1], vec![2, 3]],
        error_model: ErrorModel::ZeroError,
        base_l: 4,
    })
}

fn ex2(f: FieldPrime) -> Result<AlignedDraft> {
    let code = StorageCode::from_rows(f, &[[1, 0], [0, 1], [1, 1]])?;
    let desired = vec![sel(f, 2, &[0]), sel(f, 2, &[0, 1]), sel(f, 2, &[1])];
    let undesired = vec![sel(f, 2, &[0]), sel(f, 2, &[0, 1]), sel(f, 2, &[0])];
    Ok(AlignedDraft {
        k_c: 2,
        t: 2,
        code,
        aligned: Aligned {
            share_len: 2,
            v_rows: 2,
            u_rows: 2,
            desired,
            undesired,
            form: QueryForm::Ordered,
            direct: vec![1, 2, 0],
            interference_dim: 3,
            basis: vec![vec![0], vec![0, 1], vec![]],
            per_session_combiner: false,
        },
        replicas: 1,
        collusion_sets: vec![vec![0, 1], vec![1, 2]],
        error_model: ErrorModel::ZeroError,
        base_l: 4,
    })
}

