use alloc::vec;
use alloc::vec::Vec;

use super::query::{Payload, QueryPlan, TableOp};
use super::{shape, Construction, SchemeInstance};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::storage::ShareSet;

/// Answers of every server, plus a slot for server-side randomness (unused by
/// the registered schemes).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerSet {
    pub answers: Vec<Vec<u32>>,
    pub server_randomness: Option<Vec<u32>>,
}

/// Computes server `server`'s answer from its payload and its own shares
/// (`shares[message]`).
pub fn server_answer(scheme: &SchemeInstance, server: usize, payload: &Payload, shares: &[Vec<u32>]) -> Result<Vec<u32>> {
    let p = &scheme.params;
    let f = p.field;
    if shares.len() != p.k {
        return Err(shape("messages", shares.len(), p.k));
    }
    match payload {
        Payload::Linear { parts, combiner, .. } => {
            if parts.len() != p.k {
                return Err(shape("query parts", parts.len(), p.k));
            }
            let mut projections = Vec::with_capacity(p.k);
            for (k, reps) in parts.iter().enumerate() {
                let chunk = reps.first().map_or(0, |m| m.cols());
                if chunk * reps.len() != shares[k].len() {
                    return Err(shape("share length", shares[k].len(), chunk * reps.len()));
                }
                let mut proj = Vec::new();
                for (r, q) in reps.iter().enumerate() {
                    proj.extend(q.apply(&shares[k][r * chunk..(r + 1) * chunk])?);
                }
                projections.push(proj);
            }
            let m = projections[0].len();
            if projections.iter().any(|x| x.len() != m) {
                return Err(Error::ShapeMismatch("per-message query sizes differ".into()));
            }
            let (c, direct) = match &scheme.construction {
                Construction::Aligned(a) => {
                    let c = match (combiner, &scheme.combiner) {
                        (Some(c), _) => c.clone(),
                        (None, Some(set)) => set.matrices[server].clone(),
                        (None, None) => return Err(Error::BadParams("scheme has no combiner".into())),
                    };
                    (c, a.direct[server])
                }
                _ => (Matrix::identity(f, m), m),
            };
            if c.rows() != m || c.cols() != m {
                return Err(shape("combiner size", c.rows(), m));
            }
            let mixed: Vec<Vec<u32>> = projections.iter().map(|x| c.apply(x)).collect::<Result<_>>()?;
            let mut out = Vec::with_capacity(p.k * direct + m - direct);
            for x in &mixed {
                out.extend_from_slice(&x[..direct]);
            }
            for i in direct..m {
                out.push(mixed.iter().fold(0, |acc, x| f.add(acc, x[i])));
            }
            Ok(out)
        }
        Payload::Table(q) => {
            let pick = |share: &[u32], i: usize| -> Result<u32> {
                if i < share.len() {
                    Ok(share[i])
                } else if i == share.len() {
                    Ok(share.iter().fold(0, |acc, &v| f.add(acc, v)))
                } else {
                    Err(shape("table index", i, share.len()))
                }
            };
            let xs: Vec<u32> = q.x.iter().map(|&i| pick(&shares[0], i)).collect::<Result<_>>()?;
            let ys: Vec<u32> = q.y.iter().map(|&i| pick(&shares[1], i)).collect::<Result<_>>()?;
            match q.op {
                TableOp::Direct => Ok(xs.into_iter().chain(ys).collect()),
                TableOp::MixL3 => {
                    if xs.len() != 2 || ys.len() != 2 {
                        return Err(Error::ShapeMismatch("L3 takes two symbols per message".into()));
                    }
                    Ok(vec![f.add(xs[0], ys[1]), f.add(xs[1], ys[1]), f.add(ys[0], ys[1])])
                }
                TableOp::Sum => {
                    if xs.len() != 1 || ys.len() != 1 {
                        return Err(Error::ShapeMismatch("sum takes one symbol per message".into()));
                    }
                    Ok(vec![f.add(xs[0], ys[0])])
                }
            }
        }
    }
}

/// Runs every server on its own shares.
pub fn answer_all(scheme: &SchemeInstance, plan: &QueryPlan, stored: &[ShareSet]) -> Result<AnswerSet> {
    let mut answers = Vec::with_capacity(plan.queries.len());
    for (n, q) in plan.queries.iter().enumerate() {
        let own: Vec<Vec<u32>> = stored.iter().map(|s| s.shares[n].clone()).collect();
        answers.push(server_answer(scheme, n, q, &own)?);
    }
    Ok(AnswerSet { answers, server_randomness: None })
}

/// Coefficients of every downloaded symbol over the concatenated messages
/// `(W_1, ..., W_K)`, obtained by probing the (linear) server maps.
pub fn download_map(scheme: &SchemeInstance, plan: &QueryPlan) -> Result<Matrix> {
    let p = &scheme.params;
    let f = p.field;
    let l = p.l;
    let b = l / p.k_c;
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for (n, q) in plan.queries.iter().enumerate() {
        let g = scheme.code.share_map(n, l)?;
        let d = {
            let zero: Vec<Vec<u32>> = vec![vec![0; b]; p.k];
            server_answer(scheme, n, q, &zero)?.len()
        };
        // answer coefficient over concatenated shares
        let mut coeff = Matrix::zeros(f, d, p.k * b);
        for k in 0..p.k {
            for j in 0..b {
                let mut sh: Vec<Vec<u32>> = vec![vec![0; b]; p.k];
                sh[k][j] = 1;
                let a = server_answer(scheme, n, q, &sh)?;
                for (i, v) in a.into_iter().enumerate() {
                    coeff.set(i, k * b + j, v);
                }
            }
        }
        let lift = Matrix::block_diag(f, &vec![g; p.k]);
        let full = coeff.mul(&lift)?;
        rows.extend(full.to_rows());
    }
    Matrix::from_row_vecs(f, p.k * l, &rows)
}
