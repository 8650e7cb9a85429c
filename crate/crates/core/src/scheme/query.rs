use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{bad, Construction, SchemeInstance};
use crate::error::Result;
use crate::matrix::{sample_full_rank_rect, sample_uniform, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QueryForm {
    /// Query vectors in a uniformly random order.
    Ordered,
    /// Query spaces as RREF generators.
    Space,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TableOp {
    /// Return the selected symbols of each message.
    Direct,
    /// `(X1 + Y2, X2 + Y2, Y1 + Y2)` on two selected symbols per message.
    MixL3,
    /// One selected symbol of each message, summed.
    Sum,
}

/// A table entry as seen by one server. Index `share_len` names the sum of the share.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TableQuery {
    pub op: TableOp,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

impl TableQuery {
    pub fn download_len(&self) -> usize {
        match self.op {
            TableOp::Direct => self.x.len() + self.y.len(),
            TableOp::MixL3 => 3,
            TableOp::Sum => 1,
        }
    }
}

/// What one server receives.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Payload {
    Linear {
        form: QueryForm,
        /// `parts[message][replica]`: query rows applied to that replica's share chunk.
        parts: Vec<Vec<Matrix>>,
        /// Combining matrix drawn for this session, if the scheme draws one.
        combiner: Option<Matrix>,
    },
    Table(TableQuery),
}

impl Payload {
    /// Field symbols uploaded (table entries count their selected indices).
    pub fn upload_symbols(&self) -> usize {
        match self {
            Payload::Linear { parts, combiner, .. } => {
                parts.iter().flatten().map(|m| m.rows() * m.cols()).sum::<usize>()
                    + combiner.as_ref().map_or(0, |c| c.rows() * c.cols())
            }
            Payload::Table(t) => t.x.len() + t.y.len(),
        }
    }
}

/// User-side state kept private.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Secret {
    Aligned {
        /// Per replica: desired-side and undesired-side secret matrices.
        desired_secret: Vec<Matrix>,
        undesired_secret: Vec<Matrix>,
        /// `orders[replica][server][message]`: canonical row sent in each position.
        orders: Vec<Vec<Vec<Vec<usize>>>>,
    },
    Table { index: usize },
    Baseline,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryPlan {
    /// 0-based desired message.
    pub theta: usize,
    pub queries: Vec<Payload>,
    pub secret: Secret,
}

/// Draws one session's queries for desired message `theta` (0-based).
pub fn gen_queries<R: Rng + ?Sized>(scheme: &SchemeInstance, theta: usize, rng: &mut R) -> Result<QueryPlan> {
    if theta >= scheme.params.k {
        return Err(bad(alloc::format!("theta {} out of range for K={}", theta + 1, scheme.params.k)));
    }
    match &scheme.construction {
        Construction::Aligned(_) => gen_aligned(scheme, theta, rng),
        Construction::Table(t) => {
            let index = rng.gen_range(0..t.len());
            gen_queries_with_index(scheme, theta, index)
        }
        Construction::Baseline => {
            let p = &scheme.params;
            let b = p.l / p.k_c;
            let f = p.field;
            let queries = (0..p.n)
                .map(|n| {
                    let q = if n < p.k_c { Matrix::identity(f, b) } else { Matrix::zeros(f, 0, b) };
                    Payload::Linear { form: QueryForm::Ordered, parts: (0..p.k).map(|_| alloc::vec![q.clone()]).collect(), combiner: None }
                })
                .collect();
            Ok(QueryPlan { theta, queries, secret: Secret::Baseline })
        }
    }
}

/// Table schemes: the plan for a fixed table row.
pub fn gen_queries_with_index(scheme: &SchemeInstance, theta: usize, index: usize) -> Result<QueryPlan> {
    let t = scheme.table().ok_or(crate::error::Error::NotEnumerable)?;
    if theta >= 2 || index >= t.len() {
        return Err(bad("table index or theta out of range"));
    }
    let queries = t.entries[index][theta].iter().cloned().map(Payload::Table).collect();
    Ok(QueryPlan { theta, queries, secret: Secret::Table { index } })
}

fn gen_aligned<R: Rng + ?Sized>(scheme: &SchemeInstance, theta: usize, rng: &mut R) -> Result<QueryPlan> {
    let a = scheme.aligned().expect("aligned");
    let p = &scheme.params;
    let f = p.field;
    let reps = p.replicas;
    let mut desired_secret = Vec::with_capacity(reps);
    let mut undesired_secret = Vec::with_capacity(reps);
    let mut orders = Vec::with_capacity(reps);
    // parts[server][message][replica]
    let mut parts: Vec<Vec<Vec<Matrix>>> = (0..p.n).map(|_| (0..p.k).map(|_| Vec::new()).collect()).collect();
    for _ in 0..reps {
        let s = sample_full_rank_rect(f, a.v_rows, a.share_len, rng);
        let s_u = sample_full_rank_rect(f, a.u_rows, a.share_len, rng);
        let mut rep_orders = Vec::with_capacity(p.n);
        for n in 0..p.n {
            let mut server_orders = Vec::with_capacity(p.k);
            for k in 0..p.k {
                let canonical = if k == theta { a.desired[n].mul(&s)? } else { a.undesired[n].mul(&s_u)? };
                let sent = match a.form {
                    QueryForm::Ordered => {
                        let mut order: Vec<usize> = (0..canonical.rows()).collect();
                        order.shuffle(rng);
                        let m = canonical.select_rows(&order);
                        server_orders.push(order);
                        m
                    }
                    QueryForm::Space => {
                        let basis = canonical.row_basis();
                        if basis.rows() != canonical.rows() {
                            return Err(bad("query vectors are dependent"));
                        }
                        server_orders.push(Vec::new());
                        basis
                    }
                };
                parts[n][k].push(sent);
            }
            rep_orders.push(server_orders);
        }
        desired_secret.push(s);
        undesired_secret.push(s_u);
        orders.push(rep_orders);
    }
    let queries = parts
        .into_iter()
        .enumerate()
        .map(|(n, parts)| {
            let combiner = if a.per_session_combiner {
                let m = a.desired[n].rows() * reps;
                Some(sample_uniform(f, m, m, rng))
            } else {
                None
            };
            Payload::Linear { form: a.form, parts, combiner }
        })
        .collect();
    Ok(QueryPlan { theta, queries, secret: Secret::Aligned { desired_secret, undesired_secret, orders } })
}
