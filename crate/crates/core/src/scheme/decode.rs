use alloc::format;
use alloc::vec::Vec;

use super::answer::{download_map, AnswerSet};
use super::query::{Payload, QueryPlan};
use super::{Construction, SchemeInstance};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

fn fail(msg: impl Into<alloc::string::String>) -> Error {
    Error::DecodeFailure(msg.into())
}

/// Recovers the desired message from the downloaded answers.
pub fn decode(scheme: &SchemeInstance, plan: &QueryPlan, answers: &AnswerSet) -> Result<Vec<u32>> {
    match &scheme.construction {
        Construction::Aligned(_) if scheme.params.k == 2 => decode_aligned(scheme, plan, answers),
        _ => decode_generic(scheme, plan, answers),
    }
}

/// Pure linear-algebra decoder: row-reduces the download map with the
/// desired message's columns last.
pub fn decode_generic(scheme: &SchemeInstance, plan: &QueryPlan, answers: &AnswerSet) -> Result<Vec<u32>> {
    let p = &scheme.params;
    let f = p.field;
    let l = p.l;
    let map = download_map(scheme, plan)?;
    let values: Vec<u32> = answers.answers.iter().flatten().copied().collect();
    if values.len() != map.rows() {
        return Err(Error::ShapeMismatch(format!("{} answer symbols, expected {}", values.len(), map.rows())));
    }
    let theta = plan.theta;
    let mut order: Vec<usize> = (0..p.k * l).filter(|c| c / l != theta).collect();
    order.extend(theta * l..(theta + 1) * l);
    let aug = map.select_cols(&order).hstack(&Matrix::column_vector(f, &values))?;
    let width = p.k * l;
    let (red, pivots) = aug.echelon(width);
    for r in pivots.len()..red.rows() {
        if red.get(r, width) != 0 {
            return Err(fail("inconsistent answers"));
        }
    }
    let first_desired = width - l;
    let mut out = alloc::vec![0u32; l];
    let mut found = 0;
    for (r, &pc) in pivots.iter().enumerate() {
        if pc >= first_desired {
            out[pc - first_desired] = red.get(r, width);
            found += 1;
        }
    }
    if found < l {
        return Err(fail(format!("desired message has rank {found} < {l} in the download")));
    }
    Ok(out)
}

/// Interference cancellation followed by inversion of the combining maps and
/// of the desired projection system.
fn decode_aligned(scheme: &SchemeInstance, plan: &QueryPlan, answers: &AnswerSet) -> Result<Vec<u32>> {
    let a = scheme.aligned().expect("aligned");
    let p = &scheme.params;
    let f = p.field;
    let l = p.l;
    let theta = plan.theta;
    let other = 1 - theta;
    if answers.answers.len() != p.n {
        return Err(Error::ShapeMismatch("answer count".into()));
    }

    struct Server {
        c: Matrix,
        desired_proj: Matrix,
        undesired_coeff: Matrix,
        direct: usize,
        desired_direct: Vec<u32>,
        undesired_direct: Vec<u32>,
        mixed: Vec<u32>,
    }
    let mut servers = Vec::with_capacity(p.n);
    for n in 0..p.n {
        let Payload::Linear { parts, combiner, .. } = &plan.queries[n] else {
            return Err(Error::ShapeMismatch("expected linear payload".into()));
        };
        let c = match (combiner, &scheme.combiner) {
            (Some(c), _) => c.clone(),
            (None, Some(set)) => set.matrices[n].clone(),
            (None, None) => return Err(Error::BadParams("scheme has no combiner".into())),
        };
        let g = scheme.code.share_map(n, l)?;
        let q_des = Matrix::block_diag(f, &parts[theta]);
        let q_und = Matrix::block_diag(f, &parts[other]);
        let desired_proj = q_des.mul(&g)?;
        let undesired_coeff = c.mul(&q_und.mul(&g)?)?;
        let m = desired_proj.rows();
        let r = a.direct[n];
        let ans = &answers.answers[n];
        if ans.len() != m + r {
            return Err(Error::ShapeMismatch(format!("server {} answered {} symbols, expected {}", n + 1, ans.len(), m + r)));
        }
        let (x, y) = (ans[..r].to_vec(), ans[r..2 * r].to_vec());
        let (desired_direct, undesired_direct) = if theta == 0 { (x, y) } else { (y, x) };
        servers.push(Server { c, desired_proj, undesired_coeff, direct: r, desired_direct, undesired_direct, mixed: ans[2 * r..].to_vec() });
    }

    // directly downloaded interference
    let direct_rows: Vec<Matrix> = servers.iter().map(|s| s.undesired_coeff.row_range(0, s.direct)).collect();
    let refs: Vec<&Matrix> = direct_rows.iter().collect();
    let interference = Matrix::vstack(f, l, &refs)?;
    let known: Vec<u32> = servers.iter().flat_map(|s| s.undesired_direct.iter().copied()).collect();
    let dim = interference.rank();
    if dim < interference.rows() {
        return Err(fail(format!("direct interference rows have rank {dim} < {}", interference.rows())));
    }
    let known_col = Matrix::column_vector(f, &known);

    let mut sys_rows: Vec<Matrix> = Vec::with_capacity(p.n);
    let mut sys_vals: Vec<u32> = Vec::new();
    for (n, s) in servers.iter().enumerate() {
        let m = s.desired_proj.rows();
        let mut combined = s.desired_direct.clone();
        if s.direct < m {
            let mixed_rows = s.undesired_coeff.row_range(s.direct, m);
            let t = interference
                .solve_left(&mixed_rows)
                .map_err(|_| fail(format!("interference at server {} is not aligned", n + 1)))?;
            let cancel = t.mul(&known_col)?;
            for (i, v) in s.mixed.iter().enumerate() {
                combined.push(f.sub(*v, cancel.get(i, 0)));
            }
        }
        let c_inv = s.c.invert().map_err(|_| fail(format!("combiner of server {} is singular", n + 1)))?;
        sys_vals.extend(c_inv.apply(&combined)?);
        sys_rows.push(s.desired_proj.clone());
    }
    let refs: Vec<&Matrix> = sys_rows.iter().collect();
    let system = Matrix::vstack(f, l, &refs)?;
    let sol = system
        .solve(&Matrix::column_vector(f, &sys_vals))
        .map_err(|_| fail(format!("desired projections have rank {} < {l}", system.rank())))?;
    Ok(sol.data().to_vec())
}
