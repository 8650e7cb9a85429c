//! JSON renderings of core reports. Fractions are strings like `"3/5"`.

use serde_json::{json, Value};

use pirlab_core::capacity::Rational;
use pirlab_core::combiner::{CombinerReport, CombinerSet, PMatrix};
use pirlab_core::verify::{AuditReport, CorrectnessReport, DimensionReport, PrivacyMode, PrivacyReport};
use pirlab_core::Matrix;

use crate::transcript::{MatrixRecord, ProvenanceRecord};

pub fn frac(r: &Rational) -> String {
    r.to_string()
}

fn one_based(set: &[usize]) -> Vec<usize> {
    set.iter().map(|n| n + 1).collect()
}

fn matrix(m: &Matrix) -> Value {
    serde_json::to_value(MatrixRecord::from_matrix(m)).expect("plain data")
}

pub fn correctness(r: &CorrectnessReport, zero_error: bool, max_failure_rate: f64) -> Value {
    let pass = if zero_error { r.failures() == 0 } else { r.failure_rate() < max_failure_rate };
    json!({
        "check": "correctness",
        "trials": r.trials,
        "decode_errors": r.decode_errors,
        "wrong_outputs": r.wrong_outputs,
        "failure_rate": r.failure_rate(),
        "first_failure": r.first_failure.as_ref().map(|(i, m)| json!({"trial": i, "error": m})),
        "criterion": if zero_error { "zero failures".to_string() } else { format!("failure rate < {max_failure_rate}") },
        "pass": pass,
    })
}

pub fn privacy(r: &PrivacyReport) -> Value {
    let sets: Vec<Value> = r
        .sets
        .iter()
        .map(|s| {
            json!({
                "set": one_based(&s.set),
                "tv": s.tv.as_ref().map(frac),
                "samples": s.samples,
                "min_p_value": s.min_p_value,
                "threshold": s.threshold,
                "tests": s.tests.iter().map(|t| json!({
                    "feature": t.name,
                    "statistic": t.chi.statistic,
                    "df": t.chi.df,
                    "cells": t.chi.cells,
                    "p_value": t.chi.p_value,
                })).collect::<Vec<_>>(),
                "consistent": s.consistent,
            })
        })
        .collect();
    json!({
        "check": "privacy",
        "mode": match r.mode { PrivacyMode::Exhaustive => "exhaustive", PrivacyMode::Statistical => "statistical" },
        "p": r.p,
        "canonicalization": r.canonicalization.name(),
        "alpha": r.alpha,
        "sets": sets,
        "pass": r.pass,
    })
}

pub fn dimensions(r: &DimensionReport) -> Value {
    json!({
        "check": "dimensions",
        "repeats": r.repeats,
        "desired": {"expected": r.desired_expected, "min": r.desired_range.0, "max": r.desired_range.1},
        "interference": {"expected": r.interference_expected, "min": r.interference_range.0, "max": r.interference_range.1},
        "alignment_cases": r.alignment.as_ref().map(|cases| cases.iter().map(|c| json!({
            "message": c.message + 1,
            "indices": c.indices,
            "dims": c.dims,
            "expected": c.expected,
        })).collect::<Vec<_>>()),
        "pass": r.pass,
    })
}

pub fn audit(r: &AuditReport) -> Value {
    json!({
        "check": "audit",
        "servers": r.n_servers,
        "L": r.l,
        "ranks": r.ranks,
        "d": r.d,
        "epsilon": frac(&r.epsilon),
        "epsilon_L": r.eps_l,
        "alpha": frac(&r.alpha),
        "alpha_d": r.alpha_d,
        "overlaps": r.overlaps.iter().map(|((i, j), d)| json!({"pair": [i + 1, j + 1], "dim": d})).collect::<Vec<_>>(),
        "lhs_3_alpha_d": r.sides.0,
        "rhs_d_plus_2_epsilon_L": r.sides.1,
        "inequality_holds": r.inequality_holds,
        "tight": r.tight,
    })
}

pub fn combiner(set: &CombinerSet, rep: &CombinerReport) -> Value {
    json!({
        "kind": "combiner",
        "p": set.field.p(),
        "provenance": serde_json::to_value(ProvenanceRecord::from(set.provenance)).expect("plain data"),
        "matrices": set.matrices.iter().map(matrix).collect::<Vec<_>>(),
        "certificate": {
            "invertible": rep.p1,
            "realizations": rep.realizations.to_string(),
            "failures": rep.failures.to_string(),
            "pass": rep.pass,
        },
    })
}

pub fn pmatrix(pm: &PMatrix) -> Value {
    let f = pm.matrix.field();
    let ranks: Vec<Value> = pirlab_core::storage::k_subsets(pm.n, pm.t)
        .into_iter()
        .map(|s| {
            let rows: Vec<Vec<u32>> = s
                .iter()
                .enumerate()
                .map(|(i, _)| {
                    let rest: Vec<usize> = s.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, &j)| j).collect();
                    pm.common.iter().find(|(k, _)| *k == rest).expect("cached").1.clone()
                })
                .collect();
            let rank = Matrix::from_row_vecs(f, pm.t, &rows).map(|m| m.rank()).unwrap_or(0);
            json!({"subset": one_based(&s), "rank": rank})
        })
        .collect();
    json!({
        "kind": "pmatrix",
        "p": f.p(),
        "n": pm.n,
        "t": pm.t,
        "matrix": matrix(&pm.matrix),
        "common_vectors": pm.common.iter().map(|(s, v)| json!({"subset": one_based(s), "vector": v})).collect::<Vec<_>>(),
        "certificate": {"subset_ranks": ranks, "pass": true},
    })
}
