//! Capacity tables as CSV.

use pirlab_core::capacity::{self, CapacityKind, Rational};
use pirlab_core::Result;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub kind: String,
    pub k: u32,
    pub n: u32,
    pub t: u32,
    pub k_c: u32,
    pub value: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableKind {
    Formula(CapacityKind),
    Bound2422,
    General,
    FourCases,
}

impl TableKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "pir" => TableKind::Formula(CapacityKind::Pir),
            "tpir" => TableKind::Formula(CapacityKind::Tpir),
            "mds-pir" => TableKind::Formula(CapacityKind::MdsPir),
            "fghk" | "fghk-conjecture" => TableKind::Formula(CapacityKind::Fghk),
            "theorem3" => TableKind::Formula(CapacityKind::Theorem3),
            "bound2422" => TableKind::Bound2422,
            "general" => TableKind::General,
            "table-four-cases" => TableKind::FourCases,
            _ => return None,
        })
    }
}

pub fn kind_name(k: CapacityKind) -> &'static str {
    match k {
        CapacityKind::Pir => "pir",
        CapacityKind::Tpir => "tpir",
        CapacityKind::MdsPir => "mds-pir",
        CapacityKind::Fghk => "fghk",
        CapacityKind::Theorem3 => "theorem3",
    }
}

/// Rows for `kind`. `ks` lists the message counts for series kinds.
pub fn build(kind: TableKind, ks: &[u32], n: u32, t: u32, k_c: u32) -> Result<Vec<Row>> {
    let row = |kind: &str, k, n, t, k_c, value| Row { kind: kind.to_string(), k, n, t, k_c, value };
    Ok(match kind {
        TableKind::Formula(CapacityKind::Theorem3) => vec![row("theorem3", 2, n, t, n - 1, capacity::theorem3(n, t)?)],
        TableKind::Formula(c) => ks
            .iter()
            .map(|&k| capacity::capacity_formula(c, k, n, t, k_c).map(|v| row(kind_name(c), k, n, t, k_c, v)))
            .collect::<Result<_>>()?,
        TableKind::Bound2422 => {
            let kmax = ks.iter().copied().max().unwrap_or(1);
            let series = capacity::outer_bound_2422_series(kmax);
            ks.iter().map(|&k| row("bound2422", k, 4, 2, 2, series[k as usize - 1].clone())).collect()
        }
        TableKind::General => {
            let kmax = ks.iter().copied().max().unwrap_or(1);
            let series = capacity::outer_bound_general_series(kmax, n, t, k_c)?;
            ks.iter().map(|&k| row("general", k, n, t, k_c, series[k as usize - 1].clone())).collect()
        }
        TableKind::FourCases => capacity::four_case_table()
            .into_iter()
            .map(|c| row(kind_name(c.kind), c.k, c.n, c.t, c.k_c, c.value))
            .collect(),
    })
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "K", "N", "T", "Kc", "value", "decimal"]).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.kind.clone(),
            r.k.to_string(),
            r.n.to_string(),
            r.t.to_string(),
            r.k_c.to_string(),
            r.value.to_string(),
            format!("{:.12}", capacity::to_f64(&r.value)),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}
