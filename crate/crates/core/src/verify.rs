//! Mechanical checks of correctness, privacy, dimension claims and the
//! linear-converse quantities.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_traits::Zero;

use crate::capacity::{ratio, Rational};
use crate::error::{Error, Result};
use crate::field::FieldPrime;
use crate::matrix::{row_space_intersect, Matrix};
use crate::scheme::{
    download_map, gen_queries, gen_queries_with_index, Construction, Payload, QueryForm, QueryPlan, SchemeId, SchemeInstance,
    TableOp, TableQuery,
};
use crate::seed::{derive_seed, trial_rng};
use crate::session::{random_messages, run_session};
use crate::stats::{chi_square_two_sample, ChiSquare};

// ---------------------------------------------------------------------------
// Correctness

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TrialOutcome {
    Ok,
    DecodeError(Error),
    WrongOutput,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CorrectnessReport {
    pub trials: u64,
    pub decode_errors: u64,
    pub wrong_outputs: u64,
    /// Lowest failing trial index and what went wrong.
    pub first_failure: Option<(u64, String)>,
}

impl CorrectnessReport {
    pub fn failures(&self) -> u64 {
        self.decode_errors + self.wrong_outputs
    }

    pub fn failure_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.failures() as f64 / self.trials as f64
        }
    }

    pub fn record(&mut self, index: u64, outcome: &TrialOutcome) {
        self.trials += 1;
        let msg = match outcome {
            TrialOutcome::Ok => return,
            TrialOutcome::DecodeError(e) => {
                self.decode_errors += 1;
                e.to_string()
            }
            TrialOutcome::WrongOutput => {
                self.wrong_outputs += 1;
                "decoded message differs".to_string()
            }
        };
        if self.first_failure.as_ref().is_none_or(|(i, _)| index < *i) {
            self.first_failure = Some((index, msg));
        }
    }

    pub fn merge(&mut self, other: &CorrectnessReport) {
        self.trials += other.trials;
        self.decode_errors += other.decode_errors;
        self.wrong_outputs += other.wrong_outputs;
        if let Some((i, m)) = &other.first_failure {
            if self.first_failure.as_ref().is_none_or(|(j, _)| i < j) {
                self.first_failure = Some((*i, m.clone()));
            }
        }
    }
}

/// Trial `index`: desired message `index mod K`, messages and queries from
/// the derived seed.
pub fn correctness_trial(scheme: &SchemeInstance, base_seed: u64, index: u64) -> Result<TrialOutcome> {
    let mut rng = trial_rng(base_seed, index);
    let theta = (index % scheme.params.k as u64) as usize;
    let messages = random_messages(scheme, &mut rng);
    let t = run_session(scheme, &messages, theta, &mut rng)?;
    Ok(match t.decoded {
        Ok(d) if d == messages[theta] => TrialOutcome::Ok,
        Ok(_) => TrialOutcome::WrongOutput,
        Err(e) => TrialOutcome::DecodeError(e),
    })
}

pub fn check_correctness_range(scheme: &SchemeInstance, seed: u64, range: Range<u64>) -> Result<CorrectnessReport> {
    let mut rep = CorrectnessReport::default();
    for i in range {
        rep.record(i, &correctness_trial(scheme, seed, i)?);
    }
    Ok(rep)
}

pub fn check_correctness(scheme: &SchemeInstance, trials: u64, seed: u64) -> Result<CorrectnessReport> {
    if trials == 0 {
        return Err(Error::BadParams("trials must be positive".into()));
    }
    check_correctness_range(scheme, seed, 0..trials)
}

/// Table schemes: every row and every desired index, `messages_per_case`
/// random message pairs each.
pub fn check_correctness_exhaustive(scheme: &SchemeInstance, messages_per_case: u64, seed: u64) -> Result<CorrectnessReport> {
    let t = scheme.table().ok_or(Error::NotEnumerable)?;
    let mut rep = CorrectnessReport::default();
    let mut index = 0u64;
    for row in 0..t.len() {
        for theta in 0..2 {
            let plan = gen_queries_with_index(scheme, theta, row)?;
            for _ in 0..messages_per_case {
                let mut rng = trial_rng(seed, index);
                let messages = random_messages(scheme, &mut rng);
                let stored: Vec<_> = messages.iter().map(|m| scheme.code.encode(m)).collect::<Result<_>>()?;
                let answers = crate::scheme::answer_all(scheme, &plan, &stored)?;
                let outcome = match crate::scheme::decode(scheme, &plan, &answers) {
                    Ok(d) if d == messages[theta] => TrialOutcome::Ok,
                    Ok(_) => TrialOutcome::WrongOutput,
                    Err(e) => TrialOutcome::DecodeError(e),
                };
                rep.record(index, &outcome);
                index += 1;
            }
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Privacy

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrivacyMode {
    Exhaustive,
    Statistical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Canonicalization {
    /// Table entries as sent.
    TableEntry,
    /// Query vectors in the order sent.
    OrderedRows,
    /// Row-reduced query spaces.
    Rref,
}

impl Canonicalization {
    pub fn name(self) -> &'static str {
        match self {
            Canonicalization::TableEntry => "table-entry",
            Canonicalization::OrderedRows => "ordered-rows",
            Canonicalization::Rref => "rref",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTest {
    pub name: String,
    pub chi: ChiSquare,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SetPrivacy {
    /// 0-based servers.
    pub set: Vec<usize>,
    /// Exact total-variation distance (exhaustive mode).
    pub tv: Option<Rational>,
    /// Views (exhaustive) or samples (statistical) per desired index.
    pub samples: u64,
    pub tests: Vec<FeatureTest>,
    pub min_p_value: Option<f64>,
    /// Per-test significance after Bonferroni correction.
    pub threshold: Option<f64>,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrivacyReport {
    pub scheme: SchemeId,
    pub p: u32,
    pub mode: PrivacyMode,
    pub canonicalization: Canonicalization,
    pub alpha: Option<f64>,
    pub sets: Vec<SetPrivacy>,
    pub pass: bool,
}

fn canonicalization(s: &SchemeInstance) -> Canonicalization {
    match &s.construction {
        Construction::Table(_) => Canonicalization::TableEntry,
        Construction::Aligned(a) if a.form == QueryForm::Space => Canonicalization::Rref,
        _ => Canonicalization::OrderedRows,
    }
}

fn check_sets(s: &SchemeInstance, sets: &[Vec<usize>]) -> Result<()> {
    for set in sets {
        if set.iter().any(|&n| n >= s.params.n) {
            return Err(Error::BadParams(format!("collusion set {set:?} exceeds N={}", s.params.n)));
        }
    }
    Ok(())
}

fn table_key(q: &TableQuery, out: &mut Vec<u32>) {
    out.push(match q.op {
        TableOp::Direct => 0,
        TableOp::MixL3 => 1,
        TableOp::Sum => 2,
    });
    out.push(q.x.len() as u32);
    out.extend(q.x.iter().map(|&v| v as u32));
    out.push(q.y.len() as u32);
    out.extend(q.y.iter().map(|&v| v as u32));
}

fn total_variation(a: &BTreeMap<Vec<u32>, u64>, b: &BTreeMap<Vec<u32>, u64>) -> Rational {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    let mut keys: Vec<&Vec<u32>> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut sum = Rational::zero();
    for k in keys {
        let pa = ratio(*a.get(k).unwrap_or(&0) as i64, na as i64);
        let pb = ratio(*b.get(k).unwrap_or(&0) as i64, nb as i64);
        let d = pa - pb;
        sum += if d < Rational::zero() { -d } else { d };
    }
    sum / ratio(2, 1)
}

/// Upper bound on enumerated views per desired index.
pub const EXHAUSTIVE_BUDGET: u128 = 4_000_000;

/// Exact query distributions per desired index; TV distance per set.
pub fn check_privacy_exhaustive(scheme: &SchemeInstance) -> Result<PrivacyReport> {
    check_privacy_exhaustive_sets(scheme, &scheme.params.collusion_sets)
}

pub fn check_privacy_exhaustive_sets(scheme: &SchemeInstance, sets: &[Vec<usize>]) -> Result<PrivacyReport> {
    check_sets(scheme, sets)?;
    let mut out = Vec::with_capacity(sets.len());
    for set in sets {
        let dists = match &scheme.construction {
            Construction::Table(t) => {
                let mut d = [BTreeMap::new(), BTreeMap::new()];
                for row in &t.entries {
                    for (theta, dist) in d.iter_mut().enumerate() {
                        let mut key = Vec::new();
                        for &n in set {
                            table_key(&row[theta][n], &mut key);
                        }
                        *dist.entry(key).or_insert(0u64) += 1;
                    }
                }
                d
            }
            Construction::Aligned(_) => aligned_exact(scheme, set)?,
            Construction::Baseline => {
                // deterministic queries
                let mut d = [BTreeMap::new(), BTreeMap::new()];
                for (theta, dist) in d.iter_mut().enumerate() {
                    let plan = gen_queries(scheme, theta, &mut trial_rng(0, 0))?;
                    let mut key = Vec::new();
                    for &n in set {
                        payload_key(&plan.queries[n], &mut key);
                    }
                    dist.insert(key, 1u64);
                }
                d
            }
        };
        let tv = total_variation(&dists[0], &dists[1]);
        let consistent = tv.is_zero();
        out.push(SetPrivacy {
            set: set.clone(),
            tv: Some(tv),
            samples: dists[0].values().sum(),
            tests: Vec::new(),
            min_p_value: None,
            threshold: None,
            consistent,
        });
    }
    let pass = out.iter().all(|s| s.consistent);
    Ok(PrivacyReport {
        scheme: scheme.id,
        p: scheme.params.field.p(),
        mode: PrivacyMode::Exhaustive,
        canonicalization: canonicalization(scheme),
        alpha: None,
        sets: out,
        pass,
    })
}

fn payload_key(p: &Payload, out: &mut Vec<u32>) {
    match p {
        Payload::Linear { parts, .. } => {
            for reps in parts {
                for m in reps {
                    out.push(m.rows() as u32);
                    out.extend_from_slice(m.data());
                }
            }
        }
        Payload::Table(q) => table_key(q, out),
    }
}

/// All full-rank `rows x cols` matrices (rows >= cols) over a small field.
fn full_rank_matrices(f: FieldPrime, rows: usize, cols: usize) -> Result<Vec<Matrix>> {
    let cells = (rows * cols) as u32;
    let total = (f.p() as u128).checked_pow(cells).filter(|&t| t <= 1 << 20).ok_or(Error::NotEnumerable)?;
    let want = rows.min(cols);
    let mut out = Vec::new();
    let mut data = vec![0u32; rows * cols];
    for mut code in 0..total {
        for x in data.iter_mut() {
            *x = (code % f.p() as u128) as u32;
            code /= f.p() as u128;
        }
        let m = Matrix::from_vec(f, rows, cols, data.clone())?;
        if m.rank() == want {
            out.push(m);
        }
    }
    Ok(out)
}

fn all_orders(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for sub in all_orders(n - 1) {
        for pos in 0..=sub.len() {
            let mut v = sub.clone();
            v.insert(pos, n - 1);
            out.push(v);
        }
    }
    out
}

/// Exact view distribution of an aligned scheme with a single replica, a
/// fixed combiner and ordered queries, by enumerating both secret matrices
/// and the colluders' row orders.
fn aligned_exact(s: &SchemeInstance, set: &[usize]) -> Result<[BTreeMap<Vec<u32>, u64>; 2]> {
    let a = s.aligned().expect("aligned");
    if s.params.replicas != 1 || a.per_session_combiner || a.form != QueryForm::Ordered || s.params.k != 2 {
        return Err(Error::NotEnumerable);
    }
    let f = s.params.field;
    // rough size check before materializing anything
    let per = |rows: usize| libm::pow(f.p() as f64, (rows * a.share_len) as f64);
    if per(a.v_rows) * per(a.u_rows) > 1e9 {
        return Err(Error::NotEnumerable);
    }
    let sv = full_rank_matrices(f, a.v_rows, a.share_len)?;
    let su = full_rank_matrices(f, a.u_rows, a.share_len)?;
    let mut slots: Vec<(usize, usize)> = Vec::new(); // (server, message) in view order
    for &n in set {
        slots.push((n, 0));
        slots.push((n, 1));
    }
    let mut count = sv.len() as u128 * su.len() as u128;
    for &(n, _) in &slots {
        let m = a.desired[n].rows().max(a.undesired[n].rows());
        count *= (1..=m as u128).product::<u128>();
    }
    if count > EXHAUSTIVE_BUDGET {
        return Err(Error::NotEnumerable);
    }
    let mut dists = [BTreeMap::new(), BTreeMap::new()];
    for (theta, dist) in dists.iter_mut().enumerate() {
        for s_v in &sv {
            for s_u in &su {
                let canon: Vec<Matrix> = slots
                    .iter()
                    .map(|&(n, k)| if k == theta { a.desired[n].mul(s_v) } else { a.undesired[n].mul(s_u) })
                    .collect::<Result<_>>()?;
                let orders: Vec<Vec<Vec<usize>>> = canon.iter().map(|m| all_orders(m.rows())).collect();
                let mut idx = vec![0usize; canon.len()];
                loop {
                    let mut key = Vec::new();
                    for (i, m) in canon.iter().enumerate() {
                        key.extend_from_slice(m.select_rows(&orders[i][idx[i]]).data());
                    }
                    *dist.entry(key).or_insert(0u64) += 1;
                    let mut j = 0;
                    while j < idx.len() {
                        idx[j] += 1;
                        if idx[j] < orders[j].len() {
                            break;
                        }
                        idx[j] = 0;
                        j += 1;
                    }
                    if j == idx.len() {
                        break;
                    }
                }
            }
        }
    }
    Ok(dists)
}

/// Fewest samples per desired index accepted by the statistical test.
pub const MIN_SAMPLES: u64 = 10_000;

/// Largest value-feature space (`p^len`).
const VALUE_FEATURE_CELLS: u64 = 1000;

const FEATURES: [&str; 3] = ["dependency", "pivots", "values"];

/// Per collusion set, per desired index, per test: outcome counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PrivacyAccumulator {
    pub sets: Vec<Vec<usize>>,
    /// `counts[set][test][theta]`.
    pub counts: Vec<Vec<[BTreeMap<u128, u64>; 2]>>,
    pub samples: [u64; 2],
}

impl PrivacyAccumulator {
    pub fn merge(&mut self, other: PrivacyAccumulator) {
        if self.counts.is_empty() {
            *self = other;
            return;
        }
        for (mine, theirs) in self.counts.iter_mut().zip(other.counts) {
            for (m, t) in mine.iter_mut().zip(theirs) {
                for (mm, tt) in m.iter_mut().zip(t) {
                    for (k, v) in tt {
                        *mm.entry(k).or_insert(0) += v;
                    }
                }
            }
        }
        self.samples[0] += other.samples[0];
        self.samples[1] += other.samples[1];
    }
}

/// Test names for a scheme, in accumulator order.
pub fn privacy_test_names(s: &SchemeInstance) -> Vec<String> {
    match &s.construction {
        Construction::Table(_) => vec!["view".to_string()],
        _ => (0..s.params.k).flat_map(|k| FEATURES.iter().map(move |f| format!("message{}-{f}", k + 1))).collect(),
    }
}

/// Folds small integers into one key: exact packing while it fits, a
/// mixing hash after that (still a function of the view).
struct KeyBuilder {
    acc: u128,
    exact: bool,
}

impl KeyBuilder {
    fn new() -> Self {
        KeyBuilder { acc: 1, exact: true }
    }

    fn push(&mut self, v: u32, radix: u32) {
        if self.exact {
            if let Some(x) = self.acc.checked_mul(radix as u128).and_then(|x| x.checked_add(v as u128)) {
                self.acc = x;
                return;
            }
            self.exact = false;
        }
        self.acc = (self.acc.rotate_left(17) ^ ((v as u128) << 64 | radix as u128)).wrapping_mul(0x9E37_79B9_7F4A_7C15_F39C_C060_5CED_C835);
    }

    fn finish(self) -> u128 {
        // exact and hashed keys live in disjoint halves of the key space
        if self.exact {
            self.acc
        } else {
            self.acc | 1 << 127
        }
    }
}

/// Scratch space for the features of one stacked view.
struct Features {
    f: FieldPrime,
    cols: usize,
    rows: Vec<u32>,
    basis: Vec<u32>,
    pivots: Vec<usize>,
    work: Vec<u32>,
    normal: Vec<u32>,
}

impl Features {
    fn new(f: FieldPrime) -> Self {
        Features { f, cols: 0, rows: Vec::new(), basis: Vec::new(), pivots: Vec::new(), work: Vec::new(), normal: Vec::new() }
    }

    fn load(&mut self, mats: &[&Matrix]) {
        self.cols = mats[0].cols();
        self.rows.clear();
        for m in mats {
            self.rows.extend_from_slice(m.data());
        }
    }

    fn n_rows(&self) -> usize {
        self.rows.len() / self.cols.max(1)
    }

    /// Inserts row `i` into the running basis; returns its pivot if independent.
    fn insert(&mut self, i: usize) -> Option<usize> {
        let (f, c) = (self.f, self.cols);
        self.work.clear();
        self.work.extend_from_slice(&self.rows[i * c..(i + 1) * c]);
        for (b, &pc) in self.pivots.iter().enumerate() {
            let x = self.work[pc];
            if x != 0 {
                let nx = f.neg(x);
                for k in 0..c {
                    let y = self.basis[b * c + k];
                    if y != 0 {
                        self.work[k] = f.add(self.work[k], f.mul(nx, y));
                    }
                }
            }
        }
        let pc = self.work.iter().position(|&x| x != 0)?;
        let inv = f.inv(self.work[pc]).expect("nonzero");
        for x in self.work.iter_mut() {
            *x = f.mul(*x, inv);
        }
        self.basis.extend_from_slice(&self.work);
        self.pivots.push(pc);
        Some(pc)
    }

    fn reset(&mut self) {
        self.basis.clear();
        self.pivots.clear();
    }

    /// Dependency signature (forward and backward greedy independence,
    /// pairwise parallelism) and the forward pivot profile.
    fn dependency_and_pivots(&mut self) -> (u128, u128) {
        let r = self.n_rows();
        let c = self.cols;
        let f = self.f;
        let mut key = KeyBuilder::new();
        let mut piv = KeyBuilder::new();
        self.reset();
        for i in 0..r {
            let pc = self.insert(i);
            key.push(pc.is_some() as u32, 2);
            piv.push(pc.unwrap_or(c) as u32, c as u32 + 1);
        }
        self.reset();
        for i in (0..r).rev() {
            key.push(self.insert(i).is_some() as u32, 2);
        }
        // rows scaled so their first nonzero entry is 1
        self.normal.clear();
        for i in 0..r {
            let row = &self.rows[i * c..(i + 1) * c];
            let s = row.iter().find(|&&x| x != 0).map_or(0, |&x| f.inv(x).expect("nonzero"));
            self.normal.extend(row.iter().map(|&x| f.mul(x, s)));
        }
        for i in 0..r {
            for j in i + 1..r {
                key.push((self.normal[i * c..(i + 1) * c] == self.normal[j * c..(j + 1) * c]) as u32, 2);
            }
        }
        (key.finish(), piv.finish())
    }

    /// Last coordinate of the leading rows.
    fn values(&self, len: usize) -> u128 {
        let mut key = KeyBuilder::new();
        let c = self.cols;
        for i in 0..len.min(self.n_rows()) {
            key.push(self.rows[i * c + c - 1], self.f.p());
        }
        key.finish()
    }
}

fn value_len(p: u32) -> usize {
    let mut len = 0;
    let mut cells = 1u64;
    while cells * p as u64 <= VALUE_FEATURE_CELLS {
        cells *= p as u64;
        len += 1;
    }
    len.max(1)
}

fn bump(map: &mut BTreeMap<u128, u64>, key: u128) {
    *map.entry(key).or_insert(0) += 1;
}

/// Adds one sampled plan to the accumulator.
fn accumulate_plan(s: &SchemeInstance, plan: &QueryPlan, acc: &mut PrivacyAccumulator, scratch: &mut Features) {
    let theta = plan.theta;
    let vlen = value_len(s.params.field.p());
    for (si, set) in acc.sets.iter().enumerate() {
        match &s.construction {
            Construction::Table(_) => {
                let mut key = Vec::new();
                for &n in set {
                    payload_key(&plan.queries[n], &mut key);
                }
                let mut kb = KeyBuilder::new();
                for v in key {
                    kb.push(v, 64);
                }
                bump(&mut acc.counts[si][0][theta], kb.finish());
            }
            _ => {
                for k in 0..s.params.k {
                    let reps = match &plan.queries[set[0]] {
                        Payload::Linear { parts, .. } => parts[k].len(),
                        _ => 0,
                    };
                    // replicas carry independent secrets: pooled as extra samples
                    for r in 0..reps {
                        let mats: Vec<&Matrix> = set
                            .iter()
                            .map(|&n| match &plan.queries[n] {
                                Payload::Linear { parts, .. } => &parts[k][r],
                                _ => unreachable!("linear scheme"),
                            })
                            .collect();
                        scratch.load(&mats);
                        let base = k * FEATURES.len();
                        let counts = &mut acc.counts[si];
                        let (dep, piv) = scratch.dependency_and_pivots();
                        bump(&mut counts[base][theta], dep);
                        bump(&mut counts[base + 1][theta], piv);
                        bump(&mut counts[base + 2][theta], scratch.values(vlen));
                    }
                }
            }
        }
    }
}

pub fn new_accumulator(s: &SchemeInstance, sets: &[Vec<usize>]) -> PrivacyAccumulator {
    let tests = privacy_test_names(s).len();
    PrivacyAccumulator {
        sets: sets.to_vec(),
        counts: sets.iter().map(|_| (0..tests).map(|_| [BTreeMap::new(), BTreeMap::new()]).collect()).collect(),
        samples: [0, 0],
    }
}

/// Sample `j` under desired index `theta` uses derived index `2j + theta`.
pub fn privacy_samples(s: &SchemeInstance, sets: &[Vec<usize>], seed: u64, range: Range<u64>) -> Result<PrivacyAccumulator> {
    check_sets(s, sets)?;
    let mut acc = new_accumulator(s, sets);
    let mut scratch = Features::new(s.params.field);
    for j in range {
        for theta in 0..2usize {
            let mut rng = trial_rng(seed, 2 * j + theta as u64);
            let plan = gen_queries(s, theta, &mut rng)?;
            accumulate_plan(s, &plan, &mut acc, &mut scratch);
            acc.samples[theta] += 1;
        }
    }
    Ok(acc)
}

/// Chi-square on every test of every set; Bonferroni over all of them.
pub fn finish_privacy(s: &SchemeInstance, acc: &PrivacyAccumulator, alpha: f64) -> Result<PrivacyReport> {
    let samples = acc.samples[0].min(acc.samples[1]);
    if samples < MIN_SAMPLES {
        return Err(Error::UnderPowered(format!("{samples} samples per desired index, need {MIN_SAMPLES}")));
    }
    let names = privacy_test_names(s);
    let total_tests = (names.len() * acc.sets.len()).max(1);
    let threshold = alpha / total_tests as f64;
    let mut sets = Vec::with_capacity(acc.sets.len());
    for (si, set) in acc.sets.iter().enumerate() {
        let tests: Vec<FeatureTest> = acc.counts[si]
            .iter()
            .zip(&names)
            .map(|(c, name)| FeatureTest { name: name.clone(), chi: chi_square_two_sample(&c[0], &c[1]) })
            .collect();
        let min_p = tests.iter().map(|t| t.chi.p_value).fold(1.0f64, f64::min);
        sets.push(SetPrivacy {
            set: set.clone(),
            tv: None,
            samples,
            consistent: min_p >= threshold,
            min_p_value: Some(min_p),
            threshold: Some(threshold),
            tests,
        });
    }
    let pass = sets.iter().all(|s| s.consistent);
    Ok(PrivacyReport {
        scheme: s.id,
        p: s.params.field.p(),
        mode: PrivacyMode::Statistical,
        canonicalization: canonicalization(s),
        alpha: Some(alpha),
        sets,
        pass,
    })
}

/// Statistical comparison of the views of `sets` under the two desired
/// indices, `samples` draws each.
pub fn check_privacy_statistical_sets(
    s: &SchemeInstance,
    sets: &[Vec<usize>],
    samples: u64,
    seed: u64,
    alpha: f64,
) -> Result<PrivacyReport> {
    if samples < MIN_SAMPLES {
        return Err(Error::UnderPowered(format!("{samples} samples per desired index, need {MIN_SAMPLES}")));
    }
    let acc = privacy_samples(s, sets, seed, 0..samples)?;
    finish_privacy(s, &acc, alpha)
}

pub fn check_privacy_statistical(s: &SchemeInstance, set: &[usize], samples: u64, seed: u64, alpha: f64) -> Result<PrivacyReport> {
    check_privacy_statistical_sets(s, &[set.to_vec()], samples, seed, alpha)
}

// ---------------------------------------------------------------------------
// Dimensions

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlignmentCase {
    /// 0 for the first message, 1 for the second.
    pub message: usize,
    /// 1-based symbol indices chosen at servers 1..3.
    pub indices: [usize; 3],
    /// Dimension with the server-4 symbol of the desired-index-1 row, then of the desired-index-2 row.
    pub dims: [usize; 2],
    pub expected: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionReport {
    pub scheme: SchemeId,
    pub repeats: u64,
    pub desired_expected: usize,
    pub interference_expected: usize,
    /// Observed (min, max) over draws.
    pub desired_range: (usize, usize),
    pub interference_range: (usize, usize),
    pub alignment: Option<Vec<AlignmentCase>>,
    pub pass: bool,
}

/// Desired and interference ranks of one drawn plan.
pub fn dimension_draw(s: &SchemeInstance, seed: u64, index: u64) -> Result<(usize, usize)> {
    let theta = (index % s.params.k as u64) as usize;
    let plan = gen_queries(s, theta, &mut trial_rng(seed, index))?;
    plan_ranks(s, &plan)
}

fn plan_ranks(s: &SchemeInstance, plan: &QueryPlan) -> Result<(usize, usize)> {
    let p = &s.params;
    let f = p.field;
    let l = p.l;
    match &s.construction {
        Construction::Aligned(_) => {
            let other = 1 - plan.theta;
            let mut des = Vec::new();
            let mut und = Vec::new();
            for (n, q) in plan.queries.iter().enumerate() {
                let Payload::Linear { parts, .. } = q else { unreachable!("aligned payload") };
                let g = s.code.share_map(n, l)?;
                des.push(Matrix::block_diag(f, &parts[plan.theta]).mul(&g)?);
                und.push(Matrix::block_diag(f, &parts[other]).mul(&g)?);
            }
            let d: Vec<&Matrix> = des.iter().collect();
            let u: Vec<&Matrix> = und.iter().collect();
            Ok((Matrix::vstack(f, l, &d)?.rank(), Matrix::vstack(f, l, &u)?.rank()))
        }
        _ => {
            let map = download_map(s, plan)?;
            let theta = plan.theta;
            let des: Vec<usize> = (theta * l..(theta + 1) * l).collect();
            let und: Vec<usize> = (0..p.k * l).filter(|c| c / l != theta).collect();
            Ok((map.select_cols(&des).rank(), map.select_cols(&und).rank()))
        }
    }
}

fn expected_dims(s: &SchemeInstance) -> (usize, usize) {
    let l = s.params.l;
    match s.interference_dim() {
        Some(i) => (l, i),
        None => (l, s.download_total() - l),
    }
}

pub fn check_dimensions(s: &SchemeInstance, repeats: u64, seed: u64) -> Result<DimensionReport> {
    let (de, ie) = expected_dims(s);
    let mut dr = (usize::MAX, 0);
    let mut ir = (usize::MAX, 0);
    for i in 0..repeats.max(1) {
        let (d, u) = dimension_draw(s, seed, i)?;
        dr = (dr.0.min(d), dr.1.max(d));
        ir = (ir.0.min(u), ir.1.max(u));
    }
    let alignment = if s.id == SchemeId::Tab2432 { Some(alignment_facts(s)?) } else { None };
    let alignment_ok = alignment.as_ref().is_none_or(|c| c.iter().all(|x| x.dims == x.expected));
    let pass = dr == (de, de) && ir == (ie, ie) && alignment_ok;
    Ok(DimensionReport {
        scheme: s.id,
        repeats: repeats.max(1),
        desired_expected: de,
        interference_expected: ie,
        desired_range: dr,
        interference_range: ir,
        alignment,
        pass,
    })
}

/// Replays the four-symbol alignment facts of the 64-row table over all
/// eight index patterns of each message.
pub fn alignment_facts(s: &SchemeInstance) -> Result<Vec<AlignmentCase>> {
    let t = s.table().ok_or(Error::NotEnumerable)?;
    if t.n_servers() != 4 {
        return Err(Error::BadParams("needs the four-server table".into()));
    }
    let f = s.params.field;
    let l = s.params.l;
    let maps: Vec<Matrix> = (0..4).map(|n| s.code.share_map(n, l)).collect::<Result<_>>()?;
    let mut cases: BTreeMap<(usize, [usize; 3]), [usize; 2]> = BTreeMap::new();
    for row in &t.entries {
        for message in 0..2 {
            let pick = |q: &TableQuery| if message == 0 { q.x[0] } else { q.y[0] };
            let first3: Vec<usize> = (0..3).map(|n| pick(&row[0][n])).collect();
            let mut dims = [0usize; 2];
            for (theta, d) in dims.iter_mut().enumerate() {
                let mut rows = Vec::new();
                for (n, &i) in first3.iter().enumerate() {
                    rows.push(maps[n].row(i).to_vec());
                }
                rows.push(maps[3].row(pick(&row[theta][3])).to_vec());
                *d = Matrix::from_row_vecs(f, l, &rows)?.rank();
            }
            // servers 1 and 3 hold symbols 1,2; server 2 holds symbols 3,4
            let idx = [first3[0] + 1, first3[1] + 3, first3[2] + 1];
            if let Some(prev) = cases.insert((message, idx), dims) {
                if prev != dims {
                    return Err(Error::BadParams(format!("index pattern {idx:?} is not a function of the table row")));
                }
            }
        }
    }
    Ok(cases
        .into_iter()
        .map(|((message, indices), dims)| AlignmentCase {
            message,
            indices,
            dims,
            expected: if message == 0 { [4, 3] } else { [3, 4] },
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Linear audit

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditReport {
    pub n_servers: usize,
    pub l: usize,
    /// Per-server desired-query ranks.
    pub ranks: Vec<usize>,
    pub d: usize,
    /// `epsilon * L = N d - L`.
    pub eps_l: i64,
    pub epsilon: Rational,
    /// Pairwise overlap dimensions `((i, j), dim)`.
    pub overlaps: Vec<((usize, usize), usize)>,
    /// Largest pairwise overlap.
    pub alpha_d: usize,
    pub alpha: Rational,
    /// `(3 alpha d, d + 2 epsilon L)`.
    pub sides: (i64, i64),
    /// Verdict (only for four servers with two-symbol-block storage).
    pub inequality_holds: Option<bool>,
    pub tight: Option<bool>,
}

/// Audits per-server desired-query matrices (share coordinates) for a
/// message of length `l`.
pub fn audit_matrices(queries: &[Matrix], l: usize) -> Result<AuditReport> {
    if queries.is_empty() || l == 0 {
        return Err(Error::BadParams("no queries to audit".into()));
    }
    let n = queries.len();
    let ranks: Vec<usize> = queries.iter().map(|q| q.rank()).collect();
    if ranks.iter().any(|&r| r != ranks[0]) {
        return Err(Error::AsymmetryDetected(format!("per-server desired ranks {ranks:?}")));
    }
    let d = ranks[0];
    let mut overlaps = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            overlaps.push(((i, j), row_space_intersect(&queries[i], &queries[j])?.rank()));
        }
    }
    let alpha_d = overlaps.iter().map(|x| x.1).max().unwrap_or(0);
    let eps_l = (n * d) as i64 - l as i64;
    let lhs = 3 * alpha_d as i64;
    let rhs = d as i64 + 2 * eps_l;
    // the inequality is derived for four servers storing halves of the message
    let verdict = n == 4 && 2 * queries[0].cols() == l;
    Ok(AuditReport {
        n_servers: n,
        l,
        ranks,
        d,
        eps_l,
        epsilon: ratio(eps_l, l as i64),
        overlaps,
        alpha_d,
        alpha: if d == 0 { Rational::zero() } else { ratio(alpha_d as i64, d as i64) },
        sides: (lhs, rhs),
        inequality_holds: verdict.then_some(lhs <= rhs),
        tight: verdict.then_some(lhs == rhs),
    })
}

/// Audits the queries of the second message when it is desired, from one
/// drawn plan.
pub fn audit_linear(s: &SchemeInstance, seed: u64) -> Result<AuditReport> {
    if s.params.k < 2 {
        return Err(Error::BadParams("needs two messages".into()));
    }
    let plan = gen_queries(s, 1, &mut trial_rng(seed, 0))?;
    let f = s.params.field;
    let mut queries = Vec::with_capacity(s.params.n);
    for q in &plan.queries {
        let Payload::Linear { parts, .. } = q else {
            return Err(Error::BadParams("audit needs matrix queries".into()));
        };
        queries.push(Matrix::block_diag(f, &parts[1]));
    }
    // servers that receive nothing carry zero rank; those are asymmetric too
    audit_matrices(&queries, s.params.l)
}

/// Per-trial seed used by the parallel runners.
pub fn trial_seed(base: u64, index: u64) -> u64 {
    derive_seed(base, index)
}
