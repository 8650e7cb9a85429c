//! Combining matrices for aligned downloads, and the matrix that spreads
//! collusion-class interference across servers.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::FieldPrime;
use crate::matrix::{sample_uniform, EchelonBasis, Matrix};
use crate::scheme::{canonical_undesired_rows, Payload, QueryForm, QueryPlan, SchemeInstance};
use crate::seed::rng_from_seed;
use crate::storage::k_subsets;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Explicit,
    Searched { seed: u64, tries: usize },
    RandomPerSession,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinerSet {
    /// One square matrix per server.
    pub matrices: Vec<Matrix>,
    pub field: FieldPrime,
    pub provenance: Provenance,
}

/// Undesired projection rows per server and how the user may reorder them.
#[derive(Clone, Debug)]
pub struct InterferenceStructure {
    pub field: FieldPrime,
    /// Per server, canonical undesired rows (`m_n x cols`).
    pub blocks: Vec<Matrix>,
    /// Per server, number of directly downloaded rows.
    pub direct: Vec<usize>,
    /// Per server, consecutive row groups that are permuted independently.
    pub groups: Vec<Vec<usize>>,
    /// Declared interference dimension.
    pub dim: usize,
    /// Rank of all rows together.
    pub total_rank: usize,
}

impl InterferenceStructure {
    pub fn new(field: FieldPrime, blocks: Vec<Matrix>, direct: Vec<usize>, groups: Vec<Vec<usize>>, dim: usize) -> Result<Self> {
        if blocks.len() != direct.len() || blocks.len() != groups.len() || blocks.is_empty() {
            return Err(Error::ShapeMismatch("structure per-server lists".into()));
        }
        let cols = blocks[0].cols();
        let refs: Vec<&Matrix> = blocks.iter().collect();
        let total_rank = Matrix::vstack(field, cols, &refs)?.rank();
        Ok(InterferenceStructure { field, blocks, direct, groups, dim, total_rank })
    }

    /// Canonical structure of a scheme with a fixed combiner.
    pub fn for_scheme(s: &SchemeInstance) -> Result<Self> {
        let a = s.aligned().ok_or_else(|| Error::BadParams("not an aligned scheme".into()))?;
        if a.per_session_combiner {
            return Err(Error::BadParams("per-session combiners are certified per plan".into()));
        }
        let blocks = canonical_undesired_rows(s)?;
        let groups = a
            .undesired
            .iter()
            .map(|u| match a.form {
                QueryForm::Ordered => vec![u.rows(); s.params.replicas],
                QueryForm::Space => Vec::new(),
            })
            .collect();
        Self::new(s.params.field, blocks, a.direct.clone(), groups, a.interference_dim * s.params.replicas)
    }

    /// Structure of one realized plan: rows as sent, no reordering freedom.
    pub fn from_plan(s: &SchemeInstance, plan: &QueryPlan) -> Result<Self> {
        let a = s.aligned().ok_or_else(|| Error::BadParams("not an aligned scheme".into()))?;
        let f = s.params.field;
        let other = 1 - plan.theta;
        let mut blocks = Vec::with_capacity(s.params.n);
        for (n, q) in plan.queries.iter().enumerate() {
            let Payload::Linear { parts, .. } = q else {
                return Err(Error::BadParams("not a linear payload".into()));
            };
            let qm = Matrix::block_diag(f, &parts[other]);
            blocks.push(qm.mul(&s.code.share_map(n, s.params.l)?)?);
        }
        Self::new(f, blocks, a.direct.clone(), vec![Vec::new(); s.params.n], a.interference_dim * s.params.replicas)
    }

    pub fn n_servers(&self) -> usize {
        self.blocks.len()
    }

    /// All row orders of server `n`.
    pub fn orders(&self, n: usize) -> Vec<Vec<usize>> {
        let m = self.blocks[n].rows();
        let mut acc: Vec<Vec<usize>> = vec![Vec::new()];
        let mut offset = 0;
        for &g in &self.groups[n] {
            let perms = permutations(g);
            let mut next = Vec::with_capacity(acc.len() * perms.len());
            for prefix in &acc {
                for p in &perms {
                    let mut v = prefix.clone();
                    v.extend(p.iter().map(|&i| offset + i));
                    next.push(v);
                }
            }
            acc = next;
            offset += g;
        }
        for v in &mut acc {
            v.extend(offset..m);
        }
        acc
    }

    pub fn realization_count(&self) -> u128 {
        (0..self.n_servers())
            .map(|n| self.groups[n].iter().map(|&g| (1..=g as u128).product::<u128>()).product::<u128>())
            .product()
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for sub in permutations(n - 1) {
        for pos in 0..=sub.len() {
            let mut v = sub.clone();
            v.insert(pos, n - 1);
            out.push(v);
        }
    }
    out.sort();
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinerReport {
    /// Per server: combining matrix invertible.
    pub p1: Vec<bool>,
    pub realizations: u128,
    pub failures: u128,
    /// Up to a few failing realizations (row order per server).
    pub examples: Vec<Vec<Vec<usize>>>,
    pub pass: bool,
}

const MAX_EXAMPLES: usize = 8;

/// Checks invertibility of every combining matrix, then that the directly
/// downloaded interference rows are independent for every reordering.
pub fn verify_combiner(set: &CombinerSet, st: &InterferenceStructure) -> CombinerReport {
    verify_inner(set, st, false)
}

fn verify_inner(set: &CombinerSet, st: &InterferenceStructure, stop_early: bool) -> CombinerReport {
    let realizations = st.realization_count();
    let p1: Vec<bool> = set.matrices.iter().map(|c| c.det().map(|d| d != 0).unwrap_or(false)).collect();
    let shapes_ok = set.matrices.len() == st.n_servers()
        && set.matrices.iter().zip(&st.blocks).all(|(c, b)| c.rows() == b.rows() && c.cols() == b.rows());
    if !shapes_ok || st.total_rank != st.dim || st.direct.iter().sum::<usize>() != st.dim {
        return CombinerReport { p1, realizations, failures: realizations, examples: Vec::new(), pass: false };
    }
    let heads: Vec<Matrix> = set.matrices.iter().zip(&st.direct).map(|(c, &r)| c.row_range(0, r)).collect();
    let orders: Vec<Vec<Vec<usize>>> = (0..st.n_servers()).map(|n| st.orders(n)).collect();
    let mut walk = Walk { st, heads: &heads, orders: &orders, failures: 0, examples: Vec::new(), stop_early, stopped: false };
    let mut prefix = Vec::new();
    walk.visit(0, EchelonBasis::new(st.field), &mut prefix);
    let failures = walk.failures;
    let pass = failures == 0 && p1.iter().all(|&x| x);
    CombinerReport { p1, realizations, failures, examples: walk.examples, pass }
}

struct Walk<'a> {
    st: &'a InterferenceStructure,
    heads: &'a [Matrix],
    orders: &'a [Vec<Vec<usize>>],
    failures: u128,
    examples: Vec<Vec<Vec<usize>>>,
    stop_early: bool,
    stopped: bool,
}

impl Walk<'_> {
    fn remaining(&self, from: usize) -> u128 {
        self.orders[from..].iter().map(|o| o.len() as u128).product()
    }

    fn record(&mut self, prefix: &[Vec<usize>], count: u128) {
        self.failures += count;
        if self.examples.len() < MAX_EXAMPLES {
            let mut ex = prefix.to_vec();
            for o in &self.orders[prefix.len()..] {
                ex.push(o[0].clone());
            }
            self.examples.push(ex);
        }
        if self.stop_early {
            self.stopped = true;
        }
    }

    fn visit(&mut self, level: usize, basis: EchelonBasis, prefix: &mut Vec<Vec<usize>>) {
        if self.stopped {
            return;
        }
        let n_servers = self.st.n_servers();
        let head = &self.heads[level];
        let block = &self.st.blocks[level];
        let f = self.st.field;
        if level + 1 == n_servers {
            // residual rows modulo the prefix basis, in coordinates of their span
            let residual: Vec<Vec<u32>> = (0..block.rows())
                .map(|i| {
                    let mut v = block.row(i).to_vec();
                    basis.reduce(&mut v);
                    v
                })
                .collect();
            let res = Matrix::from_row_vecs(f, block.cols(), &residual).expect("width");
            let span = res.row_basis();
            let r = head.rows();
            if span.rows() < r {
                let count = self.orders[level].len() as u128;
                self.record(prefix, count);
                return;
            }
            let coords = span.solve_left(&res).expect("rows lie in their span");
            for o in &self.orders[level] {
                let m = head.mul(&coords.select_rows(o)).expect("shapes");
                if m.rank() < r {
                    prefix.push(o.clone());
                    self.record(prefix, 1);
                    prefix.pop();
                    if self.stopped {
                        return;
                    }
                }
            }
            return;
        }
        for o in &self.orders[level] {
            let sent = head.mul(&block.select_rows(o)).expect("shapes");
            let mut next = basis.clone();
            let ok = (0..sent.rows()).all(|i| next.insert(sent.row(i).to_vec()));
            prefix.push(o.clone());
            if ok {
                self.visit(level + 1, next, prefix);
            } else {
                let count = self.remaining(level + 1);
                self.record(prefix, count);
            }
            prefix.pop();
            if self.stopped {
                return;
            }
        }
    }
}

/// Draws uniform combining matrices until one set passes [`verify_combiner`].
pub fn search_combiner(st: &InterferenceStructure, seed: u64, max_tries: usize) -> Result<CombinerSet> {
    if max_tries == 0 {
        return Err(Error::BadParams("max_tries must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    for attempt in 1..=max_tries {
        let matrices = st.blocks.iter().map(|b| sample_uniform(st.field, b.rows(), b.rows(), &mut rng)).collect();
        let set = CombinerSet { matrices, field: st.field, provenance: Provenance::Searched { seed, tries: attempt } };
        if verify_inner(&set, st, true).pass {
            return Ok(set);
        }
    }
    Err(Error::SearchExhausted { tries: max_tries })
}

/// Directly downloaded interference expressed in a reference symbol basis:
/// `basis` lists `(server, canonical row)` pairs, `orders` the sent row order per server.
pub fn interference_matrix(
    set: &CombinerSet,
    st: &InterferenceStructure,
    orders: &[Vec<usize>],
    basis: &[(usize, usize)],
) -> Result<Matrix> {
    let f = st.field;
    let cols = st.blocks[0].cols();
    let sym: Vec<Vec<u32>> = basis.iter().map(|&(n, r)| st.blocks[n].row(r).to_vec()).collect();
    let sym = Matrix::from_row_vecs(f, cols, &sym)?;
    if sym.rank() != sym.rows() {
        return Err(Error::BadParams("reference symbols are dependent".into()));
    }
    let mut parts = Vec::new();
    for n in 0..st.n_servers() {
        let head = set.matrices[n].row_range(0, st.direct[n]);
        parts.push(head.mul(&st.blocks[n].select_rows(&orders[n]))?);
    }
    let refs: Vec<&Matrix> = parts.iter().collect();
    let direct = Matrix::vstack(f, cols, &refs)?;
    sym.solve_left(&direct)
}

/// The four explicit combining matrices for the (2,4,2,2) counterexample at p = 349.
pub fn ctrex_reference_combiner(f: FieldPrime) -> CombinerSet {
    let m = |r: [[i64; 3]; 3]| Matrix::from_signed(f, &r);
    CombinerSet {
        matrices: vec![
            m([[1, 2, 3], [6, 5, 4], [0, 0, 1]]),
            m([[1, 7, 3], [11, 9, 8], [0, 0, 1]]),
            m([[1, 10, 8], [7, 5, 4], [0, 0, 1]]),
            m([[1, 3, 5], [12, 9, 3], [0, 0, 1]]),
        ],
        field: f,
        provenance: Provenance::Explicit,
    }
}

/// The realization used for the worked interference matrix of the counterexample.
pub fn ctrex_reference_orders() -> Vec<Vec<usize>> {
    vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 2, 0], vec![1, 2, 0]]
}

/// Reference symbols of the counterexample:
/// U0x, U6x, U0y, U9y, U1(x+y), U3(x+y), U2(x+2y), U4(x+2y).
pub fn ctrex_reference_basis() -> Vec<(usize, usize)> {
    vec![(0, 0), (0, 1), (1, 0), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2)]
}

// ---------------------------------------------------------------------------
// Spreading matrix for the general-T class.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PMatrix {
    pub n: usize,
    pub t: usize,
    /// `n (t-1) x t`; block `j` is rows `j (t-1) .. (j+1) (t-1)`.
    pub matrix: Matrix,
    /// Common vector of every `(t-1)`-subset of blocks.
    pub common: Vec<(Vec<usize>, Vec<u32>)>,
}

fn block(p: &Matrix, t: usize, j: usize) -> Matrix {
    p.row_range(j * (t - 1), (j + 1) * (t - 1))
}

/// The unique (first-nonzero-normalized) vector shared by the row spaces of
/// the blocks in `subset`, found from the left null space of the stacked
/// difference system.
pub fn common_vector(p: &Matrix, n: usize, t: usize, subset: &[usize]) -> Result<Vec<u32>> {
    let f = p.field();
    if t < 2 || p.rows() != n * (t - 1) || p.cols() != t {
        return Err(Error::ShapeMismatch(format!("P must be {}x{t}", n * (t - 1))));
    }
    if subset.len() != t - 1 || subset.iter().any(|&j| j >= n) {
        return Err(Error::BadParams(format!("subset {subset:?} must have {} blocks", t - 1)));
    }
    let name = || format!("{:?}", subset.iter().map(|j| j + 1).collect::<Vec<_>>());
    let h = t - 1;
    // columns: one block of t per constraint H_1 P_{j1} = H_{s+1} P_{j_{s+1}}
    let mut sys = Matrix::zeros(f, h * h, t * (h - 1));
    let first = block(p, t, subset[0]);
    for s in 0..h - 1 {
        let other = block(p, t, subset[s + 1]);
        for r in 0..h {
            for c in 0..t {
                sys.set(r, s * t + c, first.get(r, c));
                sys.set((s + 1) * h + r, s * t + c, f.neg(other.get(r, c)));
            }
        }
    }
    let left = sys.left_null_space();
    if left.rows() != 1 {
        return Err(Error::NotUnique(name()));
    }
    let coeff = left.select_cols(&(0..h).collect::<Vec<_>>());
    let m = coeff.mul(&first)?;
    let Some(lead) = m.data().iter().copied().find(|&x| x != 0) else {
        return Err(Error::NotUnique(name()));
    };
    Ok(m.scale(f.inv(lead).expect("nonzero")).data().to_vec())
}

/// Validates both properties and caches the common vectors.
pub fn check_p_matrix(p: &Matrix, n: usize, t: usize) -> Result<PMatrix> {
    if t < 2 || t > n || p.rows() != n * (t - 1) || p.cols() != t {
        return Err(Error::BadParams(format!("P shape for N={n}, T={t}")));
    }
    for j in 0..n {
        if block(p, t, j).rank() != t - 1 {
            return Err(Error::NotUnique(format!("block {} is rank deficient", j + 1)));
        }
    }
    let mut common = Vec::new();
    for s in k_subsets(n, t - 1) {
        let v = common_vector(p, n, t, &s)?;
        common.push((s, v));
    }
    let f = p.field();
    for s in k_subsets(n, t) {
        let rows: Vec<Vec<u32>> = (0..t)
            .map(|i| {
                let rest: Vec<usize> = s.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, &j)| j).collect();
                common.iter().find(|(k, _)| *k == rest).expect("cached").1.clone()
            })
            .collect();
        if Matrix::from_row_vecs(f, t, &rows)?.rank() != t {
            return Err(Error::BadParams(format!(
                "common vectors of {:?} are dependent",
                s.iter().map(|j| j + 1).collect::<Vec<_>>()
            )));
        }
    }
    Ok(PMatrix { n, t, matrix: p.clone(), common })
}

/// Uniform candidates until one passes [`check_p_matrix`].
pub fn build_p_matrix(n: usize, t: usize, field: FieldPrime, seed: u64, max_tries: usize) -> Result<PMatrix> {
    if max_tries == 0 {
        return Err(Error::BadParams("max_tries must be positive".into()));
    }
    if t < 2 || t >= n {
        return Err(Error::BadParams(format!("need 2 <= T < N (N={n}, T={t})")));
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..max_tries {
        let cand = sample_uniform(field, n * (t - 1), t, &mut rng);
        if let Ok(pm) = check_p_matrix(&cand, n, t) {
            return Ok(pm);
        }
    }
    Err(Error::SearchExhausted { tries: max_tries })
}

/// The explicit 8x3 matrix for N = 4, T = 3.
pub fn reference_p_matrix(f: FieldPrime) -> Matrix {
    Matrix::from_signed(f, &[[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1], [1, 2, 2]])
}
