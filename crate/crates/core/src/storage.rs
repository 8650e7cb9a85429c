//! Linear storage codes: every server keeps one coded share of each message.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::FieldPrime;
use crate::matrix::Matrix;

/// An `n_servers x k_c` generator whose entries are `sub x sub` coefficient
/// blocks (`sub = 1` for ordinary scalar codes).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StorageCode {
    field: FieldPrime,
    n_servers: usize,
    k_c: usize,
    sub: usize,
    /// Per server, a `sub x (k_c * sub)` row of coefficient blocks.
    gen: Vec<Matrix>,
}

/// Shares of one message, indexed by server.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareSet {
    pub shares: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdsReport {
    /// Every `k_c`-subset (0-based servers) with its verdict.
    pub subsets: Vec<(Vec<usize>, bool)>,
    pub passed: bool,
}

impl StorageCode {
    /// Scalar code from signed generator rows.
    pub fn from_rows<R: AsRef<[i64]>>(field: FieldPrime, rows: &[R]) -> Result<Self> {
        let k_c = rows.first().map_or(0, |r| r.as_ref().len());
        if k_c == 0 || rows.iter().any(|r| r.as_ref().len() != k_c) {
            return Err(Error::BadParams("generator rows must be non-empty and equal length".into()));
        }
        let gen = rows.iter().map(|r| Matrix::from_signed(field, &[r.as_ref()])).collect();
        Ok(StorageCode { field, n_servers: rows.len(), k_c, sub: 1, gen })
    }

    /// Block code: `blocks[n][j]` is the coefficient block of server `n` on message block `j`.
    pub fn from_blocks(field: FieldPrime, sub: usize, blocks: &[Vec<Matrix>]) -> Result<Self> {
        let k_c = blocks.first().map_or(0, |r| r.len());
        let mut gen = Vec::with_capacity(blocks.len());
        for row in blocks {
            if row.len() != k_c || row.iter().any(|b| b.rows() != sub || b.cols() != sub) {
                return Err(Error::BadParams("coefficient blocks must be sub x sub".into()));
            }
            let mut g = row[0].clone();
            for b in &row[1..] {
                g = g.hstack(b)?;
            }
            gen.push(g);
        }
        Ok(StorageCode { field, n_servers: blocks.len(), k_c, sub, gen })
    }

    /// Systematic code on `k_c` servers plus one server storing the sum.
    pub fn parity(field: FieldPrime, k_c: usize) -> Self {
        let mut rows: Vec<Vec<i64>> = (0..k_c)
            .map(|i| (0..k_c).map(|j| (i == j) as i64).collect())
            .collect();
        rows.push(vec![1; k_c]);
        Self::from_rows(field, &rows).expect("well-formed")
    }

    pub fn field(&self) -> FieldPrime {
        self.field
    }
    pub fn n_servers(&self) -> usize {
        self.n_servers
    }
    pub fn k_c(&self) -> usize {
        self.k_c
    }
    pub fn sub_len(&self) -> usize {
        self.sub
    }
    pub fn generator_row(&self, n: usize) -> &Matrix {
        &self.gen[n]
    }

    /// Smallest message length unit.
    pub fn granularity(&self) -> usize {
        self.k_c * self.sub
    }

    pub fn share_len(&self, msg_len: usize) -> Result<usize> {
        if msg_len == 0 || !msg_len.is_multiple_of(self.granularity()) {
            return Err(Error::LengthNotDivisible { len: msg_len, by: self.granularity() });
        }
        Ok(msg_len / self.k_c)
    }

    /// The `(msg_len / k_c) x msg_len` map taking a message to server `n`'s share.
    ///
    /// The message is `k_c` consecutive blocks; inside a block, position
    /// `i * r + t` is chunk `i` of the coefficient block, `r = block / sub`.
    pub fn share_map(&self, n: usize, msg_len: usize) -> Result<Matrix> {
        let b = self.share_len(msg_len)?;
        let r = b / self.sub;
        let g = &self.gen[n];
        let mut m = Matrix::zeros(self.field, b, msg_len);
        for i in 0..self.sub {
            for j in 0..self.k_c {
                for i2 in 0..self.sub {
                    let c = g.get(i, j * self.sub + i2);
                    if c == 0 {
                        continue;
                    }
                    for t in 0..r {
                        m.set(i * r + t, j * b + i2 * r + t, c);
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn encode(&self, message: &[u32]) -> Result<ShareSet> {
        let mut shares = Vec::with_capacity(self.n_servers);
        for n in 0..self.n_servers {
            shares.push(self.share_map(n, message.len())?.apply(message)?);
        }
        Ok(ShareSet { shares })
    }

    /// Checks every `k_c`-subset of servers for invertibility.
    pub fn check_mds(&self) -> MdsReport {
        let mut subsets = Vec::new();
        for s in k_subsets(self.n_servers, self.k_c) {
            let parts: Vec<&Matrix> = s.iter().map(|&n| &self.gen[n]).collect();
            let stacked = Matrix::vstack(self.field, self.granularity(), &parts).expect("same shape");
            let ok = stacked.rank() == self.granularity();
            subsets.push((s, ok));
        }
        let passed = subsets.iter().all(|(_, ok)| *ok);
        MdsReport { subsets, passed }
    }

    /// Rebuilds a message from exactly `k_c` shares from distinct servers.
    pub fn reconstruct(&self, shares: &[(usize, Vec<u32>)]) -> Result<Vec<u32>> {
        if shares.len() != self.k_c {
            return Err(Error::BadShareSet(format!("need {} shares, got {}", self.k_c, shares.len())));
        }
        let mut seen = Vec::new();
        for (n, _) in shares {
            if *n >= self.n_servers {
                return Err(Error::BadShareSet(format!("no server {n}")));
            }
            if seen.contains(n) {
                return Err(Error::BadShareSet(format!("duplicate server {n}")));
            }
            seen.push(*n);
        }
        let b = shares[0].1.len();
        if shares.iter().any(|(_, s)| s.len() != b) {
            return Err(Error::BadShareSet("share lengths differ".into()));
        }
        let msg_len = b * self.k_c;
        let mut maps = Vec::new();
        let mut rhs = Vec::new();
        for (n, s) in shares {
            maps.push(self.share_map(*n, msg_len)?);
            rhs.extend_from_slice(s);
        }
        let refs: Vec<&Matrix> = maps.iter().collect();
        let a = Matrix::vstack(self.field, msg_len, &refs)?;
        let x = a
            .solve(&Matrix::column_vector(self.field, &rhs))
            .map_err(|_| Error::BadShareSet("servers do not form an information set".into()))?;
        Ok(x.data().to_vec())
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
