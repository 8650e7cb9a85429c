//! Dense matrices over a prime field.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::FieldPrime;

/// Row-major matrix of residues.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: FieldPrime,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

/// Output of [`Matrix::rref`]: `basis_change * m == rref`.
#[derive(Clone, Debug)]
pub struct Rref {
    pub rref: Matrix,
    pub basis_change: Matrix,
    pub pivots: Vec<usize>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(field: FieldPrime, rows: usize, cols: usize) -> Self {
        Matrix { field, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: FieldPrime, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % field.p();
        }
        m
    }

    /// Builds from residues; entries are reduced mod p.
    pub fn from_vec(field: FieldPrime, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} entries for {rows}x{cols}",
                data.len()
            )));
        }
        let data = data.into_iter().map(|x| x % field.p()).collect();
        Ok(Matrix { field, rows, cols, data })
    }

    /// Builds from signed integer rows. Panics on ragged input.
    pub fn from_signed<R: AsRef<[i64]>>(field: FieldPrime, rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r.iter().map(|&x| field.from_i64(x)));
        }
        Matrix { field, rows: rows.len(), cols, data }
    }

    pub fn row_vector(field: FieldPrime, v: &[u32]) -> Self {
        Matrix { field, rows: 1, cols: v.len(), data: v.iter().map(|x| x % field.p()).collect() }
    }

    pub fn column_vector(field: FieldPrime, v: &[u32]) -> Self {
        Matrix { field, rows: v.len(), cols: 1, data: v.iter().map(|x| x % field.p()).collect() }
    }

    #[inline]
    pub fn field(&self) -> FieldPrime {
        self.field
    }
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }
    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.field.p();
    }
    #[inline]
    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
    pub fn data(&self) -> &[u32] {
        &self.data
    }
    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    fn check_field(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.p(), other.field.p()));
        }
        Ok(())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.field.p() as u64;
        let mut out = Matrix::zeros(self.field, self.rows, other.cols);
        let mut acc = vec![0u64; other.cols];
        for r in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k] as u64;
                if a == 0 {
                    continue;
                }
                let orow = other.row(k);
                for (c, &b) in orow.iter().enumerate() {
                    // a, b < 2^31 so a*b < 2^62; reduce each step to stay in range
                    acc[c] = (acc[c] + a * b as u64) % p;
                }
            }
            for c in 0..other.cols {
                out.data[r * other.cols + c] = acc[c] as u32;
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{}x{} applied to length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let p = self.field.p() as u64;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(0u64, |acc, (&a, &b)| (acc + a as u64 * b as u64) % p) as u32
            })
            .collect())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::ShapeMismatch("add".into()));
        }
        let f = self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Ok(Matrix { field: f, rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: u32) -> Matrix {
        let f = self.field;
        Matrix { field: f, rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| f.mul(a, s)).collect() }
    }

    /// Stacks matrices vertically. All parts must share the column count.
    pub fn vstack(field: FieldPrime, cols: usize, parts: &[&Matrix]) -> Result<Matrix> {
        let mut data = Vec::new();
        let mut rows = 0;
        for m in parts {
            if m.field != field {
                return Err(Error::FieldMismatch(field.p(), m.field.p()));
            }
            if m.cols != cols {
                return Err(Error::ShapeMismatch(alloc::format!("vstack {} vs {}", m.cols, cols)));
            }
            data.extend_from_slice(&m.data);
            rows += m.rows;
        }
        Ok(Matrix { field, rows, cols, data })
    }

    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        self.check_field(other)?;
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch("hstack".into()));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(Matrix { field: self.field, rows: self.rows, cols, data })
    }

    pub fn block_diag(field: FieldPrime, parts: &[Matrix]) -> Matrix {
        let rows = parts.iter().map(|m| m.rows).sum();
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for m in parts {
            for r in 0..m.rows {
                for c in 0..m.cols {
                    out.data[(r0 + r) * cols + c0 + c] = m.get(r, c);
                }
            }
            r0 += m.rows;
            c0 += m.cols;
        }
        out
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix { field: self.field, rows: idx.len(), cols: self.cols, data }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.rows);
        for r in 0..self.rows {
            for &c in idx {
                data.push(self.get(r, c));
            }
        }
        Matrix { field: self.field, rows: self.rows, cols: idx.len(), data }
    }

    pub fn row_range(&self, start: usize, end: usize) -> Matrix {
        Matrix {
            field: self.field,
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    /// Builds from residue rows (reduced mod p); `cols` fixes the width for empty input.
    pub fn from_row_vecs(field: FieldPrime, cols: usize, rows: &[Vec<u32>]) -> Result<Matrix> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::ShapeMismatch(alloc::format!("row of length {} for width {cols}", r.len())));
            }
            data.extend(r.iter().map(|x| x % field.p()));
        }
        Ok(Matrix { field, rows: rows.len(), cols, data })
    }

    /// Gauss-Jordan form with pivots restricted to the first `limit` columns.
    pub fn echelon(&self, limit: usize) -> (Matrix, Vec<usize>) {
        eliminate(self.clone(), limit.min(self.cols))
    }

    /// Reduced row echelon form with the accumulated row operations.
    pub fn rref(&self) -> Rref {
        let aug = self.hstack(&Matrix::identity(self.field, self.rows)).expect("same field");
        let (red, pivots) = eliminate(aug, self.cols);
        let rref = red.select_cols(&(0..self.cols).collect::<Vec<_>>());
        let basis_change = red.select_cols(&(self.cols..self.cols + self.rows).collect::<Vec<_>>());
        Rref { rref, basis_change, pivots }
    }

    /// RREF without zero rows.
    pub fn row_basis(&self) -> Matrix {
        let (red, pivots) = eliminate(self.clone(), self.cols);
        red.row_range(0, pivots.len())
    }

    pub fn rank(&self) -> usize {
        eliminate(self.clone(), self.cols).1.len()
    }

    pub fn det(&self) -> Result<u32> {
        if self.rows != self.cols {
            return Err(Error::NonSquare { rows: self.rows, cols: self.cols });
        }
        let f = self.field;
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = 1 % f.p();
        for c in 0..n {
            let Some(piv) = (c..n).find(|&r| a[r * n + c] != 0) else {
                return Ok(0);
            };
            if piv != c {
                for k in 0..n {
                    a.swap(piv * n + k, c * n + k);
                }
                det = f.neg(det);
            }
            let pv = a[c * n + c];
            det = f.mul(det, pv);
            let inv = f.inv(pv).expect("nonzero pivot");
            for r in c + 1..n {
                let factor = f.mul(a[r * n + c], inv);
                if factor == 0 {
                    continue;
                }
                let nf = (f.p() - factor) as u64;
                for k in c..n {
                    a[r * n + k] = ((a[r * n + k] as u64 + nf * a[c * n + k] as u64) % f.p() as u64) as u32;
                }
            }
        }
        Ok(det)
    }

    pub fn invert(&self) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::NonSquare { rows: self.rows, cols: self.cols });
        }
        let r = self.rref();
        if r.pivots.len() < self.rows {
            return Err(Error::Singular);
        }
        Ok(r.basis_change)
    }

    /// Basis (as rows) of `{x : self * x = 0}`, one vector per free column in increasing order.
    pub fn null_space(&self) -> Matrix {
        let (red, pivots) = eliminate(self.clone(), self.cols);
        let f = self.field;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Matrix::zeros(f, free.len(), self.cols);
        for (i, &fc) in free.iter().enumerate() {
            out.set(i, fc, 1);
            for (pr, &pc) in pivots.iter().enumerate() {
                out.set(i, pc, f.neg(red.get(pr, fc)));
            }
        }
        out
    }

    /// Basis (as rows) of `{y : y * self = 0}`.
    pub fn left_null_space(&self) -> Matrix {
        self.transpose().null_space()
    }

    /// Unique `x` with `self * x = b` (columns of `b` solved independently).
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        if b.rows != self.rows {
            return Err(Error::ShapeMismatch("solve".into()));
        }
        let aug = self.hstack(b)?;
        let (red, pivots) = eliminate(aug, self.cols);
        if pivots.len() < self.cols {
            return Err(Error::Singular);
        }
        // consistency: rows past the rank must be zero on the right-hand side
        for r in pivots.len()..self.rows {
            if (self.cols..self.cols + b.cols).any(|c| red.get(r, c) != 0) {
                return Err(Error::Singular);
            }
        }
        let mut x = Matrix::zeros(self.field, self.cols, b.cols);
        for (r, &pc) in pivots.iter().enumerate() {
            for c in 0..b.cols {
                x.set(pc, c, red.get(r, self.cols + c));
            }
        }
        Ok(x)
    }

    /// Unique `x` with `x * self = b`.
    pub fn solve_left(&self, b: &Matrix) -> Result<Matrix> {
        Ok(self.transpose().solve(&b.transpose())?.transpose())
    }

    /// Whether every row of `other` lies in the row space of `self`.
    pub fn spans(&self, other: &Matrix) -> bool {
        let r = self.rank();
        Matrix::vstack(self.field, self.cols, &[self, other]).map(|s| s.rank() == r).unwrap_or(false)
    }
}

/// Gauss-Jordan on `m`, choosing pivots only in columns `< limit`. Returns the
/// reduced matrix and pivot columns; pivot rows come first.
fn eliminate(mut m: Matrix, limit: usize) -> (Matrix, Vec<usize>) {
    let f = m.field;
    let p = f.p() as u64;
    let (rows, cols) = (m.rows, m.cols);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..limit {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| m.data[i * cols + c] != 0) else {
            continue;
        };
        if piv != r {
            for k in 0..cols {
                m.data.swap(piv * cols + k, r * cols + k);
            }
        }
        let inv = f.inv(m.data[r * cols + c]).expect("nonzero pivot") as u64;
        for k in c..cols {
            m.data[r * cols + k] = (m.data[r * cols + k] as u64 * inv % p) as u32;
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let factor = m.data[i * cols + c];
            if factor == 0 {
                continue;
            }
            let nf = p - factor as u64;
            for k in c..cols {
                let v = m.data[r * cols + k];
                if v != 0 {
                    m.data[i * cols + k] = ((m.data[i * cols + k] as u64 + nf * v as u64) % p) as u32;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (m, pivots)
}

/// Rank of a matrix.
/// Incremental echelon basis; rows are reduced in insertion order.
#[derive(Clone)]
pub struct EchelonBasis {
    field: FieldPrime,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn new(field: FieldPrime) -> Self {
        EchelonBasis { field, rows: Vec::new(), pivots: Vec::new() }
    }

    /// Reduces `v` against the basis in place.
    pub fn reduce(&self, v: &mut [u32]) {
        let f = self.field;
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let c = v[pc];
            if c != 0 {
                let nc = f.neg(c);
                for (x, &y) in v.iter_mut().zip(row) {
                    if y != 0 {
                        *x = f.add(*x, f.mul(nc, y));
                    }
                }
            }
        }
    }

    /// Adds `v` if independent; returns whether it was.
    pub fn insert(&mut self, mut v: Vec<u32>) -> bool {
        self.reduce(&mut v);
        let Some(pc) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = self.field.inv(v[pc]).expect("nonzero");
        for x in v.iter_mut() {
            *x = self.field.mul(*x, inv);
        }
        self.rows.push(v);
        self.pivots.push(pc);
        true
    }
}

impl EchelonBasis {
    pub fn len(&self) -> usize {
        self.rows.len()
    }
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }
}

pub fn mat_rank(m: &Matrix) -> usize {
    m.rank()
}

/// Basis of `rowspace(a) ∩ rowspace(b)`, in RREF.
pub fn row_space_intersect(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.cols {
        return Err(Error::ShapeMismatch("row_space_intersect".into()));
    }
    let stack = Matrix::vstack(a.field, a.cols, &[a, b])?;
    let left = stack.left_null_space();
    let coeff_a = left.select_cols(&(0..a.rows).collect::<Vec<_>>());
    let v = coeff_a.mul(a)?;
    Ok(v.row_basis())
}

/// Uniform `rows x cols` matrix of rank `min(rows, cols)`, by rejection.
pub fn sample_full_rank_rect<R: Rng + ?Sized>(field: FieldPrime, rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let target = rows.min(cols);
    loop {
        let data = (0..rows * cols).map(|_| rng.gen_range(0..field.p())).collect();
        let m = Matrix { field, rows, cols, data };
        if m.rank() == target {
            return m;
        }
    }
}

/// Uniform element of GL(n, p).
pub fn sample_full_rank<R: Rng + ?Sized>(n: usize, field: FieldPrime, rng: &mut R) -> Matrix {
    sample_full_rank_rect(field, n, n, rng)
}

/// Uniform `rows x cols` matrix.
pub fn sample_uniform<R: Rng + ?Sized>(field: FieldPrime, rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.gen_range(0..field.p())).collect();
    Matrix { field, rows, cols, data }
}
