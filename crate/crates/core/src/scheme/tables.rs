//! Enumerated query tables over small fields.

use alloc::vec;
use alloc::vec::Vec;

use super::query::{TableOp, TableQuery};
use crate::error::Result;
use crate::field::FieldPrime;
use crate::matrix::Matrix;
use crate::storage::StorageCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableKind {
    /// Three servers over F_2, 16 rows.
    Binary3,
    /// Four servers over F_13, 64 rows.
    Ternary4,
}

/// `entries[f][theta][server]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableSpec {
    pub kind: TableKind,
    pub entries: Vec<[Vec<TableQuery>; 2]>,
}

const PAIR_LOW: [usize; 2] = [0, 1];
const PAIR_HIGH: [usize; 2] = [2, 3];

// Server-3 entry for theta = 1 per row: (alpha pair high?, beta pair high?).
// The theta = 2 entry flips both pairs.
const BINARY3_THETA1: [(bool, bool); 16] = [
    (true, false),
    (false, false),
    (true, true),
    (false, true),
    (false, false),
    (true, false),
    (false, true),
    (true, true),
    (true, true),
    (false, true),
    (true, false),
    (false, false),
    (false, true),
    (true, true),
    (false, false),
    (true, false),
];

// (i1, i2, i3) with i1 in {1,2}, i2 in {3,4}, i3 in {1,2}  ->  (i4, i4').
const TERNARY4_MAP: [((u8, u8, u8), (u8, u8)); 8] = [
    ((1, 3, 1), (4, 3)),
    ((1, 3, 2), (3, 4)),
    ((1, 4, 1), (3, 4)),
    ((1, 4, 2), (4, 3)),
    ((2, 3, 1), (3, 4)),
    ((2, 3, 2), (4, 3)),
    ((2, 4, 1), (4, 3)),
    ((2, 4, 2), (3, 4)),
];

fn ternary_lookup(a: u8, b: u8, c: u8) -> (u8, u8) {
    TERNARY4_MAP.iter().find(|(k, _)| *k == (a, b, c)).expect("complete map").1
}

fn pair(high: bool) -> Vec<usize> {
    if high {
        PAIR_HIGH.to_vec()
    } else {
        PAIR_LOW.to_vec()
    }
}

fn direct(x: Vec<usize>, y: Vec<usize>) -> TableQuery {
    TableQuery { op: TableOp::Direct, x, y }
}

impl TableSpec {
    pub fn binary3() -> Self {
        let mut entries = Vec::with_capacity(16);
        for f in 0..16usize {
            let w = f % 4;
            let g = f / 4;
            // server 1: a1 with a2|a3, b1 with b2|b3
            let s1 = direct(vec![0, 1 + (w & 1)], vec![0, 1 + (w >> 1)]);
            // server 2: a4 with a5|a6, b4 with b5|b6
            let s2 = direct(vec![0, 1 + (g & 1)], vec![0, 1 + (g >> 1)]);
            let (ah, bh) = BINARY3_THETA1[f];
            let s3 = |ah: bool, bh: bool| TableQuery { op: TableOp::MixL3, x: pair(ah), y: pair(bh) };
            entries.push([
                vec![s1.clone(), s2.clone(), s3(ah, bh)],
                vec![s1, s2, s3(!ah, !bh)],
            ]);
        }
        TableSpec { kind: TableKind::Binary3, entries }
    }

    pub fn ternary4() -> Self {
        let mut entries = Vec::with_capacity(64);
        for f in 0..64usize {
            let bit = |k: usize| ((f >> k) & 1) as u8;
            let (i1, j1, i2, j2, i3, j3) = (1 + bit(0), 1 + bit(1), 3 + bit(2), 3 + bit(3), 1 + bit(4), 1 + bit(5));
            let (i4, i4p) = ternary_lookup(i1, i2, i3);
            // the j rule is the i rule with the two outputs exchanged
            let (j4p, j4) = ternary_lookup(j1, j2, j3);
            let s1 = direct(vec![(i1 - 1) as usize], vec![(j1 - 1) as usize]);
            let s2 = direct(vec![(i2 - 3) as usize], vec![(j2 - 3) as usize]);
            let s3 = direct(vec![(i3 - 1) as usize], vec![(j3 - 1) as usize]);
            let s4 = |i: u8, j: u8| TableQuery { op: TableOp::Sum, x: vec![(i - 3) as usize], y: vec![(j - 3) as usize] };
            entries.push([
                vec![s1.clone(), s2.clone(), s3.clone(), s4(i4, j4)],
                vec![s1, s2, s3, s4(i4p, j4p)],
            ]);
        }
        TableSpec { kind: TableKind::Ternary4, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_servers(&self) -> usize {
        self.entries[0][0].len()
    }

    pub fn download_per_server(&self) -> Vec<usize> {
        self.entries[0][0].iter().map(|q| q.download_len()).collect()
    }

    /// Perturbs the theta = 2 entry of the last server in the first row.
    pub fn mutated(&self) -> Self {
        let mut out = self.clone();
        let last = out.n_servers() - 1;
        let donor = out.entries[1][1][last].clone();
        out.entries[0][1][last] = donor;
        out
    }

    pub fn code(kind: TableKind, field: FieldPrime) -> Result<StorageCode> {
        match kind {
            TableKind::Binary3 => {
                let id = Matrix::identity(field, 3);
                let z = Matrix::zeros(field, 3, 3);
                let c1 = Matrix::from_signed(field, &[[1, 1, 0], [1, 0, 1], [0, 1, 0]]);
                let c2 = Matrix::from_signed(field, &[[0, 1, 0], [0, 0, 1], [1, 0, 1]]);
                StorageCode::from_blocks(field, 3, &[vec![id.clone(), z.clone()], vec![z, id], vec![c1, c2]])
            }
            TableKind::Ternary4 => {
                let id = Matrix::identity(field, 2);
                let z = Matrix::zeros(field, 2, 2);
                let m = |r: [[i64; 2]; 2]| Matrix::from_signed(field, &r);
                StorageCode::from_blocks(
                    field,
                    2,
                    &[
                        vec![id.clone(), z.clone()],
                        vec![z, id],
                        vec![m([[3, 2], [2, 3]]), m([[4, 1], [1, 4]])],
                        vec![m([[3, 12], [12, 3]]), m([[4, 6], [6, 4]])],
                    ],
                )
            }
        }
    }
}
