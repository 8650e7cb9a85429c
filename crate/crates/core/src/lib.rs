//! Core of the coded-storage private retrieval lab: prime-field linear
//! algebra, storage codes, retrieval schemes and their verifiers.
#![no_std]

extern crate alloc;

pub mod capacity;
pub mod combiner;
pub mod error;
pub mod field;
pub mod matrix;
pub mod scheme;
pub mod seed;
pub mod session;
pub mod stats;
pub mod verify;
pub mod storage;

pub use error::{Error, Result};
pub use field::FieldPrime;
pub use matrix::Matrix;
