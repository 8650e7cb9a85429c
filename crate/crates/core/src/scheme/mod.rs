//! Retrieval schemes: query generation, server answers and decoding.

mod answer;
mod catalog;
mod decode;
mod query;
mod tables;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

pub use answer::{answer_all, download_map, server_answer, AnswerSet};
pub use catalog::canonical_undesired_rows;
pub use decode::{decode, decode_generic};
pub use query::{gen_queries, gen_queries_with_index, Payload, QueryForm, QueryPlan, Secret, TableOp, TableQuery};
pub use tables::TableSpec;

use crate::capacity::Rational;
use crate::combiner::{CombinerSet, PMatrix};
use crate::error::{Error, Result};
use crate::field::FieldPrime;
use crate::matrix::Matrix;
use crate::storage::StorageCode;

/// Registered scheme identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    Ctrex2422,
    ClassT2 { n: u32 },
    ClassTgen { n: u32, t: u32 },
    Tab2322,
    Tab2432,
    Cyclic2422,
    Disjoint2423,
    Ex1Restricted,
    Ex2Restricted,
    BaselineDownloadAll { k: u32 },
}

impl SchemeId {
    /// Parses `ctrex-2422`, `class-t2(4)`, `class-tgen(4,3)`, `baseline-download-all(2)`, ...
    /// Parameterized ids without parentheses take `n`/`t` defaults of 4 and 3.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(i) if s.ends_with(')') => (&s[..i], Some(&s[i + 1..s.len() - 1])),
            Some(_) => return Err(Error::UnknownScheme(s.to_string())),
            None => (s, None),
        };
        let nums: Vec<u32> = match args {
            Some(a) => a
                .split(',')
                .map(|x| x.trim().parse::<u32>().map_err(|_| Error::UnknownScheme(s.to_string())))
                .collect::<Result<_>>()?,
            None => Vec::new(),
        };
        let id = match (name, nums.as_slice()) {
            ("ctrex-2422", []) => SchemeId::Ctrex2422,
            ("class-t2", []) => SchemeId::ClassT2 { n: 4 },
            ("class-t2", [n]) => SchemeId::ClassT2 { n: *n },
            ("class-tgen", []) => SchemeId::ClassTgen { n: 4, t: 3 },
            ("class-tgen", [n, t]) => SchemeId::ClassTgen { n: *n, t: *t },
            ("tab-2322", []) => SchemeId::Tab2322,
            ("tab-2432", []) => SchemeId::Tab2432,
            ("cyclic-2422", []) => SchemeId::Cyclic2422,
            ("disjoint-2423", []) => SchemeId::Disjoint2423,
            ("ex1-restricted", []) => SchemeId::Ex1Restricted,
            ("ex2-restricted", []) => SchemeId::Ex2Restricted,
            ("baseline-download-all", []) => SchemeId::BaselineDownloadAll { k: 2 },
            ("baseline-download-all", [k]) => SchemeId::BaselineDownloadAll { k: *k },
            _ => return Err(Error::UnknownScheme(s.to_string())),
        };
        Ok(id)
    }

    pub fn all_defaults() -> Vec<SchemeId> {
        alloc::vec![
            SchemeId::Ctrex2422,
            SchemeId::ClassT2 { n: 4 },
            SchemeId::ClassTgen { n: 4, t: 3 },
            SchemeId::Tab2322,
            SchemeId::Tab2432,
            SchemeId::Cyclic2422,
            SchemeId::Disjoint2423,
            SchemeId::Ex1Restricted,
            SchemeId::Ex2Restricted,
            SchemeId::BaselineDownloadAll { k: 2 },
        ]
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeId::Ctrex2422 => write!(f, "ctrex-2422"),
            SchemeId::ClassT2 { n } => write!(f, "class-t2({n})"),
            SchemeId::ClassTgen { n, t } => write!(f, "class-tgen({n},{t})"),
            SchemeId::Tab2322 => write!(f, "tab-2322"),
            SchemeId::Tab2432 => write!(f, "tab-2432"),
            SchemeId::Cyclic2422 => write!(f, "cyclic-2422"),
            SchemeId::Disjoint2423 => write!(f, "disjoint-2423"),
            SchemeId::Ex1Restricted => write!(f, "ex1-restricted"),
            SchemeId::Ex2Restricted => write!(f, "ex2-restricted"),
            SchemeId::BaselineDownloadAll { k } => write!(f, "baseline-download-all({k})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorModel {
    ZeroError,
    EpsilonError,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeParams {
    pub k: usize,
    pub n: usize,
    pub t: usize,
    pub k_c: usize,
    /// Message length of one session (base length times replicas).
    pub l: usize,
    pub replicas: usize,
    pub field: FieldPrime,
    /// 0-based server sets the scheme must protect against.
    pub collusion_sets: Vec<Vec<usize>>,
}

/// Query-vector layout for the interference-aligned constructions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Aligned {
    /// Share length of one replica.
    pub share_len: usize,
    /// Shape of the desired-side secret matrix (rows x share_len).
    pub v_rows: usize,
    /// Shape of the undesired-side secret matrix.
    pub u_rows: usize,
    /// Per server, coefficients (over secret rows) of the desired query vectors.
    pub desired: Vec<Matrix>,
    /// Per server, coefficients of the undesired query vectors.
    pub undesired: Vec<Matrix>,
    pub form: QueryForm,
    /// Directly downloaded rows per server, per message, across replicas.
    pub direct: Vec<usize>,
    /// Interference dimension of one replica.
    pub interference_dim: usize,
    /// Per server, canonical undesired rows forming the reference symbol basis.
    pub basis: Vec<Vec<usize>>,
    pub per_session_combiner: bool,
}

impl Aligned {
    /// Projected rows per server per message (replicas included).
    pub fn rows_per_server(&self, replicas: usize) -> Vec<usize> {
        self.desired.iter().map(|d| d.rows() * replicas).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Construction {
    Aligned(Aligned),
    Table(TableSpec),
    /// Full shares from the first `k_c` servers.
    Baseline,
}

/// How the registry obtains a fixed combiner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombinerChoice {
    /// Explicit matrices when available at this prime, else a seeded search.
    Default,
    Search { seed: u64, max_tries: usize },
    /// Build without a combiner (query-only uses such as privacy checks).
    Skip,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Overrides {
    pub prime: Option<u32>,
    pub combiner: CombinerChoice,
}

impl Default for Overrides {
    fn default() -> Self {
        Overrides { prime: None, combiner: CombinerChoice::Default }
    }
}

impl Overrides {
    pub fn with_prime(p: u32) -> Self {
        Overrides { prime: Some(p), ..Default::default() }
    }
    pub fn queries_only(p: Option<u32>) -> Self {
        Overrides { prime: p, combiner: CombinerChoice::Skip }
    }
}

pub const DEFAULT_COMBINER_SEED: u64 = 0x5EED_C0DE;
pub const DEFAULT_SEARCH_TRIES: usize = 64;

#[derive(Clone, Debug)]
pub struct SchemeInstance {
    pub id: SchemeId,
    pub params: SchemeParams,
    pub code: StorageCode,
    pub declared_rate: Rational,
    pub error_model: ErrorModel,
    pub construction: Construction,
    /// Fixed combiner for aligned schemes that do not draw one per session.
    pub combiner: Option<CombinerSet>,
    pub pmatrix: Option<PMatrix>,
}

impl SchemeInstance {
    pub fn aligned(&self) -> Option<&Aligned> {
        match &self.construction {
            Construction::Aligned(a) => Some(a),
            _ => None,
        }
    }

    pub fn table(&self) -> Option<&TableSpec> {
        match &self.construction {
            Construction::Table(t) => Some(t),
            _ => None,
        }
    }

    /// Downloaded symbols per server in one session.
    pub fn download_per_server(&self) -> Vec<usize> {
        let p = &self.params;
        match &self.construction {
            Construction::Aligned(a) => a
                .rows_per_server(p.replicas)
                .iter()
                .zip(&a.direct)
                .map(|(&m, &r)| m + (p.k - 1) * r)
                .collect(),
            Construction::Table(t) => t.download_per_server(),
            Construction::Baseline => {
                let b = p.l / p.k_c;
                (0..p.n).map(|n| if n < p.k_c { b * p.k } else { 0 }).collect()
            }
        }
    }

    pub fn download_total(&self) -> usize {
        self.download_per_server().iter().sum()
    }

    /// Total interference dimension of a session, for aligned schemes.
    pub fn interference_dim(&self) -> Option<usize> {
        self.aligned().map(|a| a.interference_dim * self.params.replicas)
    }

    /// A copy whose table has one entry perturbed (privacy control).
    pub fn with_mutated_table(&self) -> Result<SchemeInstance> {
        let t = self.table().ok_or(Error::NotEnumerable)?;
        let mut out = self.clone();
        out.construction = Construction::Table(t.mutated());
        Ok(out)
    }
}

pub fn declared_rate(s: &SchemeInstance) -> Rational {
    s.declared_rate.clone()
}

/// Builds a registered scheme, with an optional prime override.
pub fn registry_build(id: SchemeId, overrides: &Overrides) -> Result<SchemeInstance> {
    catalog::build(id, overrides)
}

pub fn registry_build_str(id: &str, overrides: &Overrides) -> Result<SchemeInstance> {
    registry_build(SchemeId::parse(id)?, overrides)
}

pub(crate) fn bad(msg: impl Into<String>) -> Error {
    Error::BadParams(msg.into())
}

pub(crate) fn shape(msg: &str, a: usize, b: usize) -> Error {
    Error::ShapeMismatch(format!("{msg}: {a} vs {b}"))
}
