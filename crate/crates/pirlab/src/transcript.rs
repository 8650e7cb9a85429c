//! Versioned JSON transcripts.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use pirlab_core::combiner::Provenance;
use pirlab_core::scheme::{Payload, QueryForm, SchemeId, TableOp, TableQuery};
use pirlab_core::session;
use pirlab_core::{FieldPrime, Matrix};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum TranscriptError {
    #[error("i/o error: {0}")]
    Io(String),
    #[error("schema version {found}, expected {expected}")]
    SchemaVersionMismatch { found: u32, expected: u32 },
}

impl From<std::io::Error> for TranscriptError {
    fn from(e: std::io::Error) -> Self {
        TranscriptError::Io(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u32>,
}

impl MatrixRecord {
    pub fn from_matrix(m: &Matrix) -> Self {
        MatrixRecord { rows: m.rows(), cols: m.cols(), data: m.data().to_vec() }
    }

    pub fn to_matrix(&self, f: FieldPrime) -> Result<Matrix, pirlab_core::Error> {
        Matrix::from_vec(f, self.rows, self.cols, self.data.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QueryRecord {
    Linear {
        form: String,
        /// `parts[message][replica]`.
        parts: Vec<Vec<MatrixRecord>>,
        combiner: Option<MatrixRecord>,
    },
    Table {
        op: String,
        x: Vec<usize>,
        y: Vec<usize>,
    },
}

impl QueryRecord {
    pub fn from_payload(p: &Payload) -> Self {
        match p {
            Payload::Linear { form, parts, combiner } => QueryRecord::Linear {
                form: match form {
                    QueryForm::Ordered => "ordered",
                    QueryForm::Space => "space",
                }
                .to_string(),
                parts: parts.iter().map(|r| r.iter().map(MatrixRecord::from_matrix).collect()).collect(),
                combiner: combiner.as_ref().map(MatrixRecord::from_matrix),
            },
            Payload::Table(TableQuery { op, x, y }) => QueryRecord::Table {
                op: match op {
                    TableOp::Direct => "direct",
                    TableOp::MixL3 => "mix3",
                    TableOp::Sum => "sum",
                }
                .to_string(),
                x: x.clone(),
                y: y.clone(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decoded {
    Ok(Vec<u32>),
    Error(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsRecord {
    pub upload: usize,
    pub download: usize,
    pub download_per_server: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProvenanceRecord {
    Explicit,
    Searched { seed: u64, tries: usize },
    RandomPerSession,
}

impl From<Provenance> for ProvenanceRecord {
    fn from(p: Provenance) -> Self {
        match p {
            Provenance::Explicit => ProvenanceRecord::Explicit,
            Provenance::Searched { seed, tries } => ProvenanceRecord::Searched { seed, tries },
            Provenance::RandomPerSession => ProvenanceRecord::RandomPerSession,
        }
    }
}

/// On-disk transcript. `theta` is 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub version: u32,
    pub scheme: String,
    pub p: u32,
    pub seed: Option<u64>,
    pub theta: usize,
    pub queries: Vec<QueryRecord>,
    pub answers: Vec<Vec<u32>>,
    /// `stored[message][server]`.
    pub stored: Vec<Vec<Vec<u32>>>,
    pub decoded: Decoded,
    pub counts: CountsRecord,
    pub provenance: Option<ProvenanceRecord>,
}

impl Transcript {
    pub fn from_session(t: &session::Transcript) -> Self {
        Transcript {
            version: SCHEMA_VERSION,
            scheme: t.scheme.to_string(),
            p: t.p,
            seed: t.seed,
            theta: t.theta + 1,
            queries: t.queries.iter().map(QueryRecord::from_payload).collect(),
            answers: t.answers.clone(),
            stored: t.stored.iter().map(|s| s.shares.clone()).collect(),
            decoded: match &t.decoded {
                Ok(v) => Decoded::Ok(v.clone()),
                Err(e) => Decoded::Error(e.to_string()),
            },
            counts: CountsRecord {
                upload: t.counts.upload,
                download: t.counts.download,
                download_per_server: t.counts.download_per_server.clone(),
            },
            provenance: t.provenance.map(ProvenanceRecord::from),
        }
    }

    pub fn scheme_id(&self) -> Result<SchemeId, pirlab_core::Error> {
        SchemeId::parse(&self.scheme)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, TranscriptError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| TranscriptError::Io(e.to_string()))?;
        let found = value.get("version").and_then(|v| v.as_u64()).ok_or_else(|| TranscriptError::Io("missing version".into()))?;
        if found != SCHEMA_VERSION as u64 {
            return Err(TranscriptError::SchemaVersionMismatch { found: found as u32, expected: SCHEMA_VERSION });
        }
        serde_json::from_value(value).map_err(|e| TranscriptError::Io(e.to_string()))
    }
}

pub fn save_transcript(t: &Transcript, path: &Path) -> Result<(), TranscriptError> {
    fs::write(path, t.to_json())?;
    Ok(())
}

pub fn load_transcript(path: &Path) -> Result<Transcript, TranscriptError> {
    let text = fs::read_to_string(path)?;
    Transcript::from_json(&text)
}
