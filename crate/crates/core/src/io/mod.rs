//! JSON file formats: corpus, participant responses, conditional tables and
//! evaluation reports. Every file carries `"format_version": 1`.
//!
//! Parsers reject malformed input instead of repairing it. Writers are
//! deterministic: struct field order, canonical row order and shortest
//! round-trip float formatting, pretty-printed with a trailing LF.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::ids::{DialogueId, ObjectId, UtteranceIndex};

pub mod corpus;
pub mod report;
pub mod responses;
pub mod table;

pub use corpus::{
    parse_corpus, write_corpus, Dialogue, DialogueCorpus, Mention, MentionRole, Utterance,
};
pub use report::{parse_report, write_report};
pub use responses::{parse_responses, write_responses, ResponsesFile};
pub use table::{read_table, write_table};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("dangling reference at {path}: unknown {what}")]
    DanglingReference { path: String, what: String },
    #[error("duplicate {kind} id {id:?}")]
    DuplicateId { kind: &'static str, id: String },
    #[error("object {object} mentioned twice in {dialogue} utterance {utterance}")]
    DuplicateMention {
        dialogue: DialogueId,
        utterance: UtteranceIndex,
        object: ObjectId,
    },
    #[error("dialogue {dialogue}: expected utterance index {expected}, found {found}")]
    NonContiguousIndex {
        dialogue: DialogueId,
        expected: u32,
        found: u32,
    },
    #[error("response {index}: prefix_len {prefix_len} exceeds dialogue {dialogue} length {len}")]
    PrefixOutOfRange {
        index: usize,
        dialogue: DialogueId,
        prefix_len: u32,
        len: u32,
    },
    #[error("response {index}: object {object} clicked twice in q2")]
    DuplicateClick { index: usize, object: ObjectId },
    #[error("table row {row} sums to {sum}")]
    RowSumError { row: String, sum: f64 },
    #[error("table row {row}: {message}")]
    InvalidRow { row: String, message: String },
}

impl IoError {
    /// Whether the input could not be read or parsed at all, as opposed to
    /// parsing fine but failing semantic validation.
    pub fn is_parse_error(&self) -> bool {
        matches!(self, Self::Read { .. } | Self::Schema { .. })
    }
}

pub(crate) fn from_json<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let value = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        IoError::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    Ok(value)
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("in-memory serialization");
    s.push('\n');
    s
}

pub(crate) fn check_version(version: u32) -> Result<(), IoError> {
    if version == FORMAT_VERSION {
        Ok(())
    } else {
        Err(IoError::Schema {
            path: "format_version".into(),
            message: format!("unsupported version {version}, expected {FORMAT_VERSION}"),
        })
    }
}

pub fn read_file(path: impl AsRef<Path>) -> Result<Vec<u8>, IoError> {
    let path = path.as_ref();
    std::fs::read(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })
}
