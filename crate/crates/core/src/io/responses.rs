//! Participant responses.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "responses": [
//!     {"participant": "p001", "dialogue": "M1", "prefix_len": 2,
//!      "q1": "tube", "q2": ["tube", "box"], "passed_check": true}
//!   ]
//! }
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{check_version, from_json, to_json, DialogueCorpus, IoError, FORMAT_VERSION};
use crate::coding::ParticipantResponse;
use crate::ids::{DialogueId, ObjectId, UtteranceIndex};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawResponse {
    participant: String,
    dialogue: DialogueId,
    prefix_len: UtteranceIndex,
    q1: ObjectId,
    q2: Vec<ObjectId>,
    passed_check: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    format_version: u32,
    responses: Vec<RawResponse>,
}

/// Validated responses; failed-check records are kept and counted.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponsesFile {
    pub responses: Vec<ParticipantResponse>,
}

impl ResponsesFile {
    pub fn failed_checks(&self) -> usize {
        self.responses.iter().filter(|r| !r.passed_check).count()
    }
}

pub fn parse_responses(bytes: &[u8], corpus: &DialogueCorpus) -> Result<ResponsesFile, IoError> {
    let raw: RawFile = from_json(bytes)?;
    check_version(raw.format_version)?;
    let mut responses = Vec::with_capacity(raw.responses.len());
    for (index, r) in raw.responses.into_iter().enumerate() {
        let dialogue = corpus
            .dialogue(&r.dialogue)
            .ok_or_else(|| IoError::DanglingReference {
                path: format!("responses[{index}].dialogue"),
                what: format!("dialogue {}", r.dialogue),
            })?;
        if r.prefix_len.get() > dialogue.len() {
            return Err(IoError::PrefixOutOfRange {
                index,
                dialogue: r.dialogue,
                prefix_len: r.prefix_len.get(),
                len: dialogue.len(),
            });
        }
        if !corpus.has_object(&r.q1) {
            return Err(IoError::DanglingReference {
                path: format!("responses[{index}].q1"),
                what: format!("object {}", r.q1),
            });
        }
        let mut q2 = BTreeSet::new();
        for (k, o) in r.q2.into_iter().enumerate() {
            if !corpus.has_object(&o) {
                return Err(IoError::DanglingReference {
                    path: format!("responses[{index}].q2[{k}]"),
                    what: format!("object {o}"),
                });
            }
            if q2.contains(&o) {
                return Err(IoError::DuplicateClick { index, object: o });
            }
            q2.insert(o);
        }
        responses.push(ParticipantResponse {
            participant: r.participant,
            dialogue: r.dialogue,
            prefix_len: r.prefix_len,
            q1: r.q1,
            q2,
            passed_check: r.passed_check,
        });
    }
    let file = ResponsesFile { responses };
    if file.failed_checks() > 0 {
        log::info!(
            "{} responses failed the attention check",
            file.failed_checks()
        );
    }
    Ok(file)
}

pub fn write_responses(file: &ResponsesFile) -> String {
    to_json(&RawFile {
        format_version: FORMAT_VERSION,
        responses: file
            .responses
            .iter()
            .map(|r| RawResponse {
                participant: r.participant.clone(),
                dialogue: r.dialogue.clone(),
                prefix_len: r.prefix_len,
                q1: r.q1.clone(),
                q2: r.q2.iter().cloned().collect(),
                passed_check: r.passed_check,
            })
            .collect(),
    })
}
