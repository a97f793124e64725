//! Turning Q1/Q2 clicks into status labels, and labels into majority gold.
//!
//! A Q1 click ("look at it") codes InFocus, a Q2-only click ("look at
//! that") codes Activated, and every unclicked scene object is Familiar.
//! A Q1 object missing from Q2 still codes InFocus; such responses are
//! counted as a data-quality signal.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{DialogueId, ObjectId, UtteranceIndex};
use crate::io::DialogueCorpus;
use crate::status::CognitiveStatus;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodingError {
    #[error("participant {participant} clicked unknown object {object}")]
    UnknownObject {
        participant: String,
        object: ObjectId,
    },
    #[error("participant {participant} references unknown dialogue {dialogue}")]
    UnknownDialogue {
        participant: String,
        dialogue: DialogueId,
    },
    #[error("participant {participant}: prefix {prefix_len} is outside dialogue {dialogue}")]
    PrefixOutOfRange {
        participant: String,
        dialogue: DialogueId,
        prefix_len: UtteranceIndex,
    },
}

/// One participant's answers after hearing a dialogue prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipantResponse {
    pub participant: String,
    pub dialogue: DialogueId,
    /// Number of utterances heard.
    pub prefix_len: UtteranceIndex,
    pub q1: ObjectId,
    pub q2: BTreeSet<ObjectId>,
    pub passed_check: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedResponse {
    pub labels: BTreeMap<ObjectId, CognitiveStatus>,
    /// The Q1 object was not among the Q2 clicks.
    pub q1_outside_q2: bool,
}

pub fn code_response(
    r: &ParticipantResponse,
    objects: &BTreeSet<ObjectId>,
) -> Result<CodedResponse, CodingError> {
    for clicked in std::iter::once(&r.q1).chain(&r.q2) {
        if !objects.contains(clicked) {
            return Err(CodingError::UnknownObject {
                participant: r.participant.clone(),
                object: clicked.clone(),
            });
        }
    }
    let labels = objects
        .iter()
        .map(|o| {
            let status = if *o == r.q1 {
                CognitiveStatus::InFocus
            } else if r.q2.contains(o) {
                CognitiveStatus::Activated
            } else {
                CognitiveStatus::Familiar
            };
            (o.clone(), status)
        })
        .collect();
    Ok(CodedResponse {
        labels,
        q1_outside_q2: !r.q2.contains(&r.q1),
    })
}

/// Coded labels for passed-check responses, grouped by heard prefix.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CodedResponses {
    by_prefix: BTreeMap<(DialogueId, UtteranceIndex), Vec<BTreeMap<ObjectId, CognitiveStatus>>>,
    /// Responses dropped for failing the attention check.
    pub dropped_failed_check: usize,
    pub q1_outside_q2: usize,
}

impl CodedResponses {
    /// Labels from every participant who heard exactly `prefix` utterances.
    pub fn at(
        &self,
        dialogue: &DialogueId,
        prefix: UtteranceIndex,
    ) -> &[BTreeMap<ObjectId, CognitiveStatus>] {
        self.by_prefix
            .get(&(dialogue.clone(), prefix))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn total(&self) -> usize {
        self.by_prefix.values().map(Vec::len).sum()
    }
}

/// Drops failed checks and codes the rest against the corpus scene.
pub fn code_all(
    responses: &[ParticipantResponse],
    corpus: &DialogueCorpus,
) -> Result<CodedResponses, CodingError> {
    let mut out = CodedResponses::default();
    for r in responses {
        if !r.passed_check {
            out.dropped_failed_check += 1;
            continue;
        }
        let dialogue =
            corpus
                .dialogue(&r.dialogue)
                .ok_or_else(|| CodingError::UnknownDialogue {
                    participant: r.participant.clone(),
                    dialogue: r.dialogue.clone(),
                })?;
        if r.prefix_len.get() > dialogue.len() {
            return Err(CodingError::PrefixOutOfRange {
                participant: r.participant.clone(),
                dialogue: r.dialogue.clone(),
                prefix_len: r.prefix_len,
            });
        }
        let coded = code_response(r, corpus.object_set())?;
        if coded.q1_outside_q2 {
            out.q1_outside_q2 += 1;
        }
        out.by_prefix
            .entry((r.dialogue.clone(), r.prefix_len))
            .or_default()
            .push(coded.labels);
    }
    if out.q1_outside_q2 > 0 {
        log::info!(
            "{} responses clicked a Q1 object outside Q2",
            out.q1_outside_q2
        );
    }
    Ok(out)
}

/// Plurality status over votes `[I, A, F]`; ties go to the lower status.
/// The flag reports whether the top count was shared.
pub fn majority(votes: [u32; 3]) -> (CognitiveStatus, bool) {
    let top = *votes.iter().max().expect("three votes");
    let mut winners = [
        CognitiveStatus::Familiar,
        CognitiveStatus::Activated,
        CognitiveStatus::InFocus,
    ]
    .into_iter()
    .filter(|s| votes[s.index()] == top);
    let best = winners.next().expect("at least one winner");
    (best, winners.next().is_some())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldCell {
    pub majority: CognitiveStatus,
    /// Votes in `I, A, F` order.
    pub votes: [u32; 3],
    pub n_participants: u32,
    pub tied: bool,
}

pub type CellKey = (DialogueId, UtteranceIndex, ObjectId);

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GoldLabelTable {
    cells: BTreeMap<CellKey, GoldCell>,
    /// Cells of the corpus with no responses at all.
    pub empty_cells: Vec<CellKey>,
}

impl GoldLabelTable {
    pub fn get(
        &self,
        dialogue: &DialogueId,
        index: UtteranceIndex,
        object: &ObjectId,
    ) -> Option<&GoldCell> {
        self.cells.get(&(dialogue.clone(), index, object.clone()))
    }

    pub fn cells(&self) -> &BTreeMap<CellKey, GoldCell> {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

pub fn build_gold_labels(
    responses: &[ParticipantResponse],
    corpus: &DialogueCorpus,
) -> Result<GoldLabelTable, CodingError> {
    let coded = code_all(responses, corpus)?;
    Ok(gold_from_coded(&coded, corpus))
}

pub fn gold_from_coded(coded: &CodedResponses, corpus: &DialogueCorpus) -> GoldLabelTable {
    let mut table = GoldLabelTable::default();
    for d in corpus.dialogues() {
        for u in &d.utterances {
            let labels = coded.at(&d.id, u.index);
            for o in corpus.objects() {
                let key = (d.id.clone(), u.index, o.clone());
                if labels.is_empty() {
                    log::debug!(
                        "no responses for {} utterance {} object {}",
                        d.id,
                        u.index,
                        o
                    );
                    table.empty_cells.push(key);
                    continue;
                }
                let mut votes = [0u32; 3];
                for l in labels {
                    votes[l[o].index()] += 1;
                }
                let (majority, tied) = majority(votes);
                table.cells.insert(
                    key,
                    GoldCell {
                        majority,
                        votes,
                        n_participants: labels.len() as u32,
                        tied,
                    },
                );
            }
        }
    }
    table
}
