//! Annotated dialogue corpus.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "objects": ["tube", "box"],
//!   "dialogues": [
//!     {"id": "M1", "utterances": [
//!       {"index": 1, "text": "Take the tube.",
//!        "mentions": [{"object": "tube", "role": "topic", "votes": 3}]}
//!     ]}
//!   ]
//! }
//! ```
//!
//! `votes` is optional and informational only.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{check_version, from_json, to_json, IoError, FORMAT_VERSION};
use crate::filter::UtteranceObservation;
use crate::ids::{DialogueId, ObjectId, UtteranceIndex};
use crate::status::LinguisticStatus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MentionRole {
    Topic,
    Nontopic,
}

impl MentionRole {
    pub fn linguistic_status(self) -> LinguisticStatus {
        match self {
            Self::Topic => LinguisticStatus::MentionedTopic,
            Self::Nontopic => LinguisticStatus::MentionedNonTopic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mention {
    pub object: ObjectId,
    pub role: MentionRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub votes: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Utterance {
    pub index: UtteranceIndex,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub mentions: Vec<Mention>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dialogue {
    pub id: DialogueId,
    pub utterances: Vec<Utterance>,
}

impl Dialogue {
    pub fn len(&self) -> u32 {
        self.utterances.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    pub fn utterance(&self, index: UtteranceIndex) -> Option<&Utterance> {
        self.utterances.get(index.get() as usize - 1)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusFile {
    format_version: u32,
    objects: Vec<ObjectId>,
    dialogues: Vec<Dialogue>,
}

/// Validated corpus: scene objects plus annotated dialogues.
#[derive(Debug, Clone, PartialEq)]
pub struct DialogueCorpus {
    objects: Vec<ObjectId>,
    object_set: BTreeSet<ObjectId>,
    dialogues: Vec<Dialogue>,
    dialogue_pos: BTreeMap<DialogueId, usize>,
}

impl DialogueCorpus {
    pub fn new(objects: Vec<ObjectId>, dialogues: Vec<Dialogue>) -> Result<Self, IoError> {
        let mut object_set = BTreeSet::new();
        for o in &objects {
            if !object_set.insert(o.clone()) {
                return Err(IoError::DuplicateId {
                    kind: "object",
                    id: o.to_string(),
                });
            }
        }
        let mut dialogue_pos = BTreeMap::new();
        for (pos, d) in dialogues.iter().enumerate() {
            if dialogue_pos.insert(d.id.clone(), pos).is_some() {
                return Err(IoError::DuplicateId {
                    kind: "dialogue",
                    id: d.id.to_string(),
                });
            }
            for (i, u) in d.utterances.iter().enumerate() {
                let expected = i as u32 + 1;
                if u.index.get() != expected {
                    return Err(IoError::NonContiguousIndex {
                        dialogue: d.id.clone(),
                        expected,
                        found: u.index.get(),
                    });
                }
                let mut seen = BTreeSet::new();
                for (k, m) in u.mentions.iter().enumerate() {
                    if !object_set.contains(&m.object) {
                        return Err(IoError::DanglingReference {
                            path: format!("dialogues[{pos}].utterances[{i}].mentions[{k}].object"),
                            what: format!("object {}", m.object),
                        });
                    }
                    if !seen.insert(&m.object) {
                        return Err(IoError::DuplicateMention {
                            dialogue: d.id.clone(),
                            utterance: u.index,
                            object: m.object.clone(),
                        });
                    }
                }
            }
        }
        Ok(Self {
            objects,
            object_set,
            dialogues,
            dialogue_pos,
        })
    }

    /// Scene objects in file order.
    pub fn objects(&self) -> &[ObjectId] {
        &self.objects
    }

    pub fn object_set(&self) -> &BTreeSet<ObjectId> {
        &self.object_set
    }

    pub fn has_object(&self, o: &ObjectId) -> bool {
        self.object_set.contains(o)
    }

    pub fn dialogues(&self) -> &[Dialogue] {
        &self.dialogues
    }

    pub fn dialogue(&self, id: &DialogueId) -> Option<&Dialogue> {
        self.dialogue_pos.get(id).map(|&i| &self.dialogues[i])
    }

    /// `L(o, d, t)`; NotMentioned for anything not annotated.
    pub fn linguistic_status(
        &self,
        object: &ObjectId,
        dialogue: &DialogueId,
        index: UtteranceIndex,
    ) -> LinguisticStatus {
        self.dialogue(dialogue)
            .and_then(|d| d.utterance(index))
            .and_then(|u| u.mentions.iter().find(|m| &m.object == object))
            .map(|m| m.role.linguistic_status())
            .unwrap_or(LinguisticStatus::NotMentioned)
    }

    pub fn observation(&self, dialogue: &Dialogue, utterance: &Utterance) -> UtteranceObservation {
        let mentions = utterance
            .mentions
            .iter()
            .map(|m| (m.object.clone(), m.role.linguistic_status()))
            .collect();
        UtteranceObservation::new(dialogue.id.clone(), utterance.index, mentions)
            .expect("corpus mentions are always M or T")
    }

    /// Number of (dialogue, utterance, object) cells.
    pub fn cell_count(&self) -> usize {
        self.objects.len()
            * self
                .dialogues
                .iter()
                .map(|d| d.utterances.len())
                .sum::<usize>()
    }
}

pub fn parse_corpus(bytes: &[u8]) -> Result<DialogueCorpus, IoError> {
    let file: CorpusFile = from_json(bytes)?;
    check_version(file.format_version)?;
    DialogueCorpus::new(file.objects, file.dialogues)
}

pub fn write_corpus(corpus: &DialogueCorpus) -> String {
    to_json(&CorpusFile {
        format_version: FORMAT_VERSION,
        objects: corpus.objects.clone(),
        dialogues: corpus.dialogues.clone(),
    })
}
