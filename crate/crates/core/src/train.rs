//! Learning the conditional status table from coded responses.
//!
//! For every adjacent utterance pair `(U_{t-1}, U_t)` of a dialogue and every
//! scene object `o`, each participant who heard `t-1` utterances is paired
//! with each participant who heard `t`. A pair where the first coded `o` as
//! `a` and the second as `b` increments cell `((a, L_o^t), b)`. Rows are then
//! normalized, optionally with additive smoothing.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coding::{code_all, CodedResponses, CodingError, ParticipantResponse};
use crate::ids::{DialogueId, ObjectId, UtteranceIndex};
use crate::io::{Dialogue, DialogueCorpus};
use crate::scalar::Scalar;
use crate::status::{
    row_index, row_label, CognitiveStatus, ConditionalStatusTable, LinguisticStatus,
    StatusDistribution, TableRow,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error("smoothing constant must be finite and >= 0, got {0}")]
    InvalidAlpha(f64),
}

/// 9×3 transition counts keyed like [`ConditionalStatusTable`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TransitionCounts {
    cells: [[u64; 3]; 9],
}

impl TransitionCounts {
    pub fn from_cells(cells: [[u64; 3]; 9]) -> Self {
        Self { cells }
    }

    pub fn get(&self, prev: CognitiveStatus, ling: LinguisticStatus, next: CognitiveStatus) -> u64 {
        self.cells[row_index(prev, ling)][next.index()]
    }

    pub fn cells(&self) -> &[[u64; 3]; 9] {
        &self.cells
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().sum()
    }

    fn add(
        &mut self,
        prev: CognitiveStatus,
        ling: LinguisticStatus,
        next: CognitiveStatus,
        n: u64,
    ) {
        self.cells[row_index(prev, ling)][next.index()] += n;
    }

    fn merge(mut self, other: &Self) -> Self {
        for (a, b) in self
            .cells
            .iter_mut()
            .flatten()
            .zip(other.cells.iter().flatten())
        {
            *a += b;
        }
        self
    }
}

/// Objects and dialogues withheld from training.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusions {
    pub objects: BTreeSet<ObjectId>,
    pub dialogues: BTreeSet<DialogueId>,
}

impl Exclusions {
    pub fn none() -> Self {
        Self::default()
    }

    /// The leave-one-out fold for `(object, dialogue)`.
    pub fn fold(object: ObjectId, dialogue: DialogueId) -> Self {
        Self {
            objects: [object].into(),
            dialogues: [dialogue].into(),
        }
    }

    pub fn excludes_object(&self, o: &ObjectId) -> bool {
        self.objects.contains(o)
    }

    pub fn excludes_dialogue(&self, d: &DialogueId) -> bool {
        self.dialogues.contains(d)
    }
}

/// A batch of identical increments, reported to counting observers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Increment<'a> {
    pub dialogue: &'a DialogueId,
    /// The later utterance `t` of the pair.
    pub utterance: UtteranceIndex,
    pub object: &'a ObjectId,
    pub prev: CognitiveStatus,
    pub ling: LinguisticStatus,
    pub next: CognitiveStatus,
    pub amount: u64,
}

/// An adjacent pair where one of the two prefixes had no responses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoAdjacentData {
    pub dialogue: DialogueId,
    pub utterance: UtteranceIndex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountOutcome {
    pub counts: TransitionCounts,
    pub warnings: Vec<NoAdjacentData>,
}

fn status_histogram(
    labels: &[std::collections::BTreeMap<ObjectId, CognitiveStatus>],
    o: &ObjectId,
) -> [u64; 3] {
    let mut h = [0u64; 3];
    for l in labels {
        if let Some(s) = l.get(o) {
            h[s.index()] += 1;
        }
    }
    h
}

fn count_pair(
    corpus: &DialogueCorpus,
    coded: &CodedResponses,
    excl: &Exclusions,
    dialogue: &Dialogue,
    t: UtteranceIndex,
    visit: &mut impl FnMut(&Increment),
) -> (TransitionCounts, Option<NoAdjacentData>) {
    let mut counts = TransitionCounts::default();
    let prev_t = t.prev().expect("pairs start at t = 2");
    let before = coded.at(&dialogue.id, prev_t);
    let after = coded.at(&dialogue.id, t);
    if before.is_empty() || after.is_empty() {
        let w = NoAdjacentData {
            dialogue: dialogue.id.clone(),
            utterance: t,
        };
        return (counts, Some(w));
    }
    for o in corpus.objects() {
        if excl.excludes_object(o) {
            continue;
        }
        let ling = corpus.linguistic_status(o, &dialogue.id, t);
        let hp = status_histogram(before, o);
        let hc = status_histogram(after, o);
        for prev in CognitiveStatus::ALL {
            for next in CognitiveStatus::ALL {
                let amount = hp[prev.index()] * hc[next.index()];
                if amount == 0 {
                    continue;
                }
                counts.add(prev, ling, next, amount);
                visit(&Increment {
                    dialogue: &dialogue.id,
                    utterance: t,
                    object: o,
                    prev,
                    ling,
                    next,
                    amount,
                });
            }
        }
    }
    (counts, None)
}

fn adjacent_pairs<'a>(
    corpus: &'a DialogueCorpus,
    excl: &'a Exclusions,
) -> impl Iterator<Item = (&'a Dialogue, UtteranceIndex)> + 'a {
    corpus
        .dialogues()
        .iter()
        .filter(move |d| !excl.excludes_dialogue(&d.id))
        .flat_map(|d| d.utterances.iter().skip(1).map(move |u| (d, u.index)))
}

pub fn count_transitions(
    corpus: &DialogueCorpus,
    coded: &CodedResponses,
    excl: &Exclusions,
) -> CountOutcome {
    count_transitions_with(corpus, coded, excl, |_| {})
}

/// Sequential counting that reports every increment to `visit`.
pub fn count_transitions_with(
    corpus: &DialogueCorpus,
    coded: &CodedResponses,
    excl: &Exclusions,
    mut visit: impl FnMut(&Increment),
) -> CountOutcome {
    let mut counts = TransitionCounts::default();
    let mut warnings = Vec::new();
    for (d, t) in adjacent_pairs(corpus, excl) {
        let (c, w) = count_pair(corpus, coded, excl, d, t, &mut visit);
        counts = counts.merge(&c);
        warnings.extend(w);
    }
    CountOutcome { counts, warnings }
}

/// Same result as [`count_transitions`], counted per pair on the rayon pool.
pub fn count_transitions_parallel(
    corpus: &DialogueCorpus,
    coded: &CodedResponses,
    excl: &Exclusions,
) -> CountOutcome {
    let pairs: Vec<_> = adjacent_pairs(corpus, excl).collect();
    let parts: Vec<_> = pairs
        .par_iter()
        .map(|(d, t)| count_pair(corpus, coded, excl, d, *t, &mut |_| {}))
        .collect();
    let mut counts = TransitionCounts::default();
    let mut warnings = Vec::new();
    for (c, w) in parts {
        counts = counts.merge(&c);
        warnings.extend(w);
    }
    CountOutcome { counts, warnings }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedTable<T> {
    pub table: ConditionalStatusTable<T>,
    /// Rows with no data and no smoothing, replaced by uniform.
    pub fallback_rows: Vec<&'static str>,
}

pub fn normalize_counts<T: Scalar>(
    counts: &TransitionCounts,
    alpha: T,
) -> Result<NormalizedTable<T>, TrainError> {
    if !alpha.is_finite() || alpha < T::zero() {
        return Err(TrainError::InvalidAlpha(alpha.to_f64().unwrap_or(f64::NAN)));
    }
    let mut fallback_rows = Vec::new();
    let rows: [TableRow<T>; 9] = std::array::from_fn(|i| {
        let raw = counts.cells[i];
        let total: u64 = raw.iter().sum();
        let denom = T::from_count(total) + T::lit(3.0) * alpha;
        let dist = if denom > T::zero() {
            let probs = raw.map(|c| (T::from_count(c) + alpha) / denom);
            StatusDistribution::from_array(probs).expect("smoothed row is a distribution")
        } else {
            fallback_rows.push(row_label(i));
            StatusDistribution::uniform()
        };
        TableRow {
            dist,
            counts: Some(raw),
        }
    });
    Ok(NormalizedTable {
        table: ConditionalStatusTable::from_table_rows(rows),
        fallback_rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput<T> {
    pub table: ConditionalStatusTable<T>,
    pub counts: TransitionCounts,
    pub missing_pairs: Vec<NoAdjacentData>,
    pub fallback_rows: Vec<&'static str>,
}

/// Codes the responses, counts transitions and normalizes.
pub fn train<T: Scalar>(
    corpus: &DialogueCorpus,
    responses: &[ParticipantResponse],
    excl: &Exclusions,
    alpha: T,
) -> Result<TrainOutput<T>, TrainError> {
    let coded = code_all(responses, corpus)?;
    train_coded(corpus, &coded, excl, alpha)
}

pub fn train_coded<T: Scalar>(
    corpus: &DialogueCorpus,
    coded: &CodedResponses,
    excl: &Exclusions,
    alpha: T,
) -> Result<TrainOutput<T>, TrainError> {
    let outcome = count_transitions(corpus, coded, excl);
    for w in &outcome.warnings {
        log::debug!(
            "no adjacent data for {} utterance {}",
            w.dialogue,
            w.utterance
        );
    }
    let normalized = normalize_counts(&outcome.counts, alpha)?;
    Ok(TrainOutput {
        table: normalized.table,
        counts: outcome.counts,
        missing_pairs: outcome.warnings,
        fallback_rows: normalized.fallback_rows,
    })
}
