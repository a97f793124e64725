//! Leave-one-(object, dialogue)-out prediction.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::baselines::{fsm_init, DecayPolicy, RandomBaseline};
use crate::coding::{
    code_all, gold_from_coded, CodedResponses, GoldLabelTable, ParticipantResponse,
};
use crate::filter::{StatusEngine, UpdateMode};
use crate::ids::{DialogueId, ObjectId, UtteranceIndex};
use crate::io::{Dialogue, DialogueCorpus};
use crate::status::{CognitiveStatus, StatusDistribution};
use crate::train::{train_coded, Exclusions};

/// The four compared models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// Filter with a uniform prior.
    #[serde(rename = "u")]
    Uniform,
    /// Filter with the weakly informed prior.
    #[serde(rename = "i")]
    Informed,
    #[serde(rename = "fsm")]
    Fsm,
    #[serde(rename = "rb")]
    Random,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [Self::Uniform, Self::Informed, Self::Fsm, Self::Random];

    pub fn name(self) -> &'static str {
        match self {
            Self::Uniform => "u",
            Self::Informed => "i",
            Self::Fsm => "fsm",
            Self::Random => "rb",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Uniform => "U-model",
            Self::Informed => "I-model",
            Self::Fsm => "FSM",
            Self::Random => "RB",
        }
    }

    pub fn parse(s: &str) -> Result<Self, EvalError> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| EvalError::UnknownModel(s.to_string()))
    }

    /// Prior of the filter models.
    pub fn prior(self) -> Option<StatusDistribution<f64>> {
        match self {
            Self::Uniform => Some(uniform_prior()),
            Self::Informed => Some(informed_prior()),
            Self::Fsm | Self::Random => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn uniform_prior() -> StatusDistribution<f64> {
    StatusDistribution::uniform()
}

/// I = 0.05, A = 0.10, F = 0.85.
pub fn informed_prior() -> StatusDistribution<f64> {
    StatusDistribution::new(0.05, 0.10, 0.85).expect("valid prior")
}

/// When a filter comes into existence during a replayed dialogue.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Familiarity {
    /// Every scene object is registered before the first utterance.
    #[default]
    Scene,
    /// Filters appear on first mention; untracked objects predict Familiar.
    Mention,
}

impl std::str::FromStr for Familiarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scene" => Ok(Self::Scene),
            "mention" => Ok(Self::Mention),
            other => Err(format!(
                "unknown familiarity {other:?} (expected scene|mention)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub mode: UpdateMode,
    pub alpha: f64,
    pub fsm_decay: DecayPolicy,
    pub seed: u64,
    pub familiarity: Familiarity,
    pub exclude_tied_gold: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            mode: UpdateMode::Soft,
            alpha: 0.0,
            fsm_decay: DecayPolicy::DecayOne,
            seed: 0,
            familiarity: Familiarity::Scene,
            exclude_tied_gold: false,
        }
    }
}

/// One predicted-vs-gold outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionEntry {
    pub dialogue: DialogueId,
    pub utterance: UtteranceIndex,
    pub object: ObjectId,
    pub predicted: CognitiveStatus,
    pub gold: Option<CognitiveStatus>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub gold_tied: bool,
    /// `None` when the entry is excluded from scoring.
    pub correct: Option<bool>,
}

impl PredictionEntry {
    pub fn key(&self) -> (&DialogueId, UtteranceIndex, &ObjectId) {
        (&self.dialogue, self.utterance, &self.object)
    }
}

/// Outcomes ordered by dialogue (corpus order), utterance, object (scene order).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PredictionVector {
    pub entries: Vec<PredictionEntry>,
}

impl PredictionVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scored(&self) -> usize {
        self.entries.iter().filter(|e| e.correct.is_some()).count()
    }

    pub fn correct(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.correct == Some(true))
            .count()
    }

    pub fn excluded(&self) -> usize {
        self.len() - self.scored()
    }
}

/// Corpus, coded responses and gold labels shared by all folds.
#[derive(Debug, Clone)]
pub struct EvalData {
    pub corpus: DialogueCorpus,
    pub coded: CodedResponses,
    pub gold: GoldLabelTable,
}

impl EvalData {
    pub fn prepare(
        corpus: DialogueCorpus,
        responses: &[ParticipantResponse],
    ) -> Result<Self, EvalError> {
        let coded = code_all(responses, &corpus)?;
        let gold = gold_from_coded(&coded, &corpus);
        for (d, t, o) in &gold.empty_cells {
            log::warn!("missing gold for {d} utterance {t} object {o}");
        }
        Ok(Self {
            corpus,
            coded,
            gold,
        })
    }
}

/// A held-out `(object, dialogue)` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold<'a> {
    /// Position in the fold enumeration; also the random-stream index.
    pub index: u64,
    pub object: &'a ObjectId,
    pub dialogue: &'a Dialogue,
}

impl Fold<'_> {
    pub fn exclusions(&self) -> Exclusions {
        Exclusions::fold(self.object.clone(), self.dialogue.id.clone())
    }
}

/// Folds in dialogue-major, object-minor order.
pub fn folds(corpus: &DialogueCorpus) -> Vec<Fold<'_>> {
    let n_obj = corpus.objects().len() as u64;
    corpus
        .dialogues()
        .iter()
        .enumerate()
        .flat_map(|(di, d)| {
            corpus
                .objects()
                .iter()
                .enumerate()
                .map(move |(oi, o)| Fold {
                    index: di as u64 * n_obj + oi as u64,
                    object: o,
                    dialogue: d,
                })
        })
        .collect()
}

fn predict_filter(
    data: &EvalData,
    fold: &Fold<'_>,
    prior: StatusDistribution<f64>,
    config: &EvalConfig,
) -> Result<Vec<CognitiveStatus>, EvalError> {
    let trained = train_coded(&data.corpus, &data.coded, &fold.exclusions(), config.alpha)?;
    let mut engine = StatusEngine::new(prior, Arc::new(trained.table), config.mode);
    if config.familiarity == Familiarity::Scene {
        for o in data.corpus.objects() {
            engine.register_familiar(o.clone())?;
        }
    }
    let mut out = Vec::with_capacity(fold.dialogue.utterances.len());
    for u in &fold.dialogue.utterances {
        engine.observe_utterance(&data.corpus.observation(fold.dialogue, u))?;
        let status = engine
            .query_status(fold.object)
            .status()
            .unwrap_or(CognitiveStatus::Familiar);
        out.push(status);
    }
    Ok(out)
}

fn predict_fold(
    kind: ModelKind,
    data: &EvalData,
    fold: &Fold<'_>,
    config: &EvalConfig,
) -> Result<Vec<CognitiveStatus>, EvalError> {
    match kind {
        ModelKind::Uniform | ModelKind::Informed => {
            predict_filter(data, fold, kind.prior().expect("filter prior"), config)
        }
        ModelKind::Fsm => {
            let mut fsm = fsm_init(CognitiveStatus::Familiar, config.fsm_decay);
            Ok(fold
                .dialogue
                .utterances
                .iter()
                .map(|u| {
                    fsm.step(
                        data.corpus
                            .linguistic_status(fold.object, &fold.dialogue.id, u.index),
                    )
                })
                .collect())
        }
        ModelKind::Random => {
            let mut rb = RandomBaseline::with_stream(config.seed, fold.index);
            Ok(fold
                .dialogue
                .utterances
                .iter()
                .map(|_| rb.predict())
                .collect())
        }
    }
}

/// Runs every fold (in parallel on the current rayon pool) and scores the
/// predictions against the majority gold labels.
pub fn leave_one_out_predict(
    kind: ModelKind,
    data: &EvalData,
    config: &EvalConfig,
) -> Result<PredictionVector, EvalError> {
    let folds = folds(&data.corpus);
    let per_fold: Vec<Vec<CognitiveStatus>> = folds
        .par_iter()
        .map(|f| predict_fold(kind, data, f, config))
        .collect::<Result<_, _>>()?;

    let n_obj = data.corpus.objects().len();
    let mut entries = Vec::with_capacity(data.corpus.cell_count());
    for (di, d) in data.corpus.dialogues().iter().enumerate() {
        for (ui, u) in d.utterances.iter().enumerate() {
            for (oi, o) in data.corpus.objects().iter().enumerate() {
                let predicted = per_fold[di * n_obj + oi][ui];
                let cell = data.gold.get(&d.id, u.index, o);
                let gold = cell.map(|c| c.majority);
                let gold_tied = cell.is_some_and(|c| c.tied);
                let scored = gold.is_some() && !(gold_tied && config.exclude_tied_gold);
                entries.push(PredictionEntry {
                    dialogue: d.id.clone(),
                    utterance: u.index,
                    object: o.clone(),
                    predicted,
                    gold,
                    gold_tied,
                    correct: if scored {
                        Some(gold == Some(predicted))
                    } else {
                        None
                    },
                });
            }
        }
    }
    Ok(PredictionVector { entries })
}
