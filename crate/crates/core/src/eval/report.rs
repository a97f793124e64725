use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::harness::{
    leave_one_out_predict, EvalConfig, EvalData, Familiarity, ModelKind, PredictionVector,
};
use super::stats::{mcnemar, ContingencyTable2x2, McNemarResult};
use super::{accuracy, contingency, EvalError};
use crate::baselines::{DecayPolicy, RNG_ALGORITHM};
use crate::filter::UpdateMode;
use crate::io::FORMAT_VERSION;
use crate::status::CognitiveStatus;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorEcho {
    pub model: ModelKind,
    /// `I, A, F` order.
    pub probs: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub models: Vec<ModelKind>,
    pub priors: Vec<PriorEcho>,
    pub mode: UpdateMode,
    pub alpha: f64,
    pub fsm_decay: DecayPolicy,
    pub fsm_start: CognitiveStatus,
    pub seed: u64,
    pub rng: String,
    pub familiarity: Familiarity,
    pub exclude_tied_gold: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSummary {
    pub objects: usize,
    pub dialogues: usize,
    pub cells: usize,
    pub responses_used: usize,
    pub dropped_failed_check: usize,
    pub q1_outside_q2: usize,
    pub missing_gold_cells: usize,
    pub tied_gold_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub model: ModelKind,
    pub label: String,
    /// Percentage; absent when nothing could be scored.
    pub accuracy: Option<f64>,
    pub correct: usize,
    pub scored: usize,
    pub excluded: usize,
    pub predictions: PredictionVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub model1: ModelKind,
    pub model2: ModelKind,
    pub contingency: ContingencyTable2x2,
    pub mcnemar: McNemarResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub format_version: u32,
    pub config: ConfigEcho,
    pub data: DataSummary,
    pub models: Vec<ModelResult>,
    pub pairs: Vec<PairResult>,
}

impl EvalReport {
    pub fn model(&self, kind: ModelKind) -> Option<&ModelResult> {
        self.models.iter().find(|m| m.model == kind)
    }
}

fn pair(a: &ModelResult, b: &ModelResult) -> Result<PairResult, EvalError> {
    let contingency = contingency(&a.predictions, &b.predictions)?;
    Ok(PairResult {
        model1: a.model,
        model2: b.model,
        contingency,
        mcnemar: mcnemar(&contingency),
    })
}

/// Predicts with every listed model and compares every pair in list order.
pub fn evaluate(
    data: &EvalData,
    models: &[ModelKind],
    config: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    for (i, m) in models.iter().enumerate() {
        if models[..i].contains(m) {
            return Err(EvalError::DuplicateModel(m.name().to_string()));
        }
    }
    let mut results = Vec::with_capacity(models.len());
    for &kind in models {
        let predictions = leave_one_out_predict(kind, data, config)?;
        let acc = match accuracy(&predictions) {
            Ok(a) => Some(a),
            Err(EvalError::EmptyVector) => None,
            Err(e) => return Err(e),
        };
        results.push(ModelResult {
            model: kind,
            label: kind.label().to_string(),
            accuracy: acc,
            correct: predictions.correct(),
            scored: predictions.scored(),
            excluded: predictions.excluded(),
            predictions,
        });
    }
    let mut pairs = Vec::new();
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            pairs.push(pair(&results[i], &results[j])?);
        }
    }
    let tied = data.gold.cells().values().filter(|c| c.tied).count();
    Ok(EvalReport {
        format_version: FORMAT_VERSION,
        config: ConfigEcho {
            models: models.to_vec(),
            priors: models
                .iter()
                .filter_map(|m| {
                    m.prior().map(|p| PriorEcho {
                        model: *m,
                        probs: p.as_array(),
                    })
                })
                .collect(),
            mode: config.mode,
            alpha: config.alpha,
            fsm_decay: config.fsm_decay,
            fsm_start: CognitiveStatus::Familiar,
            seed: config.seed,
            rng: RNG_ALGORITHM.to_string(),
            familiarity: config.familiarity,
            exclude_tied_gold: config.exclude_tied_gold,
        },
        data: DataSummary {
            objects: data.corpus.objects().len(),
            dialogues: data.corpus.dialogues().len(),
            cells: data.corpus.cell_count(),
            responses_used: data.coded.total(),
            dropped_failed_check: data.coded.dropped_failed_check,
            q1_outside_q2: data.coded.q1_outside_q2,
            missing_gold_cells: data.gold.empty_cells.len(),
            tied_gold_cells: tied,
        },
        models: results,
        pairs,
    })
}

/// Re-derives the comparison of two models from their stored vectors.
pub fn compare_models(
    report: &EvalReport,
    first: ModelKind,
    second: ModelKind,
) -> Result<PairResult, EvalError> {
    let find = |k: ModelKind| {
        report
            .model(k)
            .ok_or_else(|| EvalError::UnknownModel(k.name().to_string()))
    };
    pair(find(first)?, find(second)?)
}

/// p-values below 1e-4 print as `<0.0001`.
pub fn format_p(p: f64) -> String {
    if p < 1e-4 {
        "<0.0001".to_string()
    } else {
        format!("{p:.4}")
    }
}

/// Contingency and McNemar tables for the given pairs.
pub fn render_pairs(pairs: &[PairResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Contingency table entries");
    let _ = writeln!(
        out,
        "{:<10} {:<10} {:>6} {:>6} {:>6} {:>6}",
        "model1", "model2", "N_ss", "N_sf", "N_fs", "N_ff"
    );
    for p in pairs {
        let c = &p.contingency;
        let _ = writeln!(
            out,
            "{:<10} {:<10} {:>6} {:>6} {:>6} {:>6}",
            p.model1.label(),
            p.model2.label(),
            c.n_ss,
            c.n_sf,
            c.n_fs,
            c.n_ff
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "McNemar's test (1 df, continuity-corrected)");
    let _ = writeln!(out, "{:<22} {:>8} {:>9}", "pair", "chi2", "p-value");
    for p in pairs {
        let name = format!("{}, {}", p.model1.label(), p.model2.label());
        let _ = writeln!(
            out,
            "{:<22} {:>8.3} {:>9}",
            name,
            p.mcnemar.chi2,
            format_p(p.mcnemar.p)
        );
    }
    out
}

/// Plain-text accuracy, contingency and McNemar tables.
pub fn render_text(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Accuracy");
    let _ = writeln!(
        out,
        "{:<10} {:>9} {:>8} {:>9}",
        "model", "accuracy", "scored", "excluded"
    );
    for m in &report.models {
        let acc = m
            .accuracy
            .map_or_else(|| "n/a".to_string(), |a| format!("{a:.2}"));
        let _ = writeln!(
            out,
            "{:<10} {:>9} {:>8} {:>9}",
            m.label, acc, m.scored, m.excluded
        );
    }
    if !report.pairs.is_empty() {
        let _ = writeln!(out);
        out.push_str(&render_pairs(&report.pairs));
    }
    out
}
