//! Evaluation: leave-one-out prediction, accuracy, paired McNemar tests and
//! agreement statistics.

use thiserror::Error;

use crate::coding::CodingError;
use crate::filter::FilterError;
use crate::train::TrainError;

mod harness;
mod report;
pub mod stats;

pub use harness::{
    folds, informed_prior, leave_one_out_predict, uniform_prior, EvalConfig, EvalData, Familiarity,
    Fold, ModelKind, PredictionEntry, PredictionVector,
};
pub use report::{
    compare_models, evaluate, format_p, render_pairs, render_text, ConfigEcho, DataSummary,
    EvalReport, ModelResult, PairResult,
};
pub use stats::{
    chi_square_sf, erfc, fleiss_kappa, mcnemar, mcnemar_exact_p, ContingencyTable2x2, FleissKappa,
    McNemarResult, StatsError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error("prediction vector has no scored entries")]
    EmptyVector,
    #[error("prediction vectors differ at entry {0}")]
    KeyMismatch(usize),
    #[error("unknown model {0:?} (expected u, i, fsm or rb)")]
    UnknownModel(String),
    #[error("model {0} listed twice")]
    DuplicateModel(String),
}

/// Percentage of scored entries that are correct.
pub fn accuracy(v: &PredictionVector) -> Result<f64, EvalError> {
    let scored = v.scored();
    if scored == 0 {
        return Err(EvalError::EmptyVector);
    }
    Ok(100.0 * v.correct() as f64 / scored as f64)
}

/// Joint success/failure counts over entries scored in both vectors.
pub fn contingency(
    v1: &PredictionVector,
    v2: &PredictionVector,
) -> Result<ContingencyTable2x2, EvalError> {
    if v1.len() != v2.len() {
        return Err(EvalError::KeyMismatch(v1.len().min(v2.len())));
    }
    let mut t = ContingencyTable2x2::default();
    for (i, (a, b)) in v1.entries.iter().zip(&v2.entries).enumerate() {
        if a.key() != b.key() {
            return Err(EvalError::KeyMismatch(i));
        }
        match (a.correct, b.correct) {
            (Some(true), Some(true)) => t.n_ss += 1,
            (Some(true), Some(false)) => t.n_sf += 1,
            (Some(false), Some(true)) => t.n_fs += 1,
            (Some(false), Some(false)) => t.n_ff += 1,
            _ => {}
        }
    }
    Ok(t)
}
