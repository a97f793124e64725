//! Cognitive status modeling.
//!
//! Each object that is Familiar or higher gets a discrete Bayesian filter
//! over `{InFocus, Activated, Familiar}`, driven by the object's linguistic
//! status in each utterance (not mentioned, mentioned, mentioned as topic).
//! The crate also learns the filter's conditional table from crowdsourced
//! Q1/Q2 responses and evaluates it against a rule-based FSM and a random
//! baseline with leave-one-out prediction and McNemar's test.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the file formats use.

pub mod baselines;
pub mod coding;
pub mod eval;
pub mod filter;
pub mod ids;
pub mod io;
pub mod scalar;
pub mod status;
pub mod synthetic;
pub mod train;

pub use baselines::{DecayPolicy, FsmModel, FsmTransitionTable, RandomBaseline};
pub use coding::{GoldLabelTable, ParticipantResponse};
pub use eval::{EvalConfig, EvalReport, ModelKind, PredictionVector};
pub use filter::{StatusQuery, UpdateMode, UtteranceObservation};
pub use ids::{DialogueId, ObjectId, UtteranceIndex};
pub use io::DialogueCorpus;
pub use scalar::Scalar;
pub use status::{CognitiveStatus, LinguisticStatus};
pub use train::{Exclusions, TransitionCounts};

/// Distribution over statuses in `f64`.
pub type StatusDistribution = status::StatusDistribution<f64>;
/// Conditional status table in `f64`.
pub type ConditionalStatusTable = status::ConditionalStatusTable<f64>;
pub type CognitiveStatusFilter = filter::CognitiveStatusFilter<f64>;
pub type StatusEngine = filter::StatusEngine<f64>;

use thiserror::Error;

/// Any failure surfaced by the library, grouped for callers like the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] io::IoError),
    #[error(transparent)]
    Coding(#[from] coding::CodingError),
    #[error(transparent)]
    Train(#[from] train::TrainError),
    #[error(transparent)]
    Filter(#[from] filter::FilterError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
    #[error(transparent)]
    Status(#[from] status::StatusError),
}

impl Error {
    /// True when the input could not be read or parsed.
    pub fn is_parse_error(&self) -> bool {
        matches!(self, Self::Io(e) if e.is_parse_error())
    }
}
