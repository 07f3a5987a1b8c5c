//! Metrics, cross-validation, permutation importance, consumed weight and
//! the view-angle experiment, plus the report emitters.

mod consumed;
mod cv;
mod importance;
mod metrics;
pub mod report;
mod view_angle;

use serde::{Deserialize, Serialize};

pub use consumed::{consumed_weight, relative_error_pct, ConsumedWeight};
pub use cv::{fold_assignment, group_fold_assignment, kfold_evaluate, CvReport};
pub use importance::{
    default_groups, permutation_importance, permutation_importance_groups, FeatureGroup, FeatureImportance,
    ImportanceReport,
};
pub use metrics::{compute_metrics, mean_sd, Metrics};
pub use view_angle::{view_angle_experiment, ViewAngleResult, MIN_VIEW_ANGLE_SAMPLES};

use crate::dataprep::PrepError;
use crate::features::FeatureError;
use crate::regression::RegressionError;
use crate::session::Phase;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("length mismatch: {left} predictions vs {right} truths")]
    LengthMismatch { left: usize, right: usize },
    #[error("no samples to evaluate")]
    EmptyInput,
    #[error("too few samples: {n} available, {k} required")]
    TooFewSamples { n: usize, k: usize },
    #[error("invalid evaluation config: {0}")]
    InvalidConfig(String),
    #[error("no usable {0} frames")]
    NoUsableFrames(Phase),
    #[error("only one device class present")]
    SingleClass,
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error(transparent)]
    Regression(#[from] RegressionError),
    #[error(transparent)]
    Prep(#[from] PrepError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Accuracy tolerance in grams; an estimate counts when |error| < epsilon.
    pub epsilon: f64,
    pub k: usize,
    pub m_repeats: usize,
    pub seed: u64,
    /// Keep every sample of a session in the same fold.
    pub group_by_session: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { epsilon: 50.0, k: 15, m_repeats: 20, seed: 0, group_by_session: false }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(EvalError::InvalidConfig(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.k < 2 {
            return Err(EvalError::InvalidConfig(format!("k must be at least 2, got {}", self.k)));
        }
        if self.m_repeats == 0 {
            return Err(EvalError::InvalidConfig("m_repeats must be at least 1".into()));
        }
        Ok(())
    }
}
