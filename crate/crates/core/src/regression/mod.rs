//! Weight regressors behind one fit/predict contract.
//!
//! A [`ModelSpec`] names the learner, its hyperparameters, the feature
//! subset it sees and its seed. [`fit`] turns a spec and training data into
//! an immutable [`TrainedModel`]; predictions are clamped at 0 g.

mod baseline;
mod boosting;
mod data;
mod forest;
pub mod mlp;
mod scaler;
mod svr;
pub mod tree;

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use baseline::{median, MedianBaseline};
pub use boosting::{BoostParams, Boosted};
pub use data::{Dataset, Design, WeightSample};
pub use forest::{Forest, ForestParams, MaxFeatures};
pub use mlp::{Activation, MlpParams, MlpRegressor};
pub use scaler::Standardizer;
pub use svr::{LinearSvr, SvrParams};

use crate::category::FoodCategory;
use crate::features::{FeatureVector, FEATURE_COUNT, FRR};
use crate::rng::derive_seed;
use forest::ForestKind;
use tree::{GrowParams, ThresholdRule, Tree};

/// Version written into model files; files from newer versions are refused.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum RegressionError {
    #[error("training set is empty")]
    EmptyTraining,
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("feature column {index} out of range for {width}-column input")]
    SubsetOutOfRange { index: usize, width: usize },
    #[error("model expects {expected} input columns, got {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error("model produced a non-finite prediction")]
    NonFinitePrediction,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("model file format version {found} is newer than supported version {supported}")]
    VersionMismatch { found: u64, supported: u32 },
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
}

/// Which columns of the input a model may look at.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSubset {
    /// Food region ratio only.
    Frr,
    /// Food type one-hot plus food region ratio.
    FrrFt,
    /// All twenty canonical features.
    Full,
    /// Explicit column list, for inputs wider than the canonical vector.
    Columns(Vec<usize>),
}

impl FeatureSubset {
    pub fn indices(&self) -> Vec<usize> {
        match self {
            FeatureSubset::Frr => vec![FRR],
            FeatureSubset::FrrFt => (0..=FRR).collect(),
            FeatureSubset::Full => (0..FEATURE_COUNT).collect(),
            FeatureSubset::Columns(c) => c.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Short form used on the command line: `frr`, `frr-ft`, `full`.
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "frr" => Some(FeatureSubset::Frr),
            "frr-ft" => Some(FeatureSubset::FrrFt),
            "full" => Some(FeatureSubset::Full),
            _ => None,
        }
    }

    /// Label used in reports.
    pub fn label(&self) -> String {
        match self {
            FeatureSubset::Frr => "FRR".into(),
            FeatureSubset::FrrFt => "FRR-FT".into(),
            FeatureSubset::Full => "FRR-FT-NP-AWR-RD-PAR".into(),
            FeatureSubset::Columns(c) => format!("columns{c:?}"),
        }
    }

    fn validate(&self, width: usize) -> Result<(), RegressionError> {
        let idx = self.indices();
        if idx.is_empty() {
            return Err(RegressionError::InvalidHyperparameter("empty feature subset".into()));
        }
        match idx.iter().find(|&&i| i >= width) {
            Some(&index) => Err(RegressionError::SubsetOutOfRange { index, width }),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_depth: None, min_leaf: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
    ExtraTrees(ForestParams),
    GradientBoosted(BoostParams),
    Mlp(MlpParams),
    Svr(SvrParams),
    Ensemble { members: Vec<ModelSpec> },
    MedianBaseline,
}

impl ModelKind {
    /// Command-line name: rf, et, gb, dt, mlp, svr, ensemble, baseline.
    pub fn short_name(&self) -> &'static str {
        match self {
            ModelKind::DecisionTree(_) => "dt",
            ModelKind::RandomForest(_) => "rf",
            ModelKind::ExtraTrees(_) => "et",
            ModelKind::GradientBoosted(_) => "gb",
            ModelKind::Mlp(_) => "mlp",
            ModelKind::Svr(_) => "svr",
            ModelKind::Ensemble { .. } => "ensemble",
            ModelKind::MedianBaseline => "baseline",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::DecisionTree(_) => "DT",
            ModelKind::RandomForest(_) => "RF",
            ModelKind::ExtraTrees(_) => "ET",
            ModelKind::GradientBoosted(_) => "GB",
            ModelKind::Mlp(_) => "MLP",
            ModelKind::Svr(_) => "SVR",
            ModelKind::Ensemble { .. } => "RF+ET+MLP_Ensemble",
            ModelKind::MedianBaseline => "Baseline",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(rename = "learner")]
    pub kind: ModelKind,
    pub feature_subset: FeatureSubset,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, feature_subset: FeatureSubset, seed: u64) -> Self {
        Self { kind, feature_subset, seed }
    }

    /// Default-hyperparameter spec for a command-line model name. The
    /// ensemble's members get seeds derived from `seed`.
    pub fn from_short_name(name: &str, feature_subset: FeatureSubset, seed: u64) -> Option<Self> {
        let kind = match name.trim().to_ascii_lowercase().as_str() {
            "dt" => ModelKind::DecisionTree(TreeParams::default()),
            "rf" => ModelKind::RandomForest(ForestParams::default()),
            "et" => ModelKind::ExtraTrees(ForestParams::default()),
            "gb" => ModelKind::GradientBoosted(BoostParams::default()),
            "mlp" => ModelKind::Mlp(MlpParams::default()),
            "svr" => ModelKind::Svr(SvrParams::default()),
            "ensemble" => return Some(Self::default_ensemble(feature_subset, seed)),
            "baseline" => ModelKind::MedianBaseline,
            _ => return None,
        };
        Some(Self::new(kind, feature_subset, seed))
    }

    /// Unweighted mean of a random forest, extra trees and an MLP.
    pub fn default_ensemble(feature_subset: FeatureSubset, seed: u64) -> Self {
        let members = vec![
            ModelKind::RandomForest(ForestParams::default()),
            ModelKind::ExtraTrees(ForestParams::default()),
            ModelKind::Mlp(MlpParams::default()),
        ]
        .into_iter()
        .enumerate()
        .map(|(i, k)| ModelSpec::new(k, feature_subset.clone(), derive_seed(seed, &[i as u64])))
        .collect();
        Self::new(ModelKind::Ensemble { members }, feature_subset, seed)
    }

    pub fn label(&self) -> &'static str {
        self.kind.label()
    }

    /// Same spec under a new seed; ensemble members get seeds derived from it.
    pub fn reseeded(&self, seed: u64) -> Self {
        let kind = match &self.kind {
            ModelKind::Ensemble { members } => ModelKind::Ensemble {
                members: members
                    .iter()
                    .enumerate()
                    .map(|(i, m)| m.reseeded(derive_seed(seed, &[i as u64])))
                    .collect(),
            },
            k => k.clone(),
        };
        Self { kind, feature_subset: self.feature_subset.clone(), seed }
    }

    pub fn validate(&self, width: usize) -> Result<(), RegressionError> {
        self.feature_subset.validate(width)?;
        match &self.kind {
            ModelKind::DecisionTree(p) => {
                if p.min_leaf == 0 || p.max_depth == Some(0) {
                    return Err(RegressionError::InvalidHyperparameter(
                        "decision tree needs min_leaf >= 1 and max_depth >= 1".into(),
                    ));
                }
                Ok(())
            }
            ModelKind::RandomForest(p) | ModelKind::ExtraTrees(p) => p.validate(),
            ModelKind::GradientBoosted(p) => p.validate(),
            ModelKind::Mlp(p) => p.validate(),
            ModelKind::Svr(p) => p.validate(),
            ModelKind::Ensemble { members } => {
                if members.is_empty() {
                    return Err(RegressionError::InvalidHyperparameter("ensemble has no members".into()));
                }
                members.iter().try_for_each(|m| m.validate(width))
            }
            ModelKind::MedianBaseline => Ok(()),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {}", self.label(), self.feature_subset.label())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "model", rename_all = "snake_case")]
enum Learner {
    Tree(Tree),
    Forest(Forest),
    Boosted(Boosted),
    Mlp(MlpRegressor),
    Svr(LinearSvr),
    Ensemble(Vec<TrainedModel>),
    Baseline(MedianBaseline),
}

/// A fitted model. Immutable; safe to share across threads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    spec: ModelSpec,
    n_inputs: usize,
    learner: Learner,
}

pub fn fit(spec: &ModelSpec, train: &Dataset) -> Result<TrainedModel, RegressionError> {
    fit_design(spec, &train.design())
}

pub fn fit_design(spec: &ModelSpec, train: &Design) -> Result<TrainedModel, RegressionError> {
    if train.n_rows() == 0 {
        return Err(RegressionError::EmptyTraining);
    }
    spec.validate(train.n_cols())?;
    let y = train.targets();
    let cols = || train.columns(&spec.feature_subset.indices());
    let learner = match &spec.kind {
        ModelKind::DecisionTree(p) => {
            let params = GrowParams {
                max_depth: p.max_depth,
                min_leaf: p.min_leaf,
                max_features: usize::MAX,
                rule: ThresholdRule::Best,
            };
            let mut rows: Vec<u32> = (0..y.len() as u32).collect();
            Learner::Tree(tree::grow(&cols(), y, &mut rows, params, None))
        }
        ModelKind::RandomForest(p) => {
            Learner::Forest(forest::fit_forest(&cols(), y, p, ForestKind::Random, spec.seed))
        }
        ModelKind::ExtraTrees(p) => Learner::Forest(forest::fit_forest(&cols(), y, p, ForestKind::Extra, spec.seed)),
        ModelKind::GradientBoosted(p) => Learner::Boosted(boosting::fit_boosted(&cols(), y, p)),
        ModelKind::Mlp(p) => Learner::Mlp(mlp::fit_mlp(&cols(), y, p, spec.seed)),
        ModelKind::Svr(p) => Learner::Svr(svr::fit_svr(&cols(), y, p, spec.seed)),
        ModelKind::Ensemble { members } => Learner::Ensemble(
            members.iter().map(|m| fit_design(m, train)).collect::<Result<_, _>>()?,
        ),
        ModelKind::MedianBaseline => Learner::Baseline(baseline::fit_baseline(y, train.foods())),
    };
    Ok(TrainedModel { spec: spec.clone(), n_inputs: train.n_cols(), learner })
}

impl TrainedModel {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    /// Estimate for one canonical feature vector.
    pub fn predict(&self, features: &FeatureVector) -> Result<f64, RegressionError> {
        let food = features
            .food()
            .ok_or_else(|| RegressionError::InvalidSample("food type one-hot is not valid".into()))?;
        self.predict_row(features.as_slice(), food)
    }

    /// Estimate for a raw input row; `food` is only read by the baseline.
    pub fn predict_row(&self, row: &[f64], food: FoodCategory) -> Result<f64, RegressionError> {
        if row.len() != self.n_inputs {
            return Err(RegressionError::WidthMismatch { expected: self.n_inputs, found: row.len() });
        }
        let raw = self.raw(row, food)?;
        if !raw.is_finite() {
            return Err(RegressionError::NonFinitePrediction);
        }
        Ok(raw.max(0.0))
    }

    fn raw(&self, row: &[f64], food: FoodCategory) -> Result<f64, RegressionError> {
        let x: Vec<f64> = match &self.learner {
            Learner::Ensemble(_) | Learner::Baseline(_) => Vec::new(),
            _ => self.spec.feature_subset.indices().iter().map(|&i| row[i]).collect(),
        };
        Ok(match &self.learner {
            Learner::Tree(t) => t.predict(&x),
            Learner::Forest(f) => f.predict(&x),
            Learner::Boosted(b) => b.predict(&x),
            Learner::Mlp(m) => m.predict(&x),
            Learner::Svr(s) => s.predict(&x),
            Learner::Ensemble(members) => {
                let mut sum = 0.0;
                for m in members {
                    sum += m.predict_row(row, food)?;
                }
                sum / members.len() as f64
            }
            Learner::Baseline(b) => b.predict(food),
        })
    }

    /// Predictions for every row, in row order.
    pub fn predict_design(&self, design: &Design) -> Result<Vec<f64>, RegressionError> {
        (0..design.n_rows())
            .into_par_iter()
            .map(|i| self.predict_row(design.row(i), design.foods()[i]))
            .collect()
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<f64>, RegressionError> {
        self.predict_design(&data.design())
    }

    /// Number of gradient-boosting rounds, for boosted models.
    pub fn boosting_rounds(&self) -> Option<usize> {
        match &self.learner {
            Learner::Boosted(b) => Some(b.rounds()),
            _ => None,
        }
    }

    /// Boosted prediction from the first `rounds` trees (unclamped).
    pub fn predict_boosting_stage(&self, row: &[f64], rounds: usize) -> Option<f64> {
        match &self.learner {
            Learner::Boosted(b) if rounds <= b.rounds() => {
                let x: Vec<f64> = self.spec.feature_subset.indices().iter().map(|&i| row[i]).collect();
                Some(b.predict_rounds(&x, rounds))
            }
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Envelope<'a> {
            format_version: u32,
            spec: &'a ModelSpec,
            parameters: Parameters<'a>,
        }
        #[derive(Serialize)]
        struct Parameters<'a> {
            n_inputs: usize,
            learner: &'a Learner,
        }
        let env = Envelope {
            format_version: MODEL_FORMAT_VERSION,
            spec: &self.spec,
            parameters: Parameters { n_inputs: self.n_inputs, learner: &self.learner },
        };
        serde_json::to_string(&env).expect("models serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, RegressionError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Envelope {
            #[allow(dead_code)]
            format_version: u64,
            spec: ModelSpec,
            parameters: Parameters,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Parameters {
            n_inputs: usize,
            learner: Learner,
        }
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| RegressionError::CorruptModel(e.to_string()))?;
        let found = value
            .get("format_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| RegressionError::CorruptModel("missing format_version".into()))?;
        if found > MODEL_FORMAT_VERSION as u64 || found == 0 {
            return Err(RegressionError::VersionMismatch { found, supported: MODEL_FORMAT_VERSION });
        }
        let env: Envelope =
            serde_json::from_value(value).map_err(|e| RegressionError::CorruptModel(e.to_string()))?;
        let model = TrainedModel {
            spec: env.spec,
            n_inputs: env.parameters.n_inputs,
            learner: env.parameters.learner,
        };
        model.check_well_formed()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), RegressionError> {
        std::fs::write(path, self.to_json() + "\n")
            .map_err(|source| RegressionError::Io { path: path.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self, RegressionError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| RegressionError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    fn check_well_formed(&self) -> Result<(), RegressionError> {
        let corrupt = |m: &str| Err(RegressionError::CorruptModel(m.into()));
        if self.spec.validate(self.n_inputs).is_err() {
            return corrupt("spec is inconsistent with the input width");
        }
        let p = self.spec.feature_subset.len();
        let ok = match (&self.spec.kind, &self.learner) {
            (ModelKind::DecisionTree(_), Learner::Tree(t)) => t.is_well_formed(p),
            (ModelKind::RandomForest(_) | ModelKind::ExtraTrees(_), Learner::Forest(f)) => {
                !f.trees.is_empty() && f.trees.iter().all(|t| t.is_well_formed(p))
            }
            (ModelKind::GradientBoosted(_), Learner::Boosted(b)) => {
                b.init.is_finite() && b.shrinkage.is_finite() && b.trees.iter().all(|t| t.is_well_formed(p))
            }
            (ModelKind::Mlp(_), Learner::Mlp(m)) => {
                m.net.is_well_formed() && m.net.input_len() == p && m.x_scaler.is_well_formed(p)
            }
            (ModelKind::Svr(_), Learner::Svr(s)) => {
                s.weights.len() == p && s.x_scaler.is_well_formed(p) && s.bias.is_finite()
            }
            (ModelKind::Ensemble { members }, Learner::Ensemble(fitted)) => {
                members.len() == fitted.len()
                    && fitted.iter().zip(members).all(|(m, s)| &m.spec == s && m.n_inputs == self.n_inputs)
                    && fitted.iter().all(|m| m.check_well_formed().is_ok())
            }
            (ModelKind::MedianBaseline, Learner::Baseline(b)) => {
                b.global.is_finite() && b.per_food.values().all(|v| v.is_finite())
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            corrupt("learned parameters do not match the model spec")
        }
    }
}
