//! Permutation importance with score s = −MAE.
//!
//! i_k = s − (1/M) Σ_m s_{m,k}, where s_{m,k} is the score after shuffling
//! feature group k across rows with the m-th seeded permutation.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::compute_metrics;
use super::{EvalConfig, EvalError};
use crate::category::FOOD_COUNT;
use crate::features::{AWR, FEATURE_COUNT, FRR, NP, PAR, RD};
use crate::regression::{Design, TrainedModel};
use crate::rng::sub_rng;

/// Columns shuffled together as one reported feature.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureGroup {
    pub name: String,
    pub columns: Vec<usize>,
}

impl FeatureGroup {
    pub fn new(name: &str, columns: Vec<usize>) -> Self {
        Self { name: name.to_string(), columns }
    }
}

/// FT (all fifteen one-hot columns jointly), FRR, NP, AWR, RD, PAR, then one
/// group per column beyond the canonical twenty.
pub fn default_groups(width: usize) -> Vec<FeatureGroup> {
    let mut g = vec![
        FeatureGroup::new("FT", (0..FOOD_COUNT).collect()),
        FeatureGroup::new("FRR", vec![FRR]),
        FeatureGroup::new("NP", vec![NP]),
        FeatureGroup::new("AWR", vec![AWR]),
        FeatureGroup::new("RD", vec![RD]),
        FeatureGroup::new("PAR", vec![PAR]),
    ];
    g.extend((FEATURE_COUNT..width).map(|c| FeatureGroup::new(&format!("extra_{}", c - FEATURE_COUNT), vec![c])));
    g
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub name: String,
    /// i_k in grams of MAE.
    pub importance: f64,
    /// Percentage of the summed positive importances; `None` when i_k ≤ 0.
    pub share_pct: Option<f64>,
    /// The M shuffled scores s_{m,k}.
    pub shuffled_scores: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub reference_score: f64,
    pub features: Vec<FeatureImportance>,
}

impl ImportanceReport {
    pub fn get(&self, name: &str) -> Option<&FeatureImportance> {
        self.features.iter().find(|f| f.name == name)
    }

    /// Feature names ordered by decreasing importance (stable on ties).
    pub fn ranking(&self) -> Vec<&str> {
        let mut v: Vec<&FeatureImportance> = self.features.iter().collect();
        v.sort_by(|a, b| b.importance.total_cmp(&a.importance));
        v.into_iter().map(|f| f.name.as_str()).collect()
    }
}

pub fn permutation_importance(
    model: &TrainedModel,
    data: &Design,
    config: &EvalConfig,
) -> Result<ImportanceReport, EvalError> {
    permutation_importance_groups(model, data, &default_groups(data.n_cols()), config)
}

pub fn permutation_importance_groups(
    model: &TrainedModel,
    data: &Design,
    groups: &[FeatureGroup],
    config: &EvalConfig,
) -> Result<ImportanceReport, EvalError> {
    config.validate()?;
    if data.n_rows() == 0 {
        return Err(EvalError::EmptyInput);
    }
    for g in groups {
        if let Some(&c) = g.columns.iter().find(|&&c| c >= data.n_cols()) {
            return Err(EvalError::InvalidConfig(format!("group {} names column {c} past the input width", g.name)));
        }
    }
    let score = |d: &Design| -> Result<f64, EvalError> {
        let pred = model.predict_design(d)?;
        Ok(-compute_metrics(&pred, d.targets(), config.epsilon)?.mae)
    };
    let reference = score(data)?;
    let m = config.m_repeats;
    let jobs: Vec<(usize, usize)> = (0..groups.len()).flat_map(|k| (0..m).map(move |r| (k, r))).collect();
    let scores: Vec<f64> = jobs
        .par_iter()
        .map(|&(k, r)| {
            let mut perm: Vec<usize> = (0..data.n_rows()).collect();
            perm.shuffle(&mut sub_rng(config.seed, &[k as u64, r as u64]));
            let mut shuffled = data.clone();
            for (i, &src) in perm.iter().enumerate() {
                for &c in &groups[k].columns {
                    shuffled.set_value(i, c, data.value(src, c));
                }
            }
            score(&shuffled)
        })
        .collect::<Result<_, _>>()?;

    let mut features: Vec<FeatureImportance> = groups
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let s = scores[k * m..(k + 1) * m].to_vec();
            let importance = reference - s.iter().sum::<f64>() / m as f64;
            FeatureImportance { name: g.name.clone(), importance, share_pct: None, shuffled_scores: s }
        })
        .collect();
    let positive: f64 = features.iter().map(|f| f.importance).filter(|&i| i > 0.0).sum();
    if positive > 0.0 {
        for f in &mut features {
            if f.importance > 0.0 {
                f.share_pct = Some(100.0 * f.importance / positive);
            }
        }
    }
    Ok(ImportanceReport { reference_score: reference, features })
}
