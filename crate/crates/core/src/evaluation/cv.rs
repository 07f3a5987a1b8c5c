//! k-fold cross-validation with seeded, reproducible fold assignment.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, mean_sd, Metrics};
use super::{EvalConfig, EvalError};
use crate::regression::{fit_design, Design, ModelSpec};
use crate::rng::{derive_seed, sub_rng};

/// Splits `0..n` into `k` test folds whose sizes differ by at most one,
/// after a seeded shuffle.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 || k > n {
        return Err(EvalError::TooFewSamples { n, k });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut sub_rng(seed, &[0xf01d]));
    Ok(split_even(&idx, k))
}

fn split_even<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let (base, extra) = (items.len() / k, items.len() % k);
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + (f < extra) as usize;
        out.push(items[start..start + len].to_vec());
        start += len;
    }
    out
}

/// Folds that never split a group: groups are shuffled and dealt out so
/// that fold sizes (in samples) stay as even as a greedy fill allows.
pub fn group_fold_assignment(groups: &[String], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    let mut by_group: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        by_group.entry(g.as_str()).or_default().push(i);
    }
    if k < 2 || k > by_group.len() {
        return Err(EvalError::TooFewSamples { n: by_group.len(), k });
    }
    let mut members: Vec<Vec<usize>> = by_group.into_values().collect();
    members.shuffle(&mut sub_rng(seed, &[0x6209]));
    // Largest first, each into the currently smallest fold (lowest index on ties).
    members.sort_by_key(|m| std::cmp::Reverse(m.len()));
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for m in members {
        let target = (0..k).min_by_key(|&f| (folds[f].len(), f)).expect("k >= 2");
        folds[target].extend(m);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<Metrics>,
    pub mean_mae: f64,
    pub sd_mae: f64,
    pub mean_rmse: f64,
    pub sd_rmse: f64,
    pub mean_accuracy: f64,
    /// Out-of-fold prediction for every sample, in dataset order.
    pub predictions: Vec<f64>,
}

/// Fits `spec` on each training fold and scores it on the held-out fold.
///
/// Fold `f` trains with a seed derived from the model spec's seed and `f`, so
/// folds are independent of scheduling. Any standardization happens inside
/// `fit`, which only ever sees the training fold.
pub fn kfold_evaluate(data: &Design, spec: &ModelSpec, config: &EvalConfig) -> Result<CvReport, EvalError> {
    config.validate()?;
    let n = data.n_rows();
    let folds = if config.group_by_session {
        group_fold_assignment(data.groups(), config.k, config.seed)?
    } else {
        fold_assignment(n, config.k, config.seed)?
    };
    let results: Vec<(Vec<usize>, Vec<f64>, Metrics)> = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let mut in_test = vec![false; n];
            test.iter().for_each(|&i| in_test[i] = true);
            let train: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
            let model = fit_design(&spec.reseeded(derive_seed(spec.seed, &[f as u64])), &data.select(&train))?;
            let test_design = data.select(test);
            let pred = model.predict_design(&test_design)?;
            let m = compute_metrics(&pred, test_design.targets(), config.epsilon)?;
            Ok((test.clone(), pred, m))
        })
        .collect::<Result<_, EvalError>>()?;

    let mut predictions = vec![f64::NAN; n];
    for (test, pred, _) in &results {
        for (&i, &p) in test.iter().zip(pred) {
            predictions[i] = p;
        }
    }
    let fold_metrics: Vec<Metrics> = results.into_iter().map(|r| r.2).collect();
    let (mean_mae, sd_mae) = mean_sd(&fold_metrics.iter().map(|m| m.mae).collect::<Vec<_>>());
    let (mean_rmse, sd_rmse) = mean_sd(&fold_metrics.iter().map(|m| m.rmse).collect::<Vec<_>>());
    let (mean_accuracy, _) = mean_sd(&fold_metrics.iter().map(|m| m.accuracy).collect::<Vec<_>>());
    Ok(CvReport { folds: fold_metrics, mean_mae, sd_mae, mean_rmse, sd_rmse, mean_accuracy, predictions })
}
