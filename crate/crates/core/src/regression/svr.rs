//! Linear support vector regression: ε-insensitive loss plus an L2 penalty,
//! minimized by stochastic subgradient descent with iterate averaging.
//!
//! This is a linear model only; no kernel is applied.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::mlp::mean_std;
use super::scaler::Standardizer;
use super::RegressionError;
use crate::rng::sub_rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvrParams {
    /// Half-width of the insensitive tube, in grams.
    pub epsilon: f64,
    pub l2: f64,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for SvrParams {
    fn default() -> Self {
        Self { epsilon: 5.0, l2: 1e-3, epochs: 200, learning_rate: 0.01 }
    }
}

impl SvrParams {
    pub(crate) fn validate(&self) -> Result<(), RegressionError> {
        let ok = self.epsilon.is_finite()
            && self.epsilon >= 0.0
            && self.l2.is_finite()
            && self.l2 >= 0.0
            && self.epochs >= 1
            && self.learning_rate.is_finite()
            && self.learning_rate > 0.0;
        if ok {
            Ok(())
        } else {
            Err(RegressionError::InvalidHyperparameter(format!("invalid svr parameters {self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSvr {
    pub(crate) x_scaler: Standardizer,
    pub(crate) y_mean: f64,
    pub(crate) y_std: f64,
    pub(crate) weights: Vec<f64>,
    pub(crate) bias: f64,
}

pub fn fit_svr(cols: &[Vec<f64>], y: &[f64], params: &SvrParams, seed: u64) -> LinearSvr {
    let x_scaler = Standardizer::fit(cols);
    let rows = x_scaler.transform_columns(cols);
    let (y_mean, y_std) = mean_std(y);
    let ys: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_std).collect();
    let eps = params.epsilon / y_std;
    let d = cols.len();
    let (mut w, mut b) = (vec![0.0; d], 0.0);
    // Averages over the second half of training.
    let (mut w_avg, mut b_avg, mut n_avg) = (vec![0.0; d], 0.0, 0.0);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    for epoch in 0..params.epochs {
        order.shuffle(&mut sub_rng(seed, &[epoch as u64]));
        let eta = params.learning_rate / ((epoch + 1) as f64).sqrt();
        for &i in &order {
            let x = &rows[i];
            let r = b + x.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>() - ys[i];
            let g = if r > eps {
                1.0
            } else if r < -eps {
                -1.0
            } else {
                0.0
            };
            for (wk, xk) in w.iter_mut().zip(x) {
                *wk -= eta * (g * xk + params.l2 * *wk);
            }
            b -= eta * g;
            if 2 * epoch >= params.epochs {
                n_avg += 1.0;
                for (a, wk) in w_avg.iter_mut().zip(&w) {
                    *a += (wk - *a) / n_avg;
                }
                b_avg += (b - b_avg) / n_avg;
            }
        }
    }
    LinearSvr { x_scaler, y_mean, y_std, weights: w_avg, bias: b_avg }
}

impl LinearSvr {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let z = self.x_scaler.transform(x);
        let s = self.bias + z.iter().zip(&self.weights).map(|(a, c)| a * c).sum::<f64>();
        s * self.y_std + self.y_mean
    }
}
