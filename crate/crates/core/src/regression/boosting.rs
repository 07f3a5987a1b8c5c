//! Least-squares gradient boosting: shallow trees fit to the current
//! residuals, each added with a shrinkage factor.

use serde::{Deserialize, Serialize};

use super::tree::{grow, GrowParams, ThresholdRule, Tree};
use super::RegressionError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostParams {
    pub n_rounds: usize,
    pub shrinkage: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self { n_rounds: 300, shrinkage: 0.05, max_depth: 3, min_leaf: 1 }
    }
}

impl BoostParams {
    pub(crate) fn validate(&self) -> Result<(), RegressionError> {
        if !(self.shrinkage > 0.0 && self.shrinkage <= 1.0) {
            return Err(RegressionError::InvalidHyperparameter(format!(
                "shrinkage must lie in (0, 1], got {}",
                self.shrinkage
            )));
        }
        if self.max_depth == 0 || self.min_leaf == 0 {
            return Err(RegressionError::InvalidHyperparameter(
                "boosting needs max_depth >= 1 and min_leaf >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Boosted {
    pub(crate) init: f64,
    pub(crate) shrinkage: f64,
    pub(crate) trees: Vec<Tree>,
}

pub fn fit_boosted(cols: &[Vec<f64>], y: &[f64], params: &BoostParams) -> Boosted {
    let n = y.len();
    let init = y.iter().sum::<f64>() / n as f64;
    let mut pred = vec![init; n];
    let mut resid = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.n_rounds);
    let grow_params = GrowParams {
        max_depth: Some(params.max_depth),
        min_leaf: params.min_leaf,
        max_features: usize::MAX,
        rule: ThresholdRule::Best,
    };
    let mut x = vec![0.0; cols.len()];
    for _ in 0..params.n_rounds {
        for i in 0..n {
            resid[i] = y[i] - pred[i];
        }
        let mut rows: Vec<u32> = (0..n as u32).collect();
        let tree = grow(cols, &resid, &mut rows, grow_params, None);
        for i in 0..n {
            for (j, c) in cols.iter().enumerate() {
                x[j] = c[i];
            }
            pred[i] += params.shrinkage * tree.predict(&x);
        }
        trees.push(tree);
    }
    Boosted { init, shrinkage: params.shrinkage, trees }
}

impl Boosted {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.predict_rounds(x, self.trees.len())
    }

    /// Prediction using only the first `rounds` trees.
    pub fn predict_rounds(&self, x: &[f64], rounds: usize) -> f64 {
        self.init + self.trees[..rounds].iter().map(|t| self.shrinkage * t.predict(x)).sum::<f64>()
    }

    pub fn rounds(&self) -> usize {
        self.trees.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use rand::Rng;

    #[test]
    fn zero_rounds_predicts_the_mean_and_mse_never_rises() {
        let mut rng = rng_from(11);
        let n = 150;
        let cols: Vec<Vec<f64>> = (0..2).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
        let y: Vec<f64> = (0..n).map(|i| (6.0 * cols[0][i]).sin() * 50.0 + 30.0 * cols[1][i]).collect();
        let mean = y.iter().sum::<f64>() / n as f64;

        let none = fit_boosted(&cols, &y, &BoostParams { n_rounds: 0, ..Default::default() });
        assert_eq!(none.predict(&[0.3, 0.3]), mean);

        let m = fit_boosted(&cols, &y, &BoostParams { n_rounds: 60, shrinkage: 0.1, ..Default::default() });
        let mse = |k: usize| {
            (0..n).map(|i| (m.predict_rounds(&[cols[0][i], cols[1][i]], k) - y[i]).powi(2)).sum::<f64>() / n as f64
        };
        let curve: Vec<f64> = (0..=60).map(mse).collect();
        for w in curve.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
        }
        assert!(curve[60] < 0.2 * curve[0]);
    }
}
