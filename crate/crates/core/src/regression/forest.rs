//! Random forests (bootstrap + best splits) and extremely randomized trees
//! (full sample + random thresholds). Trees are grown in parallel, each
//! from its own derived stream, and collected in index order.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, GrowParams, ThresholdRule, Tree};
use super::RegressionError;
use crate::rng::sub_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// ⌈√p⌉ of the p active columns.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, p: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((p as f64).sqrt().ceil() as usize).max(1),
            MaxFeatures::All => p,
            MaxFeatures::Count(k) => k.min(p),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    pub max_features: MaxFeatures,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_trees: 200, min_leaf: 2, max_depth: None, max_features: MaxFeatures::Sqrt }
    }
}

impl ForestParams {
    pub(crate) fn validate(&self) -> Result<(), RegressionError> {
        if self.n_trees == 0 {
            return Err(RegressionError::InvalidHyperparameter("n_trees must be at least 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(RegressionError::InvalidHyperparameter("min_leaf must be at least 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(RegressionError::InvalidHyperparameter("max_depth must be at least 1".into()));
        }
        if self.max_features == MaxFeatures::Count(0) {
            return Err(RegressionError::InvalidHyperparameter("max_features must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub(crate) trees: Vec<Tree>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForestKind {
    Random,
    Extra,
}

pub fn fit_forest(cols: &[Vec<f64>], y: &[f64], params: &ForestParams, kind: ForestKind, seed: u64) -> Forest {
    let n = y.len();
    let grow_params = GrowParams {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        max_features: params.max_features.resolve(cols.len()),
        rule: match kind {
            ForestKind::Random => ThresholdRule::Best,
            ForestKind::Extra => ThresholdRule::Random,
        },
    };
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = sub_rng(seed, &[t as u64]);
            let mut rows: Vec<u32> = match kind {
                ForestKind::Random => (0..n).map(|_| rng.random_range(0..n as u32)).collect(),
                ForestKind::Extra => (0..n as u32).collect(),
            };
            grow(cols, y, &mut rows, grow_params, Some(&mut rng))
        })
        .collect();
    Forest { trees }
}

impl Forest {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;

    fn data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = rng_from(seed);
        let cols: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
        let y = (0..n).map(|i| 100.0 * cols[0][i] + 20.0 * cols[1][i] * cols[2][i]).collect();
        (cols, y)
    }

    #[test]
    fn sqrt_rounds_up() {
        assert_eq!(MaxFeatures::Sqrt.resolve(20), 5);
        assert_eq!(MaxFeatures::Sqrt.resolve(16), 4);
        assert_eq!(MaxFeatures::Sqrt.resolve(1), 1);
        assert_eq!(MaxFeatures::Count(9).resolve(3), 3);
    }

    #[test]
    fn forests_learn_a_smooth_function() {
        let (cols, y) = data(400, 1);
        let (tcols, ty) = data(200, 2);
        let p = ForestParams { n_trees: 40, ..Default::default() };
        let mean = ty.iter().sum::<f64>() / ty.len() as f64;
        let base: f64 = ty.iter().map(|v| (v - mean).abs()).sum::<f64>() / ty.len() as f64;
        for kind in [ForestKind::Random, ForestKind::Extra] {
            let f = fit_forest(&cols, &y, &p, kind, 5);
            let mae: f64 = (0..ty.len())
                .map(|i| (f.predict(&[tcols[0][i], tcols[1][i], tcols[2][i]]) - ty[i]).abs())
                .sum::<f64>()
                / ty.len() as f64;
            assert!(mae < 0.25 * base, "{kind:?}: mae {mae} vs spread {base}");
        }
    }

    #[test]
    fn extra_trees_see_every_row() {
        // Without bootstrap and with min_leaf 1, every ET tree fits the
        // training targets exactly.
        let (cols, y) = data(50, 3);
        let p = ForestParams { n_trees: 5, min_leaf: 1, ..Default::default() };
        let f = fit_forest(&cols, &y, &p, ForestKind::Extra, 1);
        for i in 0..50 {
            let x = [cols[0][i], cols[1][i], cols[2][i]];
            assert!((f.predict(&x) - y[i]).abs() < 1e-9);
        }
    }
}
