use serde::{Deserialize, Serialize};

use crate::category::FoodCategory;
use crate::features::table::FeatureRow;
use crate::features::{FeatureVector, FEATURE_COUNT};
use crate::session::Phase;

use super::RegressionError;

/// One weighed food item.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSample {
    pub features: FeatureVector,
    pub weight_g: f64,
    pub food: FoodCategory,
    pub session_id: String,
    /// Unknown for rows read from a flat feature table.
    pub phase: Option<Phase>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<WeightSample>,
}

impl Dataset {
    pub fn new(samples: Vec<WeightSample>) -> Result<Self, RegressionError> {
        for (i, s) in samples.iter().enumerate() {
            if !(s.weight_g.is_finite() && s.weight_g >= 0.0) {
                return Err(RegressionError::InvalidSample(format!("sample {i}: weight {} g", s.weight_g)));
            }
            if !s.features.is_valid() || s.features.food() != Some(s.food) {
                return Err(RegressionError::InvalidSample(format!("sample {i}: invalid feature vector")));
            }
        }
        Ok(Self { samples })
    }

    /// Labelled rows of a feature table.
    pub fn from_rows(rows: &[FeatureRow]) -> Result<Self, RegressionError> {
        let samples = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let weight_g = r
                    .weight_g
                    .ok_or_else(|| RegressionError::InvalidSample(format!("row {i} has no weight")))?;
                Ok(WeightSample {
                    features: r.features,
                    weight_g,
                    food: r.food,
                    session_id: r.session.clone(),
                    phase: None,
                })
            })
            .collect::<Result<Vec<_>, RegressionError>>()?;
        Self::new(samples)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn design(&self) -> Design {
        let mut x = Vec::with_capacity(self.len() * FEATURE_COUNT);
        for s in &self.samples {
            x.extend_from_slice(s.features.as_slice());
        }
        Design {
            n_cols: FEATURE_COUNT,
            x,
            y: self.samples.iter().map(|s| s.weight_g).collect(),
            food: self.samples.iter().map(|s| s.food).collect(),
            group: self.samples.iter().map(|s| s.session_id.clone()).collect(),
        }
    }
}

/// Row-major numeric design matrix with targets and per-row metadata.
///
/// Usually the 20 canonical features, but any width is accepted so that
/// diagnostic columns can be appended.
#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    n_cols: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    food: Vec<FoodCategory>,
    group: Vec<String>,
}

impl Design {
    pub fn new(
        n_cols: usize,
        x: Vec<f64>,
        y: Vec<f64>,
        food: Vec<FoodCategory>,
        group: Vec<String>,
    ) -> Result<Self, RegressionError> {
        let n = y.len();
        if n_cols == 0 || x.len() != n * n_cols || food.len() != n || group.len() != n {
            return Err(RegressionError::InvalidSample("design dimensions disagree".into()));
        }
        Ok(Self { n_cols, x, y, food, group })
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn targets(&self) -> &[f64] {
        &self.y
    }

    pub fn foods(&self) -> &[FoodCategory] {
        &self.food
    }

    pub fn groups(&self) -> &[String] {
        &self.group
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.x[row * self.n_cols + col]
    }

    pub fn set_value(&mut self, row: usize, col: usize, v: f64) {
        self.x[row * self.n_cols + col] = v;
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Design {
        let mut x = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            x.extend_from_slice(self.row(i));
        }
        Design {
            n_cols: self.n_cols,
            x,
            y: indices.iter().map(|&i| self.y[i]).collect(),
            food: indices.iter().map(|&i| self.food[i]).collect(),
            group: indices.iter().map(|&i| self.group[i].clone()).collect(),
        }
    }

    /// Copy with one more column on the right.
    pub fn with_column(&self, values: &[f64]) -> Result<Design, RegressionError> {
        if values.len() != self.n_rows() {
            return Err(RegressionError::InvalidSample("appended column has the wrong length".into()));
        }
        let mut x = Vec::with_capacity(self.n_rows() * (self.n_cols + 1));
        for (i, v) in values.iter().enumerate() {
            x.extend_from_slice(self.row(i));
            x.push(*v);
        }
        Ok(Design { n_cols: self.n_cols + 1, x, ..self.clone() })
    }

    /// Column-major copy of the listed columns.
    pub(crate) fn columns(&self, indices: &[usize]) -> Vec<Vec<f64>> {
        indices
            .iter()
            .map(|&c| (0..self.n_rows()).map(|r| self.value(r, c)).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(food: FoodCategory, frr: f64, w: f64) -> WeightSample {
        WeightSample {
            features: FeatureVector::new(food, frr, 0.2, 2.0, false, 1.1).unwrap(),
            weight_g: w,
            food,
            session_id: "s".into(),
            phase: Some(Phase::Before),
        }
    }

    #[test]
    fn validation() {
        assert!(Dataset::new(vec![sample(FoodCategory::Yam, 0.1, -1.0)]).is_err());
        let mut bad = sample(FoodCategory::Yam, 0.1, 1.0);
        bad.food = FoodCategory::Ugali;
        assert!(Dataset::new(vec![bad]).is_err());
    }

    #[test]
    fn design_layout_select_and_append() {
        let d = Dataset::new(vec![sample(FoodCategory::Yam, 0.1, 5.0), sample(FoodCategory::Ugali, 0.3, 9.0)])
            .unwrap()
            .design();
        assert_eq!((d.n_rows(), d.n_cols()), (2, FEATURE_COUNT));
        assert_eq!(d.value(1, crate::features::FRR), 0.3);
        let s = d.select(&[1, 1, 0]);
        assert_eq!(s.targets(), &[9.0, 9.0, 5.0]);
        let wide = d.with_column(&[7.0, 8.0]).unwrap();
        assert_eq!(wide.n_cols(), FEATURE_COUNT + 1);
        assert_eq!(wide.row(1)[FEATURE_COUNT], 8.0);
        assert_eq!(&wide.row(1)[..FEATURE_COUNT], d.row(1));
        assert_eq!(d.columns(&[crate::features::FRR]), vec![vec![0.1, 0.3]]);
    }
}
