use serde::{Deserialize, Serialize};

/// Per-column z-scoring fit on training data. Constant columns keep a unit
/// scale so they map to zero instead of dividing by zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(cols: &[Vec<f64>]) -> Self {
        let (mean, std) = cols.iter().map(|c| super::mlp::mean_std(c)).unzip();
        Self { mean, std }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.std).map(|((v, m), s)| (v - m) / s).collect()
    }

    /// Row-major standardized copy of column-major data.
    pub fn transform_columns(&self, cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = cols.first().map_or(0, |c| c.len());
        (0..n)
            .map(|i| {
                cols.iter()
                    .enumerate()
                    .map(|(j, c)| (c[i] - self.mean[j]) / self.std[j])
                    .collect()
            })
            .collect()
    }

    pub(crate) fn is_well_formed(&self, width: usize) -> bool {
        self.mean.len() == width
            && self.std.len() == width
            && self.mean.iter().all(|m| m.is_finite())
            && self.std.iter().all(|s| s.is_finite() && *s > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mean_unit_variance() {
        let cols = vec![vec![1.0, 2.0, 3.0, 4.0], vec![5.0, 5.0, 5.0, 5.0]];
        let s = Standardizer::fit(&cols);
        let rows = s.transform_columns(&cols);
        let m: f64 = rows.iter().map(|r| r[0]).sum::<f64>() / 4.0;
        let v: f64 = rows.iter().map(|r| r[0] * r[0]).sum::<f64>() / 4.0;
        assert!(m.abs() < 1e-15 && (v - 1.0).abs() < 1e-12);
        assert!(rows.iter().all(|r| r[1] == 0.0));
        assert_eq!(s.transform(&[2.5, 7.0]), vec![0.0, 2.0]);
    }
}
