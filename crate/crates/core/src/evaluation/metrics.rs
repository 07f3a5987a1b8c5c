use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mae: f64,
    pub rmse: f64,
    /// Fraction of estimates strictly within `epsilon` grams of the truth.
    pub accuracy: f64,
    pub n: usize,
}

pub fn compute_metrics(predictions: &[f64], truths: &[f64], epsilon: f64) -> Result<Metrics, EvalError> {
    if predictions.len() != truths.len() {
        return Err(EvalError::LengthMismatch { left: predictions.len(), right: truths.len() });
    }
    if predictions.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n = predictions.len();
    let (mut abs, mut sq, mut hits) = (0.0, 0.0, 0usize);
    for (p, t) in predictions.iter().zip(truths) {
        let e = (p - t).abs();
        abs += e;
        sq += e * e;
        hits += (e < epsilon) as usize;
    }
    Ok(Metrics {
        mae: abs / n as f64,
        rmse: (sq / n as f64).sqrt(),
        accuracy: hits as f64 / n as f64,
        n,
    })
}

/// Mean and sample standard deviation (n − 1 denominator; 0 for one value).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_predictions() {
        let m = compute_metrics(&[1.0, 2.0], &[1.0, 2.0], 50.0).unwrap();
        assert_eq!((m.mae, m.rmse, m.accuracy, m.n), (0.0, 0.0, 1.0, 2));
    }

    #[test]
    fn strict_epsilon_boundary() {
        let truth = [100.0, 100.0, 100.0];
        let pred = [149.9, 150.0, 200.0];
        let m = compute_metrics(&pred, &truth, 50.0).unwrap();
        assert_eq!(m.accuracy, 1.0 / 3.0);
    }

    #[test]
    fn hand_arithmetic() {
        let m = compute_metrics(&[130.0, 60.0], &[100.0, 100.0], 50.0).unwrap();
        assert_eq!(m.mae, 35.0);
        assert!((m.rmse - 1250f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn input_errors() {
        assert!(matches!(compute_metrics(&[1.0], &[], 1.0), Err(EvalError::LengthMismatch { .. })));
        assert!(matches!(compute_metrics(&[], &[], 1.0), Err(EvalError::EmptyInput)));
    }

    #[test]
    fn sample_sd() {
        let (m, s) = mean_sd(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        assert!((s - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_sd(&[3.0]), (3.0, 0.0));
    }

    proptest! {
        #[test]
        fn mae_le_rmse_and_accuracy_monotone(
            pairs in prop::collection::vec((0.0f64..500.0, 0.0f64..500.0), 1..60),
            e1 in 0.1f64..100.0, e2 in 0.1f64..100.0,
        ) {
            let (p, t): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let a = compute_metrics(&p, &t, lo).unwrap();
            let b = compute_metrics(&p, &t, hi).unwrap();
            prop_assert!(a.mae <= a.rmse * (1.0 + 1e-12) + 1e-12);
            prop_assert!(a.accuracy <= b.accuracy);
            prop_assert!((0.0..=1.0).contains(&a.accuracy));
        }
    }
}
