//! Device classification from the plate aspect ratio alone.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::regression::mlp::{train, Activation, Head, Network, TrainSchedule};
use crate::rng::{derive_seed, sub_rng};
use crate::session::Device;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewAngleResult {
    /// Held-out accuracy in [0, 1].
    pub accuracy: f64,
    pub n_train: usize,
    pub n_test: usize,
}

pub const MIN_VIEW_ANGLE_SAMPLES: usize = 20;

/// Stratified seeded 80/20 split, then a 1-8-1 tanh network with a
/// logistic output trained on the standardized PAR.
pub fn view_angle_experiment(data: &[(f64, Device)], seed: u64) -> Result<ViewAngleResult, EvalError> {
    if data.len() < MIN_VIEW_ANGLE_SAMPLES {
        return Err(EvalError::TooFewSamples { n: data.len(), k: MIN_VIEW_ANGLE_SAMPLES });
    }
    let label = |d: Device| match d {
        Device::Aim => Ok(0.0),
        Device::EButton => Ok(1.0),
        other => Err(EvalError::InvalidConfig(format!("view-angle data must be aim or ebutton, got {other}"))),
    };
    if let Some(bad) = data.iter().find(|(p, _)| !p.is_finite()) {
        return Err(EvalError::InvalidConfig(format!("non-finite aspect ratio {}", bad.0)));
    }
    let mut classes: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &(_, d)) in data.iter().enumerate() {
        classes[label(d)? as usize].push(i);
    }
    if classes.iter().any(|c| c.is_empty()) {
        return Err(EvalError::SingleClass);
    }
    let (mut train_idx, mut test_idx) = (Vec::new(), Vec::new());
    for (c, members) in classes.iter_mut().enumerate() {
        members.shuffle(&mut sub_rng(seed, &[0x5117, c as u64]));
        let n_test = ((members.len() as f64 * 0.2).round() as usize).clamp(1, members.len().max(2) - 1);
        test_idx.extend_from_slice(&members[..n_test]);
        train_idx.extend_from_slice(&members[n_test..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    let train_par: Vec<f64> = train_idx.iter().map(|&i| data[i].0).collect();
    let mean = train_par.iter().sum::<f64>() / train_par.len() as f64;
    let sd = (train_par.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / train_par.len() as f64).sqrt();
    let sd = if sd > 0.0 { sd } else { 1.0 };
    let xs: Vec<Vec<f64>> = train_par.iter().map(|p| vec![(p - mean) / sd]).collect();
    let ys: Vec<f64> = train_idx.iter().map(|&i| label(data[i].1)).collect::<Result<_, _>>()?;

    let mut net = Network::new(&[1, 8, 1], Activation::Tanh, Head::Logistic, derive_seed(seed, &[1]));
    let schedule = TrainSchedule { epochs: 300, learning_rate: 0.01, batch_size: 16 };
    train(&mut net, &xs, &ys, schedule, derive_seed(seed, &[2]));

    let mut correct = 0;
    for &i in &test_idx {
        let p = net.forward(&[(data[i].0 - mean) / sd]);
        let predicted = if p >= 0.5 { 1.0 } else { 0.0 };
        correct += (predicted == label(data[i].1)?) as usize;
    }
    Ok(ViewAngleResult {
        accuracy: correct as f64 / test_idx.len() as f64,
        n_train: train_idx.len(),
        n_test: test_idx.len(),
    })
}
