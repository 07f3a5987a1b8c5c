//! Fully connected networks trained with mini-batch Adam.
//!
//! All weights and biases live in one flat vector so the optimizer and the
//! finite-difference check can treat them uniformly. Layer `l` stores its
//! `out x in` weight matrix row-major, followed by `out` biases.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::scaler::Standardizer;
use super::RegressionError;
use crate::rng::{rng_from, sub_rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative written in terms of the activation output.
    fn slope(self, a: f64) -> f64 {
        match self {
            Activation::Relu => (a > 0.0) as u8 as f64,
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

/// Output head and matching loss. Both give dL/dz = (prediction − target)
/// at the output pre-activation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Head {
    /// Linear output, loss ½(ŷ − y)².
    SquaredError,
    /// Sigmoid output, binary cross-entropy.
    Logistic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    sizes: Vec<usize>,
    activation: Activation,
    head: Head,
    params: Vec<f64>,
}

impl Network {
    /// Glorot-uniform weights (He-uniform for ReLU), zero biases.
    pub fn new(sizes: &[usize], activation: Activation, head: Head, seed: u64) -> Self {
        assert!(sizes.len() >= 2 && sizes.iter().all(|&s| s > 0));
        assert_eq!(*sizes.last().unwrap(), 1, "single-output networks only");
        let mut rng = rng_from(seed);
        let mut params = Vec::new();
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = match activation {
                Activation::Relu => (6.0 / fan_in as f64).sqrt(),
                Activation::Tanh => (6.0 / (fan_in + fan_out) as f64).sqrt(),
            };
            params.extend((0..fan_in * fan_out).map(|_| rng.random_range(-limit..limit)));
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }
        Self { sizes: sizes.to_vec(), activation, head, params }
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn input_len(&self) -> usize {
        self.sizes[0]
    }

    pub(crate) fn is_well_formed(&self) -> bool {
        self.sizes.len() >= 2
            && self.sizes.iter().all(|&s| s > 0)
            && self.sizes.last() == Some(&1)
            && self.params.len() == self.sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum::<usize>()
            && self.params.iter().all(|p| p.is_finite())
    }

    /// Activations of every layer, input included.
    fn forward_all(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![x.to_vec()];
        let mut off = 0;
        let last = self.sizes.len() - 2;
        for (l, w) in self.sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &self.params[off..off + n_in * n_out];
            let bias = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
            let input = &acts[l];
            let out: Vec<f64> = (0..n_out)
                .map(|j| {
                    let z = bias[j] + dot(&weights[j * n_in..(j + 1) * n_in], input);
                    if l < last {
                        self.activation.apply(z)
                    } else {
                        match self.head {
                            Head::SquaredError => z,
                            Head::Logistic => sigmoid(z),
                        }
                    }
                })
                .collect();
            acts.push(out);
            off += n_in * n_out + n_out;
        }
        acts
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.sizes[0]);
        self.forward_all(x).last().unwrap()[0]
    }

    fn sample_loss(&self, pred: f64, target: f64) -> f64 {
        match self.head {
            Head::SquaredError => 0.5 * (pred - target).powi(2),
            Head::Logistic => {
                let p = pred.clamp(1e-12, 1.0 - 1e-12);
                -(target * p.ln() + (1.0 - target) * (1.0 - p).ln())
            }
        }
    }

    /// Mean loss over the batch; adds the gradient of that mean into `grad`.
    pub fn loss_and_gradient(&self, xs: &[&[f64]], ys: &[f64], grad: &mut [f64]) -> f64 {
        assert_eq!(xs.len(), ys.len());
        assert_eq!(grad.len(), self.params.len());
        let scale = 1.0 / xs.len() as f64;
        let mut loss = 0.0;
        let n_layers = self.sizes.len() - 1;
        let mut offsets = Vec::with_capacity(n_layers);
        let mut off = 0;
        for w in self.sizes.windows(2) {
            offsets.push(off);
            off += w[0] * w[1] + w[1];
        }
        for (x, &y) in xs.iter().zip(ys) {
            let acts = self.forward_all(x);
            let pred = acts[n_layers][0];
            loss += self.sample_loss(pred, y);
            // dL/dz for the current layer's outputs.
            let mut delta = vec![(pred - y) * scale];
            for l in (0..n_layers).rev() {
                let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
                let o = offsets[l];
                let input = &acts[l];
                for j in 0..n_out {
                    let d = delta[j];
                    if d == 0.0 {
                        continue;
                    }
                    let row = &mut grad[o + j * n_in..o + (j + 1) * n_in];
                    for (g, &a) in row.iter_mut().zip(input) {
                        *g += d * a;
                    }
                    grad[o + n_in * n_out + j] += d;
                }
                if l > 0 {
                    let weights = &self.params[o..o + n_in * n_out];
                    let mut prev = vec![0.0; n_in];
                    for j in 0..n_out {
                        let d = delta[j];
                        if d != 0.0 {
                            for (p, &w) in prev.iter_mut().zip(&weights[j * n_in..(j + 1) * n_in]) {
                                *p += d * w;
                            }
                        }
                    }
                    for (p, &a) in prev.iter_mut().zip(input) {
                        *p *= self.activation.slope(a);
                    }
                    delta = prev;
                }
            }
        }
        loss * scale
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Clone, Copy, Debug)]
pub struct TrainSchedule {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

/// Adam over shuffled mini-batches; the shuffle order comes from `seed`.
pub fn train(net: &mut Network, xs: &[Vec<f64>], ys: &[f64], schedule: TrainSchedule, seed: u64) {
    let (b1, b2, eps) = (0.9, 0.999, 1e-8);
    let n_params = net.params.len();
    let (mut m, mut v) = (vec![0.0; n_params], vec![0.0; n_params]);
    let mut grad = vec![0.0; n_params];
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut step = 0i32;
    for epoch in 0..schedule.epochs {
        order.shuffle(&mut sub_rng(seed, &[epoch as u64]));
        for batch in order.chunks(schedule.batch_size.max(1)) {
            let bx: Vec<&[f64]> = batch.iter().map(|&i| xs[i].as_slice()).collect();
            let by: Vec<f64> = batch.iter().map(|&i| ys[i]).collect();
            grad.iter_mut().for_each(|g| *g = 0.0);
            net.loss_and_gradient(&bx, &by, &mut grad);
            step += 1;
            let (c1, c2) = (1.0 - f64::powi(b1, step), 1.0 - f64::powi(b2, step));
            for k in 0..n_params {
                m[k] = b1 * m[k] + (1.0 - b1) * grad[k];
                v[k] = b2 * v[k] + (1.0 - b2) * grad[k] * grad[k];
                net.params[k] -= schedule.learning_rate * (m[k] / c1) / ((v[k] / c2).sqrt() + eps);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub activation: Activation,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self {
            hidden: vec![32, 16],
            epochs: 500,
            learning_rate: 1e-3,
            batch_size: 32,
            activation: Activation::Relu,
        }
    }
}

impl MlpParams {
    pub(crate) fn validate(&self) -> Result<(), RegressionError> {
        let bad = |m: &str| Err(RegressionError::InvalidHyperparameter(m.into()));
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden layers must be a nonempty list of positive sizes");
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be at least 1");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        Ok(())
    }
}

/// Regressor on standardized inputs and targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpRegressor {
    pub(crate) x_scaler: Standardizer,
    pub(crate) y_mean: f64,
    pub(crate) y_std: f64,
    pub(crate) net: Network,
}

pub fn fit_mlp(cols: &[Vec<f64>], y: &[f64], params: &MlpParams, seed: u64) -> MlpRegressor {
    let x_scaler = Standardizer::fit(cols);
    let rows = x_scaler.transform_columns(cols);
    let (y_mean, y_std) = mean_std(y);
    let ys: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_std).collect();
    let mut sizes = vec![cols.len()];
    sizes.extend(&params.hidden);
    sizes.push(1);
    let mut net = Network::new(&sizes, params.activation, Head::SquaredError, sub_rng_seed(seed, 0));
    let schedule = TrainSchedule {
        epochs: params.epochs,
        learning_rate: params.learning_rate,
        batch_size: params.batch_size,
    };
    train(&mut net, &rows, &ys, schedule, sub_rng_seed(seed, 1));
    MlpRegressor { x_scaler, y_mean, y_std, net }
}

fn sub_rng_seed(seed: u64, k: u64) -> u64 {
    crate::rng::derive_seed(seed, &[k])
}

/// Mean and population standard deviation; a zero spread is reported as 1.
pub(crate) fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    (mean, if sd > 0.0 { sd } else { 1.0 })
}

impl MlpRegressor {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let z = self.x_scaler.transform(x);
        self.net.forward(&z) * self.y_std + self.y_mean
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_difference_check(activation: Activation, head: Head, seed: u64) {
        let mut rng = rng_from(seed);
        let mut net = Network::new(&[3, 2, 1], activation, head, seed);
        // Move biases off zero so every unit is exercised.
        for p in net.params_mut() {
            *p += rng.random_range(-0.3..0.3);
        }
        let xs: Vec<Vec<f64>> = (0..5).map(|_| (0..3).map(|_| rng.random_range(-1.5..1.5)).collect()).collect();
        let ys: Vec<f64> = match head {
            Head::SquaredError => (0..5).map(|_| rng.random_range(-2.0..2.0)).collect(),
            Head::Logistic => vec![0.0, 1.0, 1.0, 0.0, 1.0],
        };
        let bx: Vec<&[f64]> = xs.iter().map(|x| x.as_slice()).collect();
        let mut grad = vec![0.0; net.params().len()];
        net.loss_and_gradient(&bx, &ys, &mut grad);

        let h = 1e-6;
        for k in 0..grad.len() {
            let mut plus = net.clone();
            plus.params_mut()[k] += h;
            let mut minus = net.clone();
            minus.params_mut()[k] -= h;
            let mut sink = vec![0.0; grad.len()];
            let lp = plus.loss_and_gradient(&bx, &ys, &mut sink);
            let lm = minus.loss_and_gradient(&bx, &ys, &mut sink);
            let numeric = (lp - lm) / (2.0 * h);
            let rel = (numeric - grad[k]).abs() / numeric.abs().max(grad[k].abs()).max(1e-8);
            assert!(rel <= 1e-4, "param {k}: analytic {} numeric {numeric} rel {rel}", grad[k]);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        finite_difference_check(Activation::Tanh, Head::SquaredError, 1);
        finite_difference_check(Activation::Tanh, Head::Logistic, 2);
        finite_difference_check(Activation::Relu, Head::SquaredError, 3);
    }

    #[test]
    fn learns_a_linear_map() {
        let mut rng = rng_from(5);
        let n = 300;
        let cols: Vec<Vec<f64>> = (0..2).map(|_| (0..n).map(|_| rng.random_range(0.0..10.0)).collect()).collect();
        let y: Vec<f64> = (0..n).map(|i| 3.0 * cols[0][i] - 2.0 * cols[1][i] + 50.0).collect();
        let p = MlpParams { epochs: 150, learning_rate: 3e-3, ..Default::default() };
        let m = fit_mlp(&cols, &y, &p, 9);
        let mae: f64 = (0..n).map(|i| (m.predict(&[cols[0][i], cols[1][i]]) - y[i]).abs()).sum::<f64>() / n as f64;
        assert!(mae < 1.0, "mae {mae}");
        assert_eq!(fit_mlp(&cols, &y, &p, 9), m);
    }
}
