//! Feed-forward network with one tanh hidden layer and a tanh output unit.
//!
//! Training is full-batch gradient descent on mean squared error against
//! ±1 targets, with momentum and an adaptive learning rate: the rate grows
//! by `lr_up` after an epoch that lowers the error, and a step that raises
//! the error by more than `max_error_ratio` is rejected, the rate shrinks by
//! `lr_down` and momentum is cleared. Several random restarts are trained and
//! the one with the lowest final training error wins.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{require_both_classes, Classifier, Normalizer};
use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::seed::stage_rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnConfig {
    pub hidden: usize,
    pub restarts: usize,
    pub max_epochs: usize,
    pub lr: f64,
    pub momentum: f64,
    pub lr_up: f64,
    pub lr_down: f64,
    pub max_error_ratio: f64,
    /// Stop once the training error falls to this value.
    pub goal: f64,
    /// Stop once the gradient norm falls below this value.
    pub min_grad: f64,
}

impl Default for AnnConfig {
    fn default() -> Self {
        AnnConfig {
            hidden: 15,
            restarts: 4,
            max_epochs: 500,
            lr: 0.01,
            momentum: 0.9,
            lr_up: 1.05,
            lr_down: 0.7,
            max_error_ratio: 1.04,
            goal: 0.0,
            min_grad: 1e-6,
        }
    }
}

impl AnnConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.hidden > 0
            && self.restarts > 0
            && self.lr > 0.0
            && (0.0..1.0).contains(&self.momentum)
            && self.lr_up >= 1.0
            && self.lr_down > 0.0
            && self.lr_down < 1.0
            && self.max_error_ratio >= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid ANN configuration: {self:?}")))
        }
    }
}

/// Weights of the 1-hidden-layer network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub inputs: usize,
    pub hidden: usize,
    /// `hidden × inputs`, row-major.
    pub hidden_weights: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

impl Network {
    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        Network {
            inputs,
            hidden,
            hidden_weights: vec![0.0; hidden * inputs],
            hidden_bias: vec![0.0; hidden],
            output_weights: vec![0.0; hidden],
            output_bias: 0.0,
        }
    }

    /// Uniform initialization in ±sqrt(6 / (fan_in + fan_out)).
    pub fn random(inputs: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let mut net = Network::zeros(inputs, hidden);
        let r1 = (6.0 / (inputs + hidden) as f64).sqrt();
        let r2 = (6.0 / (hidden + 1) as f64).sqrt();
        for w in net.hidden_weights.iter_mut().chain(net.hidden_bias.iter_mut()) {
            *w = rng.random_range(-r1..r1);
        }
        for w in net.output_weights.iter_mut() {
            *w = rng.random_range(-r2..r2);
        }
        net.output_bias = rng.random_range(-r2..r2);
        net
    }

    pub fn param_count(&self) -> usize {
        self.hidden * self.inputs + 2 * self.hidden + 1
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.param_count());
        v.extend(&self.hidden_weights);
        v.extend(&self.hidden_bias);
        v.extend(&self.output_weights);
        v.push(self.output_bias);
        v
    }

    pub fn from_flat(inputs: usize, hidden: usize, flat: &[f64]) -> Self {
        assert_eq!(flat.len(), hidden * inputs + 2 * hidden + 1);
        let (w1, rest) = flat.split_at(hidden * inputs);
        let (b1, rest) = rest.split_at(hidden);
        let (w2, rest) = rest.split_at(hidden);
        Network {
            inputs,
            hidden,
            hidden_weights: w1.to_vec(),
            hidden_bias: b1.to_vec(),
            output_weights: w2.to_vec(),
            output_bias: rest[0],
        }
    }

    fn hidden_layer(&self, x: &[f64], out: &mut [f64]) {
        for (j, h) in out.iter_mut().enumerate() {
            let w = &self.hidden_weights[j * self.inputs..(j + 1) * self.inputs];
            let z: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.hidden_bias[j];
            *h = z.tanh();
        }
    }

    /// Network output in (−1, 1) for an already-normalized input.
    pub fn forward(&self, x: &[f64]) -> f64 {
        let mut h = vec![0.0; self.hidden];
        self.hidden_layer(x, &mut h);
        self.output(&h)
    }

    fn output(&self, h: &[f64]) -> f64 {
        let z: f64 = self.output_weights.iter().zip(h).map(|(a, b)| a * b).sum::<f64>() + self.output_bias;
        z.tanh()
    }

    /// Mean squared error over `(x, target)` pairs.
    pub fn mse(&self, xs: &[Vec<f64>], targets: &[f64]) -> f64 {
        let n = xs.len() as f64;
        xs.iter()
            .zip(targets)
            .map(|(x, t)| (self.forward(x) - t).powi(2))
            .sum::<f64>()
            / n
    }

    /// Backpropagated gradient of [`Network::mse`], flattened like [`Network::flat`].
    pub fn mse_gradient(&self, xs: &[Vec<f64>], targets: &[f64]) -> (f64, Vec<f64>) {
        let n = xs.len() as f64;
        let (d, hn) = (self.inputs, self.hidden);
        let mut grad = vec![0.0; self.param_count()];
        let (g_w1, rest) = grad.split_at_mut(hn * d);
        let (g_b1, rest) = rest.split_at_mut(hn);
        let (g_w2, g_b2) = rest.split_at_mut(hn);

        let mut h = vec![0.0; hn];
        let mut loss = 0.0;
        for (x, &t) in xs.iter().zip(targets) {
            self.hidden_layer(x, &mut h);
            let o = self.output(&h);
            let err = o - t;
            loss += err * err;
            let d_out = 2.0 * err / n * (1.0 - o * o);
            g_b2[0] += d_out;
            for j in 0..hn {
                g_w2[j] += d_out * h[j];
                let d_hidden = d_out * self.output_weights[j] * (1.0 - h[j] * h[j]);
                g_b1[j] += d_hidden;
                let row = &mut g_w1[j * d..(j + 1) * d];
                for (g, xi) in row.iter_mut().zip(x) {
                    *g += d_hidden * xi;
                }
            }
        }
        (loss / n, grad)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnModel {
    pub network: Network,
    pub normalizer: Normalizer,
    pub hidden_activation: String,
    pub output_activation: String,
    pub seed: u64,
    /// Restart that produced this network.
    pub restart: usize,
    pub training_error: f64,
    pub epochs: usize,
}

impl Classifier for AnnModel {
    fn input_width(&self) -> usize {
        self.network.inputs
    }

    fn decision(&self, row: &[f64]) -> f64 {
        self.network.forward(&self.normalizer.transform(row))
    }
}

struct RunResult {
    network: Network,
    error: f64,
    epochs: usize,
}

fn train_once(xs: &[Vec<f64>], targets: &[f64], cfg: &AnnConfig, init: Network) -> RunResult {
    let mut net = init;
    let mut params = net.flat();
    let (mut error, mut grad) = net.mse_gradient(xs, targets);
    let mut velocity = vec![0.0; params.len()];
    let mut lr = cfg.lr;
    let mut epochs = 0;

    while epochs < cfg.max_epochs && error.is_finite() {
        if error <= cfg.goal || grad.iter().map(|g| g * g).sum::<f64>().sqrt() < cfg.min_grad {
            break;
        }
        epochs += 1;
        for (v, g) in velocity.iter_mut().zip(&grad) {
            *v = cfg.momentum * *v - lr * g;
        }
        let candidate: Vec<f64> = params.iter().zip(&velocity).map(|(p, v)| p + v).collect();
        let trial = Network::from_flat(net.inputs, net.hidden, &candidate);
        let (trial_error, trial_grad) = trial.mse_gradient(xs, targets);

        if !trial_error.is_finite() || trial_error > error * cfg.max_error_ratio {
            lr *= cfg.lr_down;
            velocity.iter_mut().for_each(|v| *v = 0.0);
            continue;
        }
        if trial_error < error {
            lr *= cfg.lr_up;
        }
        params = candidate;
        net = trial;
        error = trial_error;
        grad = trial_grad;
    }
    RunResult {
        network: net,
        error,
        epochs,
    }
}

/// Trains `cfg.restarts` networks from independent initializations and keeps
/// the one with the lowest final training error.
pub fn train_ann(data: &Dataset, cfg: &AnnConfig, seed: u64) -> Result<AnnModel> {
    cfg.validate()?;
    require_both_classes(data, "ann")?;
    let normalizer = Normalizer::fit(&data.rows);
    let xs = normalizer.transform_all(&data.rows);
    let targets: Vec<f64> = data.labels.iter().map(|l| l.sign()).collect();
    let inputs = data.width();

    let runs: Vec<(usize, RunResult)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stage_rng(seed, &format!("ann/restart-{r}"));
            let init = Network::random(inputs, cfg.hidden, &mut rng);
            (r, train_once(&xs, &targets, cfg, init))
        })
        .collect();

    let (restart, best) = runs
        .into_iter()
        .filter(|(_, run)| run.error.is_finite())
        .min_by(|a, b| a.1.error.total_cmp(&b.1.error).then(a.0.cmp(&b.0)))
        .ok_or_else(|| Error::Training("every ANN restart diverged".into()))?;

    Ok(AnnModel {
        network: best.network,
        normalizer,
        hidden_activation: "tanh".into(),
        output_activation: "tanh".into(),
        seed,
        restart,
        training_error: best.error,
        epochs: best.epochs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::Label;
    use crate::features::FeatureVariant;
    use crate::seed::stage_rng;

    /// Wraps 2-D points into a 4-wide dataset (last two columns constant).
    fn dataset(points: &[(f64, f64, Label)]) -> Dataset {
        let rows = points.iter().map(|&(a, b, _)| vec![a, b, 0.0, 0.0]).collect();
        let labels = points.iter().map(|p| p.2).collect();
        Dataset::new(FeatureVariant::Doc4, rows, labels).unwrap()
    }

    fn accuracy(model: &AnnModel, data: &Dataset) -> f64 {
        let hits = data
            .rows
            .iter()
            .zip(&data.labels)
            .filter(|(r, l)| model.predict(r).unwrap().label == **l)
            .count();
        hits as f64 / data.len() as f64
    }

    #[test]
    fn fits_linearly_separable_points() {
        let mut rng = stage_rng(1, "toy");
        let points: Vec<(f64, f64, Label)> = (0..40)
            .map(|i| {
                let label = if i % 2 == 0 { Label::Positive } else { Label::Negative };
                let x = rng.random_range(-1.0..1.0);
                let y = rng.random_range(-1.0..1.0);
                // Keep a margin around the line x + y = 0.
                let shift = if label == Label::Positive { 1.2 } else { -1.2 };
                (x + shift, y + shift, label)
            })
            .collect();
        let data = dataset(&points);
        let model = train_ann(&data, &AnnConfig::default(), 11).unwrap();
        assert_eq!(accuracy(&model, &data), 1.0);
    }

    #[test]
    fn fits_xor() {
        let data = dataset(&[
            (0.0, 0.0, Label::Negative),
            (1.0, 1.0, Label::Negative),
            (0.0, 1.0, Label::Positive),
            (1.0, 0.0, Label::Positive),
        ]);
        let cfg = AnnConfig {
            max_epochs: 3000,
            ..AnnConfig::default()
        };
        let model = train_ann(&data, &cfg, 5).unwrap();
        assert_eq!(accuracy(&model, &data), 1.0, "error {}", model.training_error);
    }

    #[test]
    fn deterministic_per_seed() {
        let data = dataset(&[
            (0.0, 0.1, Label::Negative),
            (0.2, 0.0, Label::Negative),
            (1.0, 0.9, Label::Positive),
            (0.8, 1.0, Label::Positive),
        ]);
        let a = train_ann(&data, &AnnConfig::default(), 42).unwrap();
        let b = train_ann(&data, &AnnConfig::default(), 42).unwrap();
        assert_eq!(a, b);
        let c = train_ann(&data, &AnnConfig::default(), 43).unwrap();
        assert_ne!(a.network, c.network);
    }

    #[test]
    fn single_class_rejected() {
        let data = dataset(&[(0.0, 0.0, Label::Positive), (1.0, 1.0, Label::Positive)]);
        assert!(train_ann(&data, &AnnConfig::default(), 0).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = stage_rng(9, "gradcheck");
        let net = Network::random(3, 4, &mut rng);
        let xs = vec![vec![0.5, -0.2, 0.1], vec![-0.7, 0.3, 0.9], vec![0.0, 1.0, -1.0]];
        let ts = vec![1.0, -1.0, 1.0];
        let (_, grad) = net.mse_gradient(&xs, &ts);
        let flat = net.flat();
        let h = 1e-6;
        for i in 0..flat.len() {
            let mut plus = flat.clone();
            plus[i] += h;
            let mut minus = flat.clone();
            minus[i] -= h;
            let fd = (Network::from_flat(3, 4, &plus).mse(&xs, &ts)
                - Network::from_flat(3, 4, &minus).mse(&xs, &ts))
                / (2.0 * h);
            let rel = (fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-8);
            assert!(rel <= 1e-4, "param {i}: analytic {} vs numeric {fd}", grad[i]);
        }
    }

    #[test]
    fn flat_roundtrip() {
        let net = Network::random(2, 3, &mut stage_rng(0, "x"));
        assert_eq!(Network::from_flat(2, 3, &net.flat()), net);
    }
}
