//! Soft-margin SVM with an RBF kernel, trained by sequential minimal
//! optimization on the dual.
//!
//! The working pair is chosen by maximal violation for the first index and a
//! second-order gain estimate for the second; the loop ends when the largest
//! KKT violation gap drops below `tol` or after `max_iterations` pair
//! updates. Defaults follow LIBSVM's: `C = 1`, `gamma = 1 / num_features`,
//! `tol = 1e-3`.

use serde::{Deserialize, Serialize};

use super::{require_both_classes, Classifier, Normalizer};
use crate::error::{Error, Result};
use crate::features::Dataset;

const TAU: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub c: f64,
    /// `None` means `1 / num_features`.
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            gamma: None,
            tol: 1e-3,
            max_iterations: 1_000_000,
        }
    }
}

impl SvmConfig {
    pub fn gamma_for(&self, num_features: usize) -> f64 {
        self.gamma.unwrap_or(1.0 / num_features.max(1) as f64)
    }
}

pub fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// Solution of the dual problem over all training points.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Decision function is `Σ α_i y_i K(x_i, x) − rho`.
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves `min ½ αᵀQα − Σα` s.t. `0 ≤ α ≤ C`, `Σ α_i y_i = 0`, with
/// `Q_ij = y_i y_j K(x_i, x_j)`. `y` holds ±1.
pub fn solve_dual(xs: &[Vec<f64>], y: &[f64], c: f64, gamma: f64, tol: f64, max_iterations: usize) -> DualSolution {
    let n = xs.len();
    let kernel: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| rbf(gamma, &xs[i], &xs[j])).collect())
        .collect();
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[i][j];

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        // First index: maximal violator in the "up" set.
        let mut g_max = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if in_up(alpha[t], y[t]) && -y[t] * grad[t] >= g_max {
                g_max = -y[t] * grad[t];
                i = t;
            }
        }
        // Second index: best second-order decrease in the "low" set.
        let mut g_min = f64::INFINITY;
        let mut j = usize::MAX;
        let mut best_obj = f64::INFINITY;
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            g_min = g_min.min(v);
            if i != usize::MAX {
                let b = g_max - v;
                if b > 0.0 {
                    let mut a = kernel[i][i] + kernel[t][t] - 2.0 * kernel[i][t];
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let obj = -(b * b) / a;
                    if obj <= best_obj {
                        best_obj = obj;
                        j = t;
                    }
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || g_max - g_min < tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = kernel[i][i] + kernel[j][j] - 2.0 * kernel[i][j];
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (k, g) in grad.iter_mut().enumerate() {
            *g += q(i, k) * di + q(j, k) * dj;
        }
    }

    DualSolution {
        rho: compute_rho(&alpha, y, &grad, c),
        alpha,
        iterations,
        converged,
    }
}

fn compute_rho(alpha: &[f64], y: &[f64], grad: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for ((&a, &yi), &g) in alpha.iter().zip(y).zip(grad) {
        let yg = yi * g;
        if a >= c {
            if yi < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if a <= 0.0 {
            if yi > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub input_width: usize,
    pub gamma: f64,
    pub c: f64,
    /// Support vectors in normalized coordinates.
    pub support_vectors: Vec<Vec<f64>>,
    pub alphas: Vec<f64>,
    /// ±1 class of each support vector.
    pub signs: Vec<f64>,
    pub rho: f64,
    pub normalizer: Normalizer,
    pub iterations: usize,
    pub converged: bool,
}

impl SvmModel {
    pub fn decision_normalized(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(self.alphas.iter().zip(&self.signs))
            .map(|(sv, (a, s))| a * s * rbf(self.gamma, sv, x))
            .sum::<f64>()
            - self.rho
    }
}

impl Classifier for SvmModel {
    fn input_width(&self) -> usize {
        self.input_width
    }

    fn decision(&self, row: &[f64]) -> f64 {
        self.decision_normalized(&self.normalizer.transform(row))
    }
}

pub fn train_svm(data: &Dataset, cfg: &SvmConfig) -> Result<SvmModel> {
    require_both_classes(data, "svm")?;
    let gamma = cfg.gamma_for(data.width());
    if !(cfg.c > 0.0 && gamma > 0.0 && cfg.tol > 0.0) {
        return Err(Error::config(format!("invalid SVM configuration: {cfg:?}")));
    }
    let normalizer = Normalizer::fit(&data.rows);
    let xs = normalizer.transform_all(&data.rows);
    let y: Vec<f64> = data.labels.iter().map(|l| l.sign()).collect();
    let sol = solve_dual(&xs, &y, cfg.c, gamma, cfg.tol, cfg.max_iterations);

    let mut model = SvmModel {
        input_width: data.width(),
        gamma,
        c: cfg.c,
        support_vectors: Vec::new(),
        alphas: Vec::new(),
        signs: Vec::new(),
        rho: sol.rho,
        normalizer,
        iterations: sol.iterations,
        converged: sol.converged,
    };
    for ((x, a), s) in xs.into_iter().zip(sol.alpha).zip(y) {
        if a > 0.0 {
            model.support_vectors.push(x);
            model.alphas.push(a);
            model.signs.push(s);
        }
    }
    Ok(model)
}
