//! From-scratch multilayer perceptron with Adam, dropout and early stopping.
//!
//! Parameters live in one flat vector (weights then biases per layer), which
//! keeps the Adam state, weight snapshots and finite-difference gradient
//! checks simple. Hidden layers share one activation; the output layer is
//! always linear. Training is fully determined by the config seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::seeding::derive_indexed_seed;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Selu,
    Gelu,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    Mse,
    Huber(f64),
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub loss: Loss,
    pub dropout: f64,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl MlpConfig {
    /// Ensemble-member configuration for the ELO targets: deep SELU stack
    /// with Huber loss and a fast learning rate.
    pub fn elo_default(seed: u64) -> Self {
        Self {
            hidden: vec![512, 512, 256, 128, 64, 32],
            activation: Activation::Selu,
            loss: Loss::Huber(0.1),
            dropout: 0.0,
            learning_rate: 0.03,
            weight_decay: 0.0,
            batch_size: 8,
            max_epochs: 500,
            patience: 15,
            seed,
        }
    }

    /// Single-network configuration for the Bradley-Terry targets: GELU
    /// stack with dropout and weight decay.
    pub fn bt_default(seed: u64) -> Self {
        Self {
            hidden: vec![1024, 256, 512, 128, 512],
            activation: Activation::Gelu,
            loss: Loss::Mse,
            dropout: 0.28,
            learning_rate: 0.001,
            weight_decay: 6.007e-6,
            batch_size: 8,
            max_epochs: 500,
            patience: 15,
            seed,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MlpError {
    #[error("loss became non-finite at epoch {0}")]
    NonFiniteLoss(usize),
    #[error("ensemble has no members")]
    EmptyEnsemble,
    #[error("training requires a non-empty validation split")]
    EmptyValidation,
    #[error("training set is empty")]
    EmptyTraining,
}

const SELU_LAMBDA: f64 = 1.0507009873554805;
const SELU_ALPHA: f64 = 1.6732632423543772;
const GELU_C: f64 = 0.7978845608028654; // sqrt(2/pi)
const GELU_A: f64 = 0.044715;

fn activate(a: Activation, x: f64) -> f64 {
    match a {
        Activation::Selu => {
            if x > 0.0 {
                SELU_LAMBDA * x
            } else {
                SELU_LAMBDA * SELU_ALPHA * (x.exp() - 1.0)
            }
        }
        Activation::Gelu => {
            let u = GELU_C * (x + GELU_A * x * x * x);
            0.5 * x * (1.0 + u.tanh())
        }
    }
}

fn activate_grad(a: Activation, x: f64) -> f64 {
    match a {
        Activation::Selu => {
            if x > 0.0 {
                SELU_LAMBDA
            } else {
                SELU_LAMBDA * SELU_ALPHA * x.exp()
            }
        }
        Activation::Gelu => {
            let u = GELU_C * (x + GELU_A * x * x * x);
            let t = u.tanh();
            0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
        }
    }
}

/// Per-residual loss value.
fn loss_value(loss: Loss, r: f64) -> f64 {
    match loss {
        Loss::Mse => r * r,
        Loss::Huber(delta) => {
            if r.abs() <= delta {
                0.5 * r * r
            } else {
                delta * (r.abs() - 0.5 * delta)
            }
        }
    }
}

/// Derivative of the per-residual loss with respect to the prediction.
fn loss_grad(loss: Loss, r: f64) -> f64 {
    match loss {
        Loss::Mse => 2.0 * r,
        Loss::Huber(delta) => {
            if r.abs() <= delta {
                r
            } else {
                delta * r.signum()
            }
        }
    }
}

/// Feed-forward network with a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    /// Layer widths including input and output.
    dims: Vec<usize>,
    activation: Activation,
    params: Vec<f64>,
    /// (weight_offset, bias_offset) per layer.
    offsets: Vec<(usize, usize)>,
}

impl Mlp {
    /// LeCun-normal initialization: weights ~ N(0, 1/fan_in), biases zero.
    pub fn new(input: usize, hidden: &[usize], output: usize, activation: Activation, seed: u64) -> Self {
        let mut dims = Vec::with_capacity(hidden.len() + 2);
        dims.push(input);
        dims.extend_from_slice(hidden);
        dims.push(output);

        let mut offsets = Vec::new();
        let mut total = 0usize;
        for l in 0..dims.len() - 1 {
            let w_off = total;
            total += dims[l] * dims[l + 1];
            let b_off = total;
            total += dims[l + 1];
            offsets.push((w_off, b_off));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; total];
        for l in 0..dims.len() - 1 {
            let fan_in = dims[l] as f64;
            let std = (1.0 / fan_in).sqrt();
            let (w_off, b_off) = offsets[l];
            for w in params[w_off..b_off].iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *w = z * std;
            }
        }
        Mlp {
            dims,
            activation,
            params,
            offsets,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn layer_count(&self) -> usize {
        self.dims.len() - 1
    }

    /// Deterministic forward pass (dropout disabled).
    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        let trace = self.forward(x, None);
        trace.activations.last().unwrap().clone()
    }

    /// Stochastic forward pass with inverted dropout on hidden activations.
    pub fn forward_train<R: Rng>(&self, x: &[f64], dropout: f64, rng: &mut R) -> Vec<f64> {
        let masks = self.sample_masks(dropout, rng);
        let trace = self.forward(x, Some(&masks));
        trace.activations.last().unwrap().clone()
    }

    fn sample_masks<R: Rng>(&self, dropout: f64, rng: &mut R) -> Vec<Vec<f64>> {
        let keep = 1.0 - dropout;
        (1..self.dims.len() - 1)
            .map(|l| {
                (0..self.dims[l])
                    .map(|_| {
                        if dropout == 0.0 || rng.gen::<f64>() < keep {
                            1.0 / keep
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn forward(&self, x: &[f64], masks: Option<&[Vec<f64>]>) -> ForwardTrace {
        debug_assert_eq!(x.len(), self.dims[0]);
        let layers = self.layer_count();
        let mut activations = Vec::with_capacity(layers + 1);
        let mut pre = Vec::with_capacity(layers);
        activations.push(x.to_vec());
        for l in 0..layers {
            let (w_off, b_off) = self.offsets[l];
            let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
            let input = &activations[l];
            let mut z = self.params[b_off..b_off + n_out].to_vec();
            for i in 0..n_in {
                let xi = input[i];
                if xi == 0.0 {
                    continue;
                }
                let row = &self.params[w_off + i * n_out..w_off + (i + 1) * n_out];
                for (zj, wj) in z.iter_mut().zip(row) {
                    *zj += xi * wj;
                }
            }
            let last = l == layers - 1;
            let mut a: Vec<f64> = if last {
                z.clone()
            } else {
                z.iter().map(|&v| activate(self.activation, v)).collect()
            };
            if !last {
                if let Some(masks) = masks {
                    for (av, m) in a.iter_mut().zip(&masks[l]) {
                        *av *= m;
                    }
                }
            }
            pre.push(z);
            activations.push(a);
        }
        ForwardTrace {
            activations,
            pre,
        }
    }

    /// Mean loss of a batch in eval mode.
    pub fn batch_loss(&self, xs: &[Vec<f64>], ys: &[Vec<f64>], loss: Loss) -> f64 {
        let m = self.output_dim();
        let total: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let pred = self.predict(x);
                pred.iter()
                    .zip(y)
                    .map(|(p, t)| loss_value(loss, p - t))
                    .sum::<f64>()
            })
            .sum();
        total / (xs.len() * m) as f64
    }

    /// Batch gradient of the mean loss w.r.t. all parameters, eval-mode
    /// forward (the masks argument carries dropout during training).
    fn batch_gradient(
        &self,
        xs: &[Vec<f64>],
        ys: &[Vec<f64>],
        loss: Loss,
        masks_per_row: Option<&[Vec<Vec<f64>>]>,
    ) -> (f64, Vec<f64>) {
        let layers = self.layer_count();
        let m = self.output_dim();
        let scale = 1.0 / (xs.len() * m) as f64;
        let mut grad = vec![0.0; self.params.len()];
        let mut total_loss = 0.0;

        for (row, (x, y)) in xs.iter().zip(ys).enumerate() {
            let masks = masks_per_row.map(|mm| &mm[row]);
            let trace = self.forward(x, masks.map(|v| v.as_slice()));
            let pred = trace.activations.last().unwrap();
            let mut delta: Vec<f64> = pred
                .iter()
                .zip(y)
                .map(|(p, t)| {
                    let r = p - t;
                    total_loss += loss_value(loss, r);
                    loss_grad(loss, r) * scale
                })
                .collect();

            for l in (0..layers).rev() {
                let (w_off, b_off) = self.offsets[l];
                let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
                let input = &trace.activations[l];
                for i in 0..n_in {
                    let xi = input[i];
                    if xi != 0.0 {
                        let g_row = &mut grad[w_off + i * n_out..w_off + (i + 1) * n_out];
                        for (g, d) in g_row.iter_mut().zip(&delta) {
                            *g += xi * d;
                        }
                    }
                }
                for (g, d) in grad[b_off..b_off + n_out].iter_mut().zip(&delta) {
                    *g += d;
                }
                if l == 0 {
                    break;
                }
                // propagate to the previous layer through weights, dropout
                // mask and activation derivative
                let mut prev = vec![0.0; n_in];
                for (i, p) in prev.iter_mut().enumerate() {
                    let row = &self.params[w_off + i * n_out..w_off + (i + 1) * n_out];
                    *p = row.iter().zip(&delta).map(|(w, d)| w * d).sum();
                }
                if let Some(masks) = masks {
                    for (p, mk) in prev.iter_mut().zip(&masks[l - 1]) {
                        *p *= mk;
                    }
                }
                for (p, &z) in prev.iter_mut().zip(&trace.pre[l - 1]) {
                    *p *= activate_grad(self.activation, z);
                }
                delta = prev;
            }
        }
        (total_loss * scale, grad)
    }
}

struct ForwardTrace {
    activations: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EpochStats {
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedMlp {
    pub net: Mlp,
    pub curves: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

/// Train with mini-batches, Adam and validation-based early stopping; the
/// weights of the best validation epoch are restored on return.
pub fn train_mlp(
    train_x: &[Vec<f64>],
    train_y: &[Vec<f64>],
    val_x: &[Vec<f64>],
    val_y: &[Vec<f64>],
    cfg: &MlpConfig,
) -> Result<TrainedMlp, MlpError> {
    if train_x.is_empty() {
        return Err(MlpError::EmptyTraining);
    }
    if val_x.is_empty() {
        return Err(MlpError::EmptyValidation);
    }
    assert!((0.0..1.0).contains(&cfg.dropout), "dropout in [0,1)");
    assert!(cfg.learning_rate > 0.0 && cfg.batch_size >= 1);

    let input = train_x[0].len();
    let output = train_y[0].len();
    let mut net = Mlp::new(input, &cfg.hidden, output, cfg.activation, cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x9e3779b97f4a7c15));

    let mut adam_m = vec![0.0; net.params.len()];
    let mut adam_v = vec![0.0; net.params.len()];
    let mut adam_t = 0u64;
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    let mut curves = Vec::new();
    let mut best_epoch = 0usize;
    let mut best_val = f64::INFINITY;
    let mut best_params = net.params.clone();

    let mut order: Vec<usize> = (0..train_x.len()).collect();
    for epoch in 0..cfg.max_epochs {
        // seeded in-place Fisher-Yates shuffle per epoch
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }

        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let xs: Vec<Vec<f64>> = chunk.iter().map(|&i| train_x[i].clone()).collect();
            let ys: Vec<Vec<f64>> = chunk.iter().map(|&i| train_y[i].clone()).collect();
            let masks: Option<Vec<Vec<Vec<f64>>>> = if cfg.dropout > 0.0 {
                Some(
                    (0..xs.len())
                        .map(|_| net.sample_masks(cfg.dropout, &mut rng))
                        .collect(),
                )
            } else {
                None
            };
            let (loss, mut grad) = net.batch_gradient(&xs, &ys, cfg.loss, masks.as_deref());
            if !loss.is_finite() {
                return Err(MlpError::NonFiniteLoss(epoch));
            }
            epoch_loss += loss;
            batches += 1;

            if cfg.weight_decay > 0.0 {
                for (g, p) in grad.iter_mut().zip(&net.params) {
                    *g += cfg.weight_decay * p;
                }
            }
            adam_t += 1;
            let bc1 = 1.0 - BETA1.powi(adam_t as i32);
            let bc2 = 1.0 - BETA2.powi(adam_t as i32);
            for i in 0..net.params.len() {
                adam_m[i] = BETA1 * adam_m[i] + (1.0 - BETA1) * grad[i];
                adam_v[i] = BETA2 * adam_v[i] + (1.0 - BETA2) * grad[i] * grad[i];
                let m_hat = adam_m[i] / bc1;
                let v_hat = adam_v[i] / bc2;
                net.params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + EPS);
            }
        }

        let val_loss = net.batch_loss(val_x, val_y, cfg.loss);
        if !val_loss.is_finite() {
            return Err(MlpError::NonFiniteLoss(epoch));
        }
        curves.push(EpochStats {
            train_loss: epoch_loss / batches as f64,
            val_loss,
        });
        if val_loss < best_val {
            best_val = val_loss;
            best_epoch = epoch;
            best_params.copy_from_slice(&net.params);
        } else if epoch - best_epoch >= cfg.patience {
            break;
        }
    }

    net.params = best_params;
    Ok(TrainedMlp {
        net,
        curves,
        best_epoch,
        best_val_loss: best_val,
    })
}

/// Central finite differences against the analytic gradient; returns the
/// maximum relative error over all parameters. Dropout is disabled.
pub fn gradient_check(net: &Mlp, xs: &[Vec<f64>], ys: &[Vec<f64>], loss: Loss) -> f64 {
    const H: f64 = 1e-4;
    let (_, analytic) = net.batch_gradient(xs, ys, loss, None);
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for i in 0..probe.params.len() {
        let original = probe.params[i];
        probe.params[i] = original + H;
        let plus = probe.batch_loss(xs, ys, loss);
        probe.params[i] = original - H;
        let minus = probe.batch_loss(xs, ys, loss);
        probe.params[i] = original;
        let fd = (plus - minus) / (2.0 * H);
        let denom = analytic[i].abs().max(fd.abs()).max(1e-4);
        worst = worst.max((fd - analytic[i]).abs() / denom);
    }
    worst
}

/// Seeded ensemble of independently trained networks.
pub struct Ensemble {
    /// (member index, network), kept sorted by index.
    pub members: Vec<(u64, Mlp)>,
}

/// Train `members` networks in parallel, member i seeded from (seed, i).
pub fn train_ensemble(
    train_x: &[Vec<f64>],
    train_y: &[Vec<f64>],
    val_x: &[Vec<f64>],
    val_y: &[Vec<f64>],
    base: &MlpConfig,
    members: usize,
    seed: u64,
) -> Result<Ensemble, MlpError> {
    if members == 0 {
        return Err(MlpError::EmptyEnsemble);
    }
    let trained: Result<Vec<(u64, Mlp)>, MlpError> = (0..members as u64)
        .into_par_iter()
        .map(|i| {
            let cfg = MlpConfig {
                seed: derive_indexed_seed(seed, "ensemble-member", i),
                ..base.clone()
            };
            train_mlp(train_x, train_y, val_x, val_y, &cfg).map(|t| (i, t.net))
        })
        .collect();
    Ok(Ensemble { members: trained? })
}

/// Ensemble mean prediction with a canonical summation order: members are
/// consumed sorted by index and summed as a pairwise tree, so any input
/// permutation yields bit-identical output.
pub fn predict_ensemble(ensemble: &Ensemble, x: &[f64]) -> Result<Vec<f64>, MlpError> {
    if ensemble.members.is_empty() {
        return Err(MlpError::EmptyEnsemble);
    }
    let mut ordered: Vec<&(u64, Mlp)> = ensemble.members.iter().collect();
    ordered.sort_by_key(|(i, _)| *i);
    let outputs: Vec<Vec<f64>> = ordered.iter().map(|(_, net)| net.predict(x)).collect();
    let sum = tree_sum(&outputs);
    let n = outputs.len() as f64;
    Ok(sum.into_iter().map(|v| v / n).collect())
}

fn tree_sum(vectors: &[Vec<f64>]) -> Vec<f64> {
    match vectors.len() {
        1 => vectors[0].clone(),
        n => {
            let mid = n / 2;
            let left = tree_sum(&vectors[..mid]);
            let right = tree_sum(&vectors[mid..]);
            left.iter().zip(&right).map(|(a, b)| a + b).collect()
        }
    }
}
