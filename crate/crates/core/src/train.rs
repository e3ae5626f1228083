//! Training of binarized MLPs with the straight-through estimator, and
//! folding of batch normalization into integer neuron thresholds.
//!
//! Forward passes use `sign(w)` of the latent real weights and `sign(y)` of
//! the batch-normalized hidden pre-activations. Backward passes treat both
//! signs as the identity inside `[-1, 1]` and as constant outside. Latent
//! weights are clipped back into `[-1, 1]` after every step. The output
//! layer has no batch norm: its ±1 dot products are scaled by `1/sqrt(N)`
//! and fed to softmax cross-entropy.

use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::bnn::{BinaryLinearLayer, BnnModel, PackedBits};
use crate::dataset::{LabeledImageSet, PIXELS};
use crate::error::{Error, Result};
use crate::rng::substream;

pub const BN_EPSILON: f64 = 1e-5;
/// Weight given to the current batch in the running statistics.
pub const BN_MOMENTUM: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
    /// Multiplier applied to the learning rate after each epoch.
    pub lr_decay: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 100,
            learning_rate: 3.0,
            momentum: 0.9,
            seed: 1,
            lr_decay: 0.85,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || !(self.learning_rate > 0.0) || !(self.momentum >= 0.0 && self.momentum < 1.0) {
            return Err(Error::Config(format!("invalid training config {self:?}")));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return Err(Error::Config(format!("lr_decay must be in (0, 1], got {}", self.lr_decay)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
}

impl BatchNorm {
    pub fn new(n: usize) -> Self {
        Self {
            gamma: Array1::ones(n),
            beta: Array1::zeros(n),
            running_mean: Array1::zeros(n),
            running_var: Array1::ones(n),
        }
    }
}

/// Real-valued shadow of one binary layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentLayer {
    /// `n_neurons × n_inputs`, kept inside `[-1, 1]`.
    pub weights: Array2<f64>,
    /// Present on hidden layers only.
    pub batchnorm: Option<BatchNorm>,
}

impl LatentLayer {
    pub fn n_inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn n_neurons(&self) -> usize {
        self.weights.nrows()
    }

    /// `sign(w)` with `sign(0) = +1`.
    pub fn binary_weights(&self) -> Array2<f64> {
        self.weights.mapv(sign)
    }
}

#[inline]
fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Rewrites a hidden layer's batch-normalized sign activation
/// `γ·(h − μ)/σ + β ≥ 0`, with `h = 2·popcount − N` and
/// `σ = sqrt(running_var + ε)`, as `popcount ≥ T`.
///
/// For `γ > 0` this is `T = ⌈(N + θ)/2⌉` with `θ = μ − βσ/γ`. For `γ < 0` the
/// inequality reverses; the weight row is complemented so the neuron counts
/// disagreements instead, and `T = N − ⌊(N + θ)/2⌋`. For `γ = 0` the neuron is
/// constant. Thresholds outside `[0, N]` are clamped by the layer.
pub fn fold_batchnorm(layer: &LatentLayer) -> Result<(Vec<PackedBits>, Vec<i64>)> {
    let bn = layer
        .batchnorm
        .as_ref()
        .ok_or_else(|| Error::Degenerate("output layer has no batch norm to fold".into()))?;
    let n = layer.n_inputs();
    let nf = n as f64;
    let mut rows = Vec::with_capacity(layer.n_neurons());
    let mut thresholds = Vec::with_capacity(layer.n_neurons());
    for (j, w) in layer.weights.outer_iter().enumerate() {
        let (gamma, beta, mu) = (bn.gamma[j], bn.beta[j], bn.running_mean[j]);
        let sigma = (bn.running_var[j] + BN_EPSILON).sqrt();
        if !(sigma.is_finite() && sigma >= BN_EPSILON) || !gamma.is_finite() || !beta.is_finite() || !mu.is_finite() {
            return Err(Error::Degenerate(format!(
                "neuron {j}: sigma={sigma}, gamma={gamma}, beta={beta}, mu={mu}"
            )));
        }
        let bits: Vec<bool> = w.iter().map(|&v| v >= 0.0).collect();
        if gamma == 0.0 {
            rows.push(PackedBits::from_bools(&bits));
            thresholds.push(if beta >= 0.0 { 0 } else { n as i64 + 1 });
            continue;
        }
        let half = (nf + mu - beta * sigma / gamma) / 2.0;
        if gamma > 0.0 {
            rows.push(PackedBits::from_bools(&bits));
            thresholds.push(clamp_to_i64(half.ceil(), n));
        } else {
            let flipped: Vec<bool> = bits.iter().map(|b| !b).collect();
            rows.push(PackedBits::from_bools(&flipped));
            thresholds.push(n as i64 - clamp_to_i64(half.floor(), n));
        }
    }
    Ok((rows, thresholds))
}

/// Saturates into a range wide enough that the layer's own clamp decides.
fn clamp_to_i64(v: f64, n: usize) -> i64 {
    v.clamp(-1.0, n as f64 + 1.0) as i64
}

/// Per-parameter gradients, layer by layer.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    /// `(d gamma, d beta)` for hidden layers, `None` for the output layer.
    pub batchnorm: Vec<Option<(Array1<f64>, Array1<f64>)>>,
}

impl Gradients {
    pub fn all_finite(&self) -> bool {
        self.weights.iter().all(|g| g.iter().all(|v| v.is_finite()))
            && self
                .batchnorm
                .iter()
                .flatten()
                .all(|(g, b)| g.iter().chain(b.iter()).all(|v| v.is_finite()))
    }
}

struct HiddenCache {
    input: Array2<f64>,
    binary_weights: Array2<f64>,
    normalized: Array2<f64>,
    pre_sign: Array2<f64>,
    inv_std: Array1<f64>,
    batch_mean: Array1<f64>,
    batch_var: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatentNetwork {
    pub layers: Vec<LatentLayer>,
}

impl LatentNetwork {
    /// Glorot-uniform latent weights; batch norm on every layer but the last.
    pub fn init<R: Rng + ?Sized>(arch: &[usize], rng: &mut R) -> Result<Self> {
        if arch.len() < 2 || arch.contains(&0) {
            return Err(Error::Config(format!("architecture {arch:?} needs at least two nonzero layer sizes")));
        }
        let last = arch.len() - 2;
        let layers = arch
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let limit = (6.0 / (w[0] + w[1]) as f64).sqrt().min(1.0);
                let weights = Array2::from_shape_simple_fn((w[1], w[0]), || rng.random_range(-limit..=limit));
                LatentLayer {
                    weights,
                    batchnorm: (k != last).then(|| BatchNorm::new(w[1])),
                }
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn architecture(&self) -> Vec<usize> {
        let mut a = vec![self.layers[0].n_inputs()];
        a.extend(self.layers.iter().map(|l| l.n_neurons()));
        a
    }

    /// Mean softmax cross-entropy over the batch and its STE gradients.
    /// Batch norm uses batch statistics; running statistics are untouched.
    pub fn loss_and_gradients(&self, x: ArrayView2<f64>, labels: &[u8]) -> Result<(f64, Gradients)> {
        let (loss, grads, _) = self.forward_backward(x, labels)?;
        Ok((loss, grads))
    }

    #[allow(clippy::type_complexity)]
    fn forward_backward(&self, x: ArrayView2<f64>, labels: &[u8]) -> Result<(f64, Gradients, Vec<(Array1<f64>, Array1<f64>)>)> {
        let batch = x.nrows();
        if batch == 0 || labels.len() != batch || x.ncols() != self.layers[0].n_inputs() {
            return Err(Error::Dimension {
                expected: format!("{} labels of {} inputs", batch, self.layers[0].n_inputs()),
                got: format!("{} labels of {} inputs", labels.len(), x.ncols()),
            });
        }
        let bf = batch as f64;
        let (hidden, out) = self.layers.split_at(self.layers.len() - 1);
        let out = &out[0];

        let mut caches: Vec<HiddenCache> = Vec::with_capacity(hidden.len());
        let mut act = x.to_owned();
        for layer in hidden {
            let bn = layer.batchnorm.as_ref().expect("hidden layers carry batch norm");
            let wb = layer.binary_weights();
            let z = act.dot(&wb.t());
            let mean = z.mean_axis(Axis(0)).expect("nonempty batch");
            let centered = &z - &mean;
            let var = centered.mapv(|v| v * v).mean_axis(Axis(0)).expect("nonempty batch");
            let inv_std = var.mapv(|v| 1.0 / (v + BN_EPSILON).sqrt());
            let normalized = &centered * &inv_std;
            let pre_sign = &normalized * &bn.gamma + &bn.beta;
            let next = pre_sign.mapv(sign);
            caches.push(HiddenCache {
                input: std::mem::replace(&mut act, next),
                binary_weights: wb,
                normalized,
                pre_sign,
                inv_std,
                batch_mean: mean,
                batch_var: var,
            });
        }

        let scale = 1.0 / (out.n_inputs() as f64).sqrt();
        let out_wb = out.binary_weights();
        let logits = act.dot(&out_wb.t()) * scale;
        let mut dlogits = Array2::<f64>::zeros(logits.raw_dim());
        let mut loss = 0.0;
        for (i, (row, mut drow)) in logits.outer_iter().zip(dlogits.outer_iter_mut()).enumerate() {
            let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let exps = row.mapv(|v| (v - max).exp());
            let total = exps.sum();
            let label = labels[i] as usize;
            if label >= row.len() {
                return Err(Error::Domain(format!("label {label} out of range for {} classes", row.len())));
            }
            loss -= (exps[label] / total).ln();
            Zip::from(&mut drow).and(&exps).for_each(|d, &e| *d = e / total / bf);
            drow[label] -= 1.0 / bf;
        }
        loss /= bf;

        let mut weight_grads = vec![Array2::zeros((0, 0)); self.layers.len()];
        let mut bn_grads = vec![None; self.layers.len()];
        let out_idx = self.layers.len() - 1;
        let dwb = dlogits.t().dot(&act) * scale;
        weight_grads[out_idx] = ste_mask(dwb, &out.weights);
        let mut dact = dlogits.dot(&out_wb) * scale;

        for (k, (layer, cache)) in hidden.iter().zip(&caches).enumerate().rev() {
            let bn = layer.batchnorm.as_ref().expect("hidden layers carry batch norm");
            let mut dy = dact;
            Zip::from(&mut dy).and(&cache.pre_sign).for_each(|d, &y| {
                if y.abs() > 1.0 {
                    *d = 0.0;
                }
            });
            let dgamma = (&dy * &cache.normalized).sum_axis(Axis(0));
            let dbeta = dy.sum_axis(Axis(0));
            let dnorm = &dy * &bn.gamma;
            let sum_dnorm = dnorm.sum_axis(Axis(0));
            let sum_dnorm_norm = (&dnorm * &cache.normalized).sum_axis(Axis(0));
            let dz = (&dnorm * bf - &sum_dnorm - &cache.normalized * &sum_dnorm_norm) * &(&cache.inv_std / bf);
            let dwb = dz.t().dot(&cache.input);
            weight_grads[k] = ste_mask(dwb, &layer.weights);
            bn_grads[k] = Some((dgamma, dbeta));
            dact = dz.dot(&cache.binary_weights);
        }

        let stats = caches.into_iter().map(|c| (c.batch_mean, c.batch_var)).collect();
        Ok((
            loss,
            Gradients {
                weights: weight_grads,
                batchnorm: bn_grads,
            },
            stats,
        ))
    }

    /// Folds every hidden layer's batch norm into thresholds and returns the
    /// integer inference model.
    pub fn fold(&self) -> Result<BnnModel> {
        let mut layers = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            if layer.batchnorm.is_some() {
                let (rows, t) = fold_batchnorm(layer)?;
                layers.push(BinaryLinearLayer::new(layer.n_inputs(), &rows, &t)?);
            } else {
                let rows: Vec<PackedBits> = layer
                    .weights
                    .outer_iter()
                    .map(|w| PackedBits::from_bools(&w.iter().map(|&v| v >= 0.0).collect::<Vec<_>>()))
                    .collect();
                layers.push(BinaryLinearLayer::new(layer.n_inputs(), &rows, &vec![0; layer.n_neurons()])?);
            }
        }
        BnnModel::new(layers)
    }

    fn parameters_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.iter().all(|v| v.is_finite())
                && l.batchnorm.as_ref().is_none_or(|bn| {
                    bn.gamma.iter().chain(&bn.beta).all(|v| v.is_finite() && v.abs() < 1e150)
                })
        })
    }

    /// Hidden activations computed with real-valued batch norm (running
    /// statistics) instead of folded thresholds.
    pub fn hidden_activations_real(&self, x: &PackedBits) -> Vec<Vec<bool>> {
        let mut input: Vec<f64> = x.to_bools().into_iter().map(|b| if b { 1.0 } else { -1.0 }).collect();
        let mut out = Vec::new();
        for layer in &self.layers[..self.layers.len() - 1] {
            let bn = layer.batchnorm.as_ref().expect("hidden layers carry batch norm");
            let fired: Vec<bool> = layer
                .weights
                .outer_iter()
                .enumerate()
                .map(|(j, w)| {
                    let h: f64 = w.iter().zip(&input).map(|(&wv, &xv)| sign(wv) * xv).sum();
                    let sigma = (bn.running_var[j] + BN_EPSILON).sqrt();
                    bn.gamma[j] * (h - bn.running_mean[j]) / sigma + bn.beta[j] >= 0.0
                })
                .collect();
            input = fired.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
            out.push(fired);
        }
        out
    }
}

fn ste_mask(mut grad: Array2<f64>, latent: &Array2<f64>) -> Array2<f64> {
    Zip::from(&mut grad).and(latent).for_each(|g, &w| {
        if w.abs() > 1.0 {
            *g = 0.0;
        }
    });
    grad
}

struct Optimizer {
    velocity_w: Vec<Array2<f64>>,
    velocity_bn: Vec<Option<(Array1<f64>, Array1<f64>)>>,
    momentum: f64,
}

impl Optimizer {
    fn new(net: &LatentNetwork, momentum: f64) -> Self {
        Self {
            velocity_w: net.layers.iter().map(|l| Array2::zeros(l.weights.raw_dim())).collect(),
            velocity_bn: net
                .layers
                .iter()
                .map(|l| l.batchnorm.as_ref().map(|b| (Array1::zeros(b.gamma.len()), Array1::zeros(b.gamma.len()))))
                .collect(),
            momentum,
        }
    }

    fn step(&mut self, net: &mut LatentNetwork, grads: &Gradients, lr: f64) {
        let m = self.momentum;
        for (k, layer) in net.layers.iter_mut().enumerate() {
            let v = &mut self.velocity_w[k];
            Zip::from(&mut *v).and(&grads.weights[k]).for_each(|v, &g| *v = m * *v + g);
            Zip::from(&mut layer.weights).and(&*v).for_each(|w, &v| *w = (*w - lr * v).clamp(-1.0, 1.0));
            if let (Some(bn), Some((vg, vb)), Some((dg, db))) =
                (layer.batchnorm.as_mut(), self.velocity_bn[k].as_mut(), grads.batchnorm[k].as_ref())
            {
                Zip::from(&mut *vg).and(dg).for_each(|v, &g| *v = m * *v + g);
                Zip::from(&mut *vb).and(db).for_each(|v, &g| *v = m * *v + g);
                bn.gamma.scaled_add(-lr, vg);
                bn.beta.scaled_add(-lr, vb);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_accuracy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: BnnModel,
    pub latent: LatentNetwork,
    pub log: Vec<EpochLog>,
}

fn to_signs(x: &PackedBits, out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = if x.get(i) { 1.0 } else { -1.0 };
    }
}

/// Trains on pre-binarized inputs. `eval` is scored with the folded model
/// after each epoch.
pub fn train_on(
    inputs: &[PackedBits],
    labels: &[u8],
    eval: Option<(&[PackedBits], &[u8])>,
    arch: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if inputs.len() != labels.len() || inputs.is_empty() {
        return Err(Error::Dimension {
            expected: format!("{} labels", inputs.len()),
            got: format!("{}", labels.len()),
        });
    }
    let mut net = LatentNetwork::init(arch, &mut substream(cfg.seed, 0))?;
    if inputs.iter().any(|x| x.len() != arch[0]) {
        return Err(Error::Dimension {
            expected: format!("{} input bits", arch[0]),
            got: "inputs of another width".into(),
        });
    }
    let mut shuffle_rng = substream(cfg.seed, 1);
    let mut opt = Optimizer::new(&net, cfg.momentum);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut log = Vec::with_capacity(cfg.epochs);
    let mut lr = cfg.learning_rate;
    let mut xb = Array2::<f64>::zeros((cfg.batch_size, arch[0]));
    let mut yb = vec![0u8; cfg.batch_size];

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        let mut batches = 0;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            for (r, &i) in chunk.iter().enumerate() {
                to_signs(&inputs[i], xb.row_mut(r).as_slice_mut().expect("row-major"));
                yb[r] = labels[i];
            }
            let view = xb.slice(s![..chunk.len(), ..]);
            let (loss, grads, stats) = net.forward_backward(view, &yb[..chunk.len()])?;
            if !loss.is_finite() {
                return Err(Error::Training {
                    epoch,
                    batch: b,
                    reason: format!("loss is {loss}"),
                });
            }
            if !grads.all_finite() {
                return Err(Error::Training {
                    epoch,
                    batch: b,
                    reason: "non-finite gradient".into(),
                });
            }
            opt.step(&mut net, &grads, lr);
            if !net.parameters_finite() {
                return Err(Error::Training {
                    epoch,
                    batch: b,
                    reason: "parameters left the finite range".into(),
                });
            }
            for (layer, (mean, var)) in net.layers.iter_mut().zip(stats) {
                let bn = layer.batchnorm.as_mut().expect("stats only for hidden layers");
                bn.running_mean.zip_mut_with(&mean, |r, &m| *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * m);
                bn.running_var.zip_mut_with(&var, |r, &v| *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * v);
            }
            loss_sum += loss;
            batches += 1;
        }
        lr *= cfg.lr_decay;
        let test_accuracy = match eval {
            Some((x, y)) => Some(net.fold()?.accuracy(x, y)?),
            None => None,
        };
        let entry = EpochLog {
            epoch: epoch + 1,
            train_loss: loss_sum / batches as f64,
            test_accuracy,
        };
        log::info!(
            "epoch {} loss {:.4} test accuracy {}",
            entry.epoch,
            entry.train_loss,
            test_accuracy.map(|a| format!("{:.4}", a)).unwrap_or_else(|| "-".into())
        );
        log.push(entry);
    }
    Ok(TrainOutcome {
        model: net.fold()?,
        latent: net,
        log,
    })
}

/// Trains an MNIST classifier with layer sizes `arch` (input 784, output 10).
pub fn train_bnn(
    train: &LabeledImageSet,
    test: Option<&LabeledImageSet>,
    arch: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if arch.first() != Some(&PIXELS) || arch.last() != Some(&10) {
        return Err(Error::Config(format!("MNIST architecture must run {PIXELS} -> ... -> 10, got {arch:?}")));
    }
    let xs = train.binarized();
    let test_bits = test.map(|t| t.binarized());
    let eval = test.zip(test_bits.as_ref()).map(|(t, bits)| (bits.as_slice(), t.labels()));
    train_on(&xs, train.labels(), eval, arch, cfg)
}
