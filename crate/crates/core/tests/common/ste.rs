//! Straight-through gradient oracle. Around the current point, `sign(w)` is
//! replaced by `sign(w0) + w - w0` and the hidden `sign(y)` by
//! `sign(y0) + hardtanh(y) - hardtanh(y0)`; the exact gradient of that
//! surrogate is what the straight-through estimator claims to compute.

use ndarray::{Array1, Array2};
use rand::Rng;
use rram_bnn::rng::seeded;
use rram_bnn::train::{LatentNetwork, BN_EPSILON};

fn sgn(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn hardtanh(v: f64) -> f64 {
    v.clamp(-1.0, 1.0)
}

#[derive(Clone)]
struct Point {
    w1: Array2<f64>,
    gamma: Array1<f64>,
    beta: Array1<f64>,
    w2: Array2<f64>,
}

/// Surrogate loss at `p`, linearized around `p0`. Also returns the hidden
/// pre-sign values so the caller can keep away from hardtanh kinks.
fn surrogate(p: &Point, p0: &Point, x: &Array2<f64>, labels: &[u8], y0: Option<&Array2<f64>>) -> (f64, Array2<f64>) {
    let wb1 = p0.w1.mapv(sgn) + &p.w1 - &p0.w1;
    let wb2 = p0.w2.mapv(sgn) + &p.w2 - &p0.w2;
    let z = x.dot(&wb1.t());
    let b = z.nrows() as f64;
    let mut y = Array2::zeros(z.raw_dim());
    for j in 0..z.ncols() {
        let col = z.column(j);
        let mean = col.sum() / b;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / b;
        for i in 0..z.nrows() {
            y[[i, j]] = p.gamma[j] * (z[[i, j]] - mean) / (var + BN_EPSILON).sqrt() + p.beta[j];
        }
    }
    let anchor = y0.cloned().unwrap_or_else(|| y.clone());
    let a = Array2::from_shape_fn(y.raw_dim(), |ij| sgn(anchor[ij]) + hardtanh(y[ij]) - hardtanh(anchor[ij]));
    let logits = a.dot(&wb2.t()) / (wb2.ncols() as f64).sqrt();
    let mut loss = 0.0;
    for (row, &l) in logits.outer_iter().zip(labels) {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let lse = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
        loss += lse - row[l as usize];
    }
    (loss / b, y)
}

/// Worst relative error between the network's gradients and central finite
/// differences of the surrogate for a random 3-4-2 network (20 weights)
/// drawn from `seed`. `None` when a hidden pre-activation sits too close to
/// a hardtanh kink for finite differences to be meaningful.
pub fn ste_worst_relative_error(seed: u64) -> Option<f64> {
    let mut rng = seeded(seed);
    let mut net = LatentNetwork::init(&[3, 4, 2], &mut rng).unwrap();
    // keep latent weights strictly inside the clip range and away from 0
    for layer in &mut net.layers {
        layer.weights.mapv_inplace(|_| {
            let m = rng.random_range(0.1..0.9);
            if rng.random::<bool>() { m } else { -m }
        });
    }
    let bn = net.layers[0].batchnorm.as_mut().unwrap();
    bn.gamma.mapv_inplace(|_| rng.random_range(0.3..0.9));
    bn.beta.mapv_inplace(|_| rng.random_range(-0.3..0.3));
    let batch = 8;
    let x = Array2::from_shape_fn((batch, 3), |_| rng.random_range(-1.0..1.0));
    let labels: Vec<u8> = (0..batch).map(|_| rng.random_range(0..2)).collect();

    let p0 = Point {
        w1: net.layers[0].weights.clone(),
        gamma: net.layers[0].batchnorm.as_ref().unwrap().gamma.clone(),
        beta: net.layers[0].batchnorm.as_ref().unwrap().beta.clone(),
        w2: net.layers[1].weights.clone(),
    };
    let (l0, y0) = surrogate(&p0, &p0, &x, &labels, None);
    if y0.iter().any(|v| (v.abs() - 1.0).abs() < 1e-3) {
        return None;
    }
    let (loss, grads) = net.loss_and_gradients(x.view(), &labels).unwrap();
    assert!((loss - l0).abs() < 1e-12, "surrogate must agree with the network at the anchor point");
    assert!(grads.batchnorm[1].is_none());

    let h = 1e-6;
    let fd = |perturb: &dyn Fn(&mut Point, f64)| {
        let mut plus = p0.clone();
        let mut minus = p0.clone();
        perturb(&mut plus, h);
        perturb(&mut minus, -h);
        (surrogate(&plus, &p0, &x, &labels, Some(&y0)).0 - surrogate(&minus, &p0, &x, &labels, Some(&y0)).0) / (2.0 * h)
    };
    let rel = |analytic: f64, numeric: f64| (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3);
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..3 {
            worst = worst.max(rel(grads.weights[0][[i, j]], fd(&|p, d| p.w1[[i, j]] += d)));
        }
    }
    for i in 0..2 {
        for j in 0..4 {
            worst = worst.max(rel(grads.weights[1][[i, j]], fd(&|p, d| p.w2[[i, j]] += d)));
        }
    }
    let (dg, db) = grads.batchnorm[0].as_ref().unwrap();
    for j in 0..4 {
        worst = worst.max(rel(dg[j], fd(&|p, d| p.gamma[j] += d)));
        worst = worst.max(rel(db[j], fd(&|p, d| p.beta[j] += d)));
    }
    Some(worst)
}
