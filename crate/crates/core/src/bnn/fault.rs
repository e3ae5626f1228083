use rand::Rng;
use rand_distr::{Distribution, Geometric};

use super::model::BnnModel;
use crate::error::{Error, Result};

/// Calls `visit(k)` for each index `k < total` selected independently with
/// probability `p`, in increasing order.
fn bernoulli_positions<R: Rng + ?Sized>(total: u64, p: f64, rng: &mut R, mut visit: impl FnMut(u64)) -> Result<()> {
    if p <= 0.0 || total == 0 {
        return Ok(());
    }
    if p >= 1.0 {
        (0..total).for_each(visit);
        return Ok(());
    }
    let gaps = Geometric::new(p).map_err(|e| Error::Domain(e.to_string()))?;
    let mut k = gaps.sample(rng);
    while k < total {
        visit(k);
        k = k.saturating_add(gaps.sample(rng)).saturating_add(1);
    }
    Ok(())
}

fn check_ber(ber: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&ber) {
        return Err(Error::Domain(format!("bit error rate must be in [0, 1], got {ber}")));
    }
    Ok(())
}

/// Returns a copy of `model` with every stored weight bit flipped
/// independently with probability `ber`. Thresholds are left alone.
pub fn inject_weight_errors<R: Rng + ?Sized>(model: &BnnModel, ber: f64, rng: &mut R) -> Result<BnnModel> {
    inject_errors(model, ber, false, rng)
}

/// Like [`inject_weight_errors`], optionally also flipping the low
/// `⌈log2(N+1)⌉` bits of each threshold (then re-clamping into `[0, N]`).
/// Weight flips are drawn first so enabling thresholds does not change them.
pub fn inject_errors<R: Rng + ?Sized>(model: &BnnModel, ber: f64, thresholds: bool, rng: &mut R) -> Result<BnnModel> {
    check_ber(ber)?;
    let mut out = model.clone();
    for layer in out.layers_mut() {
        let n = layer.n_inputs() as u64;
        let total = n * layer.n_neurons() as u64;
        bernoulli_positions(total, ber, rng, |k| layer.flip_weight((k / n) as usize, (k % n) as usize))?;
    }
    if thresholds {
        for layer in out.layers_mut() {
            let width = u64::BITS - (layer.n_inputs() as u64).leading_zeros();
            let mut flips = vec![0i64; layer.n_neurons()];
            bernoulli_positions(width as u64 * flips.len() as u64, ber, rng, |k| {
                flips[(k / width as u64) as usize] ^= 1 << (k % width as u64);
            })?;
            for (j, mask) in flips.into_iter().enumerate() {
                if mask != 0 {
                    let t = layer.threshold(j) as i64 ^ mask;
                    layer.set_threshold(j, t);
                }
            }
        }
    }
    Ok(out)
}

/// Number of weight bits that differ between two models of identical shape.
pub fn weight_bit_differences(a: &BnnModel, b: &BnnModel) -> Result<u64> {
    if a.layers().len() != b.layers().len() {
        return Err(Error::Dimension {
            expected: format!("{} layers", a.layers().len()),
            got: format!("{}", b.layers().len()),
        });
    }
    let mut diff = 0u64;
    for (la, lb) in a.layers().iter().zip(b.layers()) {
        if (la.n_inputs(), la.n_neurons()) != (lb.n_inputs(), lb.n_neurons()) {
            return Err(Error::Dimension {
                expected: format!("{}x{}", la.n_neurons(), la.n_inputs()),
                got: format!("{}x{}", lb.n_neurons(), lb.n_inputs()),
            });
        }
        diff += la
            .weight_words()
            .iter()
            .zip(lb.weight_words())
            .map(|(x, y)| (x ^ y).count_ones() as u64)
            .sum::<u64>();
    }
    Ok(diff)
}
