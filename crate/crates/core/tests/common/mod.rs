#![allow(dead_code)]

pub mod ste;

use std::path::PathBuf;

use rand::Rng;
use rram_bnn::bnn::{BinaryLinearLayer, BnnModel, PackedBits};
use rram_bnn::dataset::{load_split, LabeledImageSet, Split};
use rram_bnn::rng::seeded;

/// `$MNIST_DIR`, or `data/mnist` at the workspace root.
pub fn mnist_dir() -> PathBuf {
    std::env::var_os("MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"))
}

pub fn mnist(split: Split) -> Option<LabeledImageSet> {
    match load_split(mnist_dir(), split) {
        Ok(set) => Some(set),
        Err(e) => {
            eprintln!("MNIST unavailable ({e}); set MNIST_DIR to run this check");
            None
        }
    }
}

pub fn random_bits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PackedBits {
    PackedBits::from_bools(&(0..n).map(|_| rng.random()).collect::<Vec<_>>())
}

/// Random weights; hidden thresholds near N/2 so activations stay mixed.
pub fn random_model(sizes: &[usize], seed: u64) -> BnnModel {
    let mut rng = seeded(seed);
    let last = sizes.len() - 2;
    let layers = sizes
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let rows: Vec<PackedBits> = (0..w[1]).map(|_| random_bits(w[0], &mut rng)).collect();
            let t: Vec<i64> = (0..w[1])
                .map(|_| if k == last { 0 } else { (w[0] / 2) as i64 + rng.random_range(-2..=2) })
                .collect();
            BinaryLinearLayer::new(w[0], &rows, &t).unwrap()
        })
        .collect();
    BnnModel::new(layers).unwrap()
}
