//! Trains a small binarized MLP on part of MNIST and saves it.
//!
//!     cargo run --release --example train_mnist -- data/mnist [model.bnn]

use rram_bnn::bnn::io;
use rram_bnn::dataset::{load_split, Split, PIXELS};
use rram_bnn::train::{train_bnn, TrainConfig};

fn main() -> rram_bnn::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "data/mnist".into());
    let out = std::env::args().nth(2).unwrap_or_else(|| "model.bnn".into());
    let train = load_split(&dir, Split::Train)?.head(20_000);
    let test = load_split(&dir, Split::Test)?;
    let cfg = TrainConfig { epochs: 3, ..TrainConfig::default() };
    let outcome = train_bnn(&train, Some(&test), &[PIXELS, 200, 10], &cfg)?;
    for e in &outcome.log {
        println!("epoch {} loss {:.4} test accuracy {:.4}", e.epoch, e.train_loss, e.test_accuracy.unwrap_or(f64::NAN));
    }
    let first = outcome.model.forward(&test.normalized(0))?;
    println!("test image 0 (label {}) classified as {}", test.label(0), first.class);
    io::save(&outcome.model, &out)?;
    println!("saved {out} ({} weight bits)", outcome.model.weight_bits());
    Ok(())
}
