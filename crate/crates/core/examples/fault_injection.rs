//! Accuracy of a saved model under uniformly injected weight bit errors.
//!
//!     cargo run --release --example fault_injection -- model.bnn data/mnist

use rram_bnn::bnn::io;
use rram_bnn::dataset::{load_split, Split};
use rram_bnn::experiment::{sweep_ber, EvalSet};

fn main() -> rram_bnn::Result<()> {
    let mut args = std::env::args().skip(1);
    let model = io::load(args.next().unwrap_or_else(|| "model.bnn".into()))?;
    let test = load_split(args.next().unwrap_or_else(|| "data/mnist".into()), Split::Test)?;
    let bits = test.binarized();
    let eval = EvalSet { inputs: &bits, labels: test.labels() };
    for row in sweep_ber(&model, eval, &[0.0, 1e-4, 1e-3, 1e-2, 0.05, 0.1], 5, 42)? {
        println!(
            "BER {:>7.0e}: accuracy {:.4} ± {:.4} ({:.0} bits flipped)",
            row.weight_ber,
            row.accuracy_mean,
            row.accuracy_std.unwrap_or(0.0),
            row.flipped_bits_mean
        );
    }
    Ok(())
}
