//! Programs a saved model into 2T2R arrays at each grid condition and
//! reports accuracy against programming energy.
//!
//!     cargo run --release --example energy_tradeoff -- model.bnn data/mnist

use rram_bnn::bnn::{io, ArrayGeometry};
use rram_bnn::config::Config;
use rram_bnn::dataset::{load_split, Split};
use rram_bnn::device::Calibration;
use rram_bnn::experiment::{cheapest_within, energy_tradeoff, EvalSet};

fn main() -> rram_bnn::Result<()> {
    let mut args = std::env::args().skip(1);
    let model = io::load(args.next().unwrap_or_else(|| "model.bnn".into()))?;
    let test = load_split(args.next().unwrap_or_else(|| "data/mnist".into()), Split::Test)?;
    let bits = test.binarized();
    let eval = EvalSet { inputs: &bits, labels: test.labels() };
    let clean = model.accuracy(&bits, test.labels())?;
    let conds = Config::default().sweep.programming_conditions();
    let rows = energy_tradeoff(&model, eval, &Calibration::default(), ArrayGeometry::default(), &conds, 3, 42)?;
    for r in &rows {
        println!(
            "{:>5} uA {:>4} V {:>7.0e} s: {:.3e} J/bit, BER {:.2e}, accuracy {:.4}",
            r.compliance_current_ua, r.reset_voltage_v, r.pulse_duration_s, r.mean_energy_per_bit_j, r.effective_ber, r.accuracy_mean
        );
    }
    if let Some(best) = cheapest_within(&rows, clean, 0.01) {
        println!("cheapest within 1 point of clean ({clean:.4}): {:.3e} J/bit", best.mean_energy_per_bit_j);
    }
    Ok(())
}
