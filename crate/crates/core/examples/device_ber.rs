//! 1T1R and 2T2R bit-error rates across the default programming grid, with
//! a Monte-Carlo cross-check of the differential rate.
//!
//!     cargo run --release --example device_ber

use rram_bnn::config::Config;
use rram_bnn::device::{ber_1t1r, ber_2t2r, ber_2t2r_mc, Calibration};
use rram_bnn::rng::substream;

fn main() -> rram_bnn::Result<()> {
    let calib = Calibration::default();
    println!("{:<28} {:>8} {:>11} {:>11} {:>11} {:>11}", "condition", "strength", "E/bit (J)", "1T1R", "2T2R", "2T2R MC");
    for (k, cond) in Config::default().sweep.programming_conditions().iter().enumerate() {
        let dist = calib.condition_to_distribution(cond)?;
        let mc = ber_2t2r_mc(&dist, 200_000, &mut substream(7, k as u64))?;
        println!(
            "{:<28} {:>8.3} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e}",
            cond.to_string(),
            cond.strength(),
            calib.programming_energy(cond).mean_energy_per_bit_j,
            ber_1t1r(&dist, dist.log_midpoint_ohms())?,
            ber_2t2r(&dist),
            mc.estimate,
        );
    }
    Ok(())
}
