//! Programs one kilobit 2T2R array at a weak condition, counts read errors,
//! shows an XNOR-PCSA column popcount, and optionally dumps the resistances.
//!
//!     cargo run --release --example xnor_array [dump.csv]

use std::fs::File;

use rram_bnn::array::{count_errors, Array2T2R, BitMatrix};
use rram_bnn::device::{Calibration, ProgrammingCondition};
use rram_bnn::rng::seeded;

fn main() -> rram_bnn::Result<()> {
    let calib = Calibration::default();
    let cond = ProgrammingCondition::new(200.0, 1.5, 1e-6);
    let data = BitMatrix::from_fn(32, 32, |r, c| (r * 7 + c * 3) % 5 < 2);
    let mut array = Array2T2R::kilobit();
    array.program_matrix(&data, &cond, &calib, &mut seeded(3))?;
    println!("{cond}: {} of {} bits read back wrong", count_errors(&array, &data)?, array.bits());
    println!("programming energy {:.3e} J", array.cumulative_program_energy_j());

    // column 0 as a neuron: popcount of XNOR(weight, input) down the column
    let input: Vec<bool> = (0..32).map(|r| r % 3 == 0).collect();
    let mut in_memory = 0;
    let mut ideal = 0;
    for (r, &x) in input.iter().enumerate() {
        in_memory += array.read_xnor(r, 0, x)? as u32;
        ideal += (data.get(r, 0) == x) as u32;
    }
    println!("column 0 popcount: {in_memory} in memory, {ideal} ideal");

    if let Some(path) = std::env::args().nth(1) {
        array.write_csv(File::create(&path)?)?;
        println!("resistances written to {path}");
    }
    Ok(())
}
