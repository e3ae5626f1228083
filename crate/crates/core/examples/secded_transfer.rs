//! SECDED(72,64) output BER against raw BER, and where the code stops helping.
//!
//!     cargo run --release --example secded_transfer

use rram_bnn::ecc::{decode, encode, find_crossover, secded_output_ber, DecodeStatus};
use rram_bnn::rng::seeded;

fn main() -> rram_bnn::Result<()> {
    let cw = encode(0xDEAD_BEEF_0123_4567);
    assert_eq!(decode(cw.with_flipped(10)), (0xDEAD_BEEF_0123_4567, DecodeStatus::Corrected(10)));
    println!("two flips decode as {:?}", decode(cw.with_flipped(3).with_flipped(40)).1);

    println!("{:>10} {:>12} {:>10}", "input", "output", "ci95");
    let mut rng = seeded(1);
    for p in [1e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1] {
        let pt = secded_output_ber(p, 200_000, &mut rng)?;
        println!("{:>10.1e} {:>12.3e} {:>10.1e}", pt.input_ber, pt.output_ber, pt.ci_halfwidth);
    }
    println!("output exceeds input above p = {:.4}", find_crossover(1e-2, 0.1, 200_000, 2, 12)?);
    Ok(())
}
