//! Binarized neural-network inference.
//!
//! A neuron with ±1 weights `W` and inputs `X` computes `sign(Σ WᵢXᵢ − θ)`.
//! Encoding +1 as a set bit turns each product into an XNOR, and since
//! `Σ WᵢXᵢ = 2·POPCOUNT(XNOR(W, X)) − N` the neuron becomes
//! `POPCOUNT(XNOR(W, X)) ≥ T` with `T = ⌈(θ + N) / 2⌉`.

mod arrays;
mod bits;
mod fault;
pub mod io;
mod layer;
mod model;

pub use arrays::{run_on_arrays, ArrayBank, ArrayGeometry};
pub use bits::{neuron_activation, words_for, xnor_popcount_preactivation, xnor_popcount_words, PackedBits, WORD_BITS};
pub use fault::{inject_errors, inject_weight_errors, weight_bit_differences};
pub use layer::BinaryLinearLayer;
pub use model::{argmax, binarize_bytes, forward, BnnModel, Inference, InputBinarizer};

/// Threshold equivalent to a real bias `θ` on the ±1 dot product.
pub fn threshold_for_bias(theta: i64, n: usize) -> i64 {
    (theta + n as i64).div_euclid(2) + (theta + n as i64).rem_euclid(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{Anchor, Calibration, ProgrammingCondition, ResistanceDistribution};
    use crate::rng::seeded;
    use rand::seq::SliceRandom;
    use rand::Rng;

    pub(crate) fn random_model(sizes: &[usize], seed: u64) -> BnnModel {
        let mut rng = seeded(seed);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let rows: Vec<PackedBits> = (0..w[1])
                    .map(|_| PackedBits::from_bools(&(0..w[0]).map(|_| rng.random()).collect::<Vec<_>>()))
                    .collect();
                let t: Vec<i64> = (0..w[1]).map(|_| rng.random_range(w[0] as i64 / 2 - 5..=w[0] as i64 / 2 + 5)).collect();
                BinaryLinearLayer::new(w[0], &rows, &t).unwrap()
            })
            .collect();
        BnnModel::new(layers).unwrap()
    }

    fn degenerate_calibration() -> Calibration {
        let d = ResistanceDistribution::degenerate(8.5, 11.5).unwrap();
        Calibration::new(
            vec![Anchor { strength: -10.0, distribution: d }, Anchor { strength: 10.0, distribution: d }],
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn threshold_rounding() {
        assert_eq!(threshold_for_bias(0, 10), 5);
        assert_eq!(threshold_for_bias(1, 10), 6);
        assert_eq!(threshold_for_bias(-1, 10), 5);
        assert_eq!(threshold_for_bias(-3, 10), 4);
    }

    #[test]
    fn thresholds_clamped_and_flagged() {
        let rows = vec![PackedBits::zeros(10); 3];
        let l = BinaryLinearLayer::new(10, &rows, &[-4, 5, 17]).unwrap();
        assert_eq!(l.thresholds(), &[0, 5, 10]);
        assert_eq!(l.clamped_thresholds(), 2);
    }

    #[test]
    fn chain_mismatch_rejected() {
        let a = BinaryLinearLayer::new(8, &vec![PackedBits::zeros(8); 4], &[4; 4]).unwrap();
        let b = BinaryLinearLayer::new(5, &vec![PackedBits::zeros(5); 2], &[2; 2]).unwrap();
        assert!(matches!(BnnModel::new(vec![a, b]), Err(crate::Error::Dimension { .. })));
    }

    #[test]
    fn permutation_layers_propagate_balanced_inputs() {
        let n = 16;
        let mut rng = seeded(12);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let perm_layer = |perm: &[usize]| {
            let rows: Vec<PackedBits> = perm
                .iter()
                .map(|&p| PackedBits::from_bools(&(0..n).map(|i| i == p).collect::<Vec<_>>()))
                .collect();
            BinaryLinearLayer::new(n, &rows, &vec![n as i64 / 2; n]).unwrap()
        };
        let identity: Vec<usize> = (0..n).collect();
        let model = BnnModel::new(vec![perm_layer(&perm), perm_layer(&identity), perm_layer(&identity)]).unwrap();
        for _ in 0..50 {
            let mut bits = vec![true; n / 2];
            bits.extend(vec![false; n / 2]);
            bits.shuffle(&mut rng);
            let x = PackedBits::from_bools(&bits);
            let hidden = model.hidden_activations(&x).unwrap();
            let expected: Vec<bool> = perm.iter().map(|&p| bits[p]).collect();
            assert_eq!(hidden[0].to_bools(), expected);
            assert_eq!(hidden[1].to_bools(), expected);
            // last layer scores are +2 where the permuted bit is set, -2 elsewhere
            let out = model.forward_bits(&x).unwrap();
            for (j, &s) in out.scores.iter().enumerate() {
                assert_eq!(s > 0, expected[j]);
            }
        }
    }

    #[test]
    fn template_matching_classifies() {
        let mut rng = seeded(5);
        let n = 100;
        let templates: Vec<Vec<bool>> = (0..10).map(|_| (0..n).map(|_| rng.random()).collect()).collect();
        let rows: Vec<PackedBits> = templates.iter().map(|t| PackedBits::from_bools(t)).collect();
        let model = BnnModel::new(vec![BinaryLinearLayer::new(n, &rows, &[50; 10]).unwrap()]).unwrap();
        for (k, t) in templates.iter().enumerate() {
            let input: Vec<f32> = t.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
            let a = model.forward(&input).unwrap();
            assert_eq!(a.class, k);
            assert_eq!(a.scores[k], n as i32);
            assert_eq!(a, forward(&model, &input).unwrap());
        }
        assert!(model.forward(&[0.0; 99]).is_err());
    }

    #[test]
    fn argmax_lowest_index_on_ties() {
        assert_eq!(argmax(&[3, 7, 7, 1]), 1);
        assert_eq!(argmax(&[-2, -2]), 0);
    }

    #[test]
    fn injection_extremes() {
        let m = random_model(&[100, 40, 10], 1);
        assert_eq!(inject_weight_errors(&m, 0.0, &mut seeded(1)).unwrap(), m);
        let all = inject_weight_errors(&m, 1.0, &mut seeded(1)).unwrap();
        assert_eq!(weight_bit_differences(&m, &all).unwrap(), m.weight_bits() as u64);
        for (a, b) in m.layers().iter().zip(all.layers()) {
            assert_eq!(a.thresholds(), b.thresholds());
            assert_eq!(b.clamped_thresholds(), 0);
        }
        assert!(inject_weight_errors(&m, 1.1, &mut seeded(1)).is_err());
        assert!(inject_weight_errors(&m, -0.1, &mut seeded(1)).is_err());
    }

    #[test]
    fn injection_half_rate_is_binomial() {
        let m = random_model(&[784, 300, 10], 2);
        let total = m.weight_bits() as f64;
        let flipped = weight_bit_differences(&m, &inject_weight_errors(&m, 0.5, &mut seeded(9)).unwrap()).unwrap() as f64;
        let sigma = (total * 0.25).sqrt();
        assert!((flipped - 0.5 * total).abs() < 4.0 * sigma);
    }

    #[test]
    fn injection_leaves_original_and_is_seeded() {
        let m = random_model(&[64, 16, 4], 3);
        let copy = m.clone();
        let a = inject_weight_errors(&m, 0.1, &mut seeded(4)).unwrap();
        let b = inject_weight_errors(&m, 0.1, &mut seeded(4)).unwrap();
        assert_eq!(m, copy);
        assert_eq!(a, b);
    }

    #[test]
    fn threshold_injection_optional() {
        let m = random_model(&[64, 16, 4], 3);
        let w_only = inject_errors(&m, 0.2, false, &mut seeded(4)).unwrap();
        let with_t = inject_errors(&m, 0.2, true, &mut seeded(4)).unwrap();
        assert_eq!(weight_bit_differences(&w_only, &with_t).unwrap(), 0);
        assert_ne!(w_only, with_t);
        for l in with_t.layers() {
            assert!(l.thresholds().iter().all(|&t| (0..=l.n_inputs() as i32).contains(&t)));
        }
    }

    #[test]
    fn weight_file_roundtrip_and_layout() {
        let m = random_model(&[70, 5, 3], 8);
        let bytes = io::to_bytes(&m);
        assert_eq!(&bytes[..4], b"BNN1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 70);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 5);
        let t0 = i32::from_le_bytes(bytes[16..20].try_into().unwrap());
        assert_eq!(t0, m.layers()[0].threshold(0));
        let w0 = u64::from_le_bytes(bytes[36..44].try_into().unwrap());
        assert_eq!(w0, m.layers()[0].weight_row(0)[0]);
        // 8 header + layer0: 8 + 5*4 + 5*2*8, layer1: 8 + 3*4 + 3*1*8
        assert_eq!(bytes.len(), 8 + 8 + 20 + 80 + 8 + 12 + 24);
        assert_eq!(io::from_bytes(&bytes).unwrap(), m);
    }

    #[test]
    fn weight_file_errors() {
        let m = random_model(&[70, 5, 3], 8);
        let bytes = io::to_bytes(&m);
        assert!(matches!(io::from_bytes(&bytes[..bytes.len() - 1]), Err(crate::Error::WeightFormat(_))));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(io::from_bytes(&bad), Err(crate::Error::WeightFormat(_))));
        let mut trailing = bytes.clone();
        trailing.push(0);
        assert!(io::from_bytes(&trailing).is_err());
        let mut pad = bytes;
        // second word of neuron 0 only holds 6 valid bits
        pad[44 + 7] = 0xFF;
        assert!(io::from_bytes(&pad).is_err());
    }

    #[test]
    fn arrays_without_variability_match_forward() {
        let calib = degenerate_calibration();
        let m = random_model(&[100, 40, 10], 21);
        let mut rng = seeded(3);
        for _ in 0..5 {
            let input: Vec<f32> = (0..100).map(|_| rng.random()).collect();
            let on_arrays = run_on_arrays(&m, &ProgrammingCondition::weak(), &calib, ArrayGeometry::default(), &input, &mut rng).unwrap();
            assert_eq!(on_arrays, m.forward(&input).unwrap());
        }
    }

    #[test]
    fn tiling_is_partition_invariant() {
        let calib = degenerate_calibration();
        let m = random_model(&[784, 40, 10], 22);
        let untiled = ArrayGeometry { rows: 784, cols: 40, max_arrays: 2 };
        let mut rng = seeded(4);
        let input: Vec<f32> = (0..784).map(|_| rng.random()).collect();
        let a = run_on_arrays(&m, &ProgrammingCondition::weak(), &calib, ArrayGeometry::default(), &input, &mut seeded(1)).unwrap();
        let b = run_on_arrays(&m, &ProgrammingCondition::weak(), &calib, untiled, &input, &mut seeded(1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn capacity_error_reports_cells() {
        let m = random_model(&[784, 300, 10], 1);
        let g = ArrayGeometry { rows: 32, cols: 32, max_arrays: 10 };
        let err = ArrayBank::program(&m, &ProgrammingCondition::weak(), &Calibration::default(), g, &mut seeded(1)).unwrap_err();
        match err {
            crate::Error::Capacity { required, available } => {
                assert_eq!(required, (25 * 10 + 10) * 1024);
                assert_eq!(available, 10 * 1024);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn bank_energy_counts_programmed_words() {
        let calib = Calibration::default();
        let m = random_model(&[40, 20, 3], 5);
        let cond = ProgrammingCondition::weak();
        let bank = ArrayBank::program(&m, &cond, &calib, ArrayGeometry::default(), &mut seeded(2)).unwrap();
        // layer 0: 2 row tiles (32 + 8 rows) x 1 col tile; layer 1: 1 x 1 with 20 rows
        let words = 32 + 8 + 20;
        let per_bit = calib.programming_energy(&cond).mean_energy_per_bit_j;
        let expected = (words * 32) as f64 * 2.0 * per_bit;
        assert!((bank.program_energy_j() - expected).abs() < 1e-20);
        assert_eq!(bank.array_count(), 3);
    }
}
