use super::bits::{words_for, xnor_popcount_words, PackedBits, WORD_BITS};
use crate::error::{Error, Result};

/// Fully connected binary layer. Row `j` holds the `N` weight bits of
/// neuron `j` (bit 1 ⇔ weight +1); `thresholds[j]` is the popcount a neuron
/// needs to fire.
#[derive(Debug, Clone)]
pub struct BinaryLinearLayer {
    n_inputs: usize,
    n_neurons: usize,
    words_per_row: usize,
    weights: Vec<u64>,
    thresholds: Vec<i32>,
    clamped: usize,
}

/// Equality covers weights and thresholds; the clamp count is construction
/// history and is ignored.
impl PartialEq for BinaryLinearLayer {
    fn eq(&self, other: &Self) -> bool {
        self.n_inputs == other.n_inputs
            && self.n_neurons == other.n_neurons
            && self.weights == other.weights
            && self.thresholds == other.thresholds
    }
}

impl Eq for BinaryLinearLayer {}

impl BinaryLinearLayer {
    /// Builds a layer from per-neuron weight rows. Thresholds outside
    /// `[0, N]` are clamped and counted in
    /// [`clamped_thresholds`](Self::clamped_thresholds).
    pub fn new(n_inputs: usize, rows: &[PackedBits], thresholds: &[i64]) -> Result<Self> {
        let words_per_row = words_for(n_inputs);
        let mut weights = Vec::with_capacity(rows.len() * words_per_row);
        for row in rows {
            if row.len() != n_inputs {
                return Err(Error::Length {
                    expected: n_inputs,
                    got: row.len(),
                });
            }
            weights.extend_from_slice(row.words());
        }
        Self::from_words(n_inputs, rows.len(), weights, thresholds)
    }

    /// Builds a layer from neuron-major packed words. Pad bits must be zero.
    pub fn from_words(n_inputs: usize, n_neurons: usize, weights: Vec<u64>, thresholds: &[i64]) -> Result<Self> {
        if n_inputs == 0 || n_neurons == 0 {
            return Err(Error::Domain(format!("layer dimensions must be positive, got {n_inputs}x{n_neurons}")));
        }
        let words_per_row = words_for(n_inputs);
        if weights.len() != n_neurons * words_per_row {
            return Err(Error::Dimension {
                expected: format!("{} weight words", n_neurons * words_per_row),
                got: format!("{}", weights.len()),
            });
        }
        if thresholds.len() != n_neurons {
            return Err(Error::Dimension {
                expected: format!("{n_neurons} thresholds"),
                got: format!("{}", thresholds.len()),
            });
        }
        if !n_inputs.is_multiple_of(WORD_BITS) {
            let pad = !((1u64 << (n_inputs % WORD_BITS)) - 1);
            if weights.chunks(words_per_row).any(|row| row[words_per_row - 1] & pad != 0) {
                return Err(Error::WeightFormat("nonzero pad bits in weight row".into()));
            }
        }
        let n = n_inputs as i64;
        let mut clamped = 0;
        let thresholds = thresholds
            .iter()
            .map(|&t| {
                if !(0..=n).contains(&t) {
                    clamped += 1;
                }
                t.clamp(0, n) as i32
            })
            .collect();
        if clamped > 0 {
            log::warn!("{clamped} thresholds clamped into [0, {n_inputs}]");
        }
        Ok(Self {
            n_inputs,
            n_neurons,
            words_per_row,
            weights,
            thresholds,
            clamped,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_neurons(&self) -> usize {
        self.n_neurons
    }

    pub fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    pub fn clamped_thresholds(&self) -> usize {
        self.clamped
    }

    pub fn weight_words(&self) -> &[u64] {
        &self.weights
    }

    pub fn weight_row(&self, neuron: usize) -> &[u64] {
        &self.weights[neuron * self.words_per_row..(neuron + 1) * self.words_per_row]
    }

    pub fn weight(&self, neuron: usize, input: usize) -> bool {
        (self.weight_row(neuron)[input / WORD_BITS] >> (input % WORD_BITS)) & 1 == 1
    }

    pub fn set_weight(&mut self, neuron: usize, input: usize, value: bool) {
        assert!(neuron < self.n_neurons && input < self.n_inputs);
        let w = &mut self.weights[neuron * self.words_per_row + input / WORD_BITS];
        let mask = 1u64 << (input % WORD_BITS);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn flip_weight(&mut self, neuron: usize, input: usize) {
        assert!(neuron < self.n_neurons && input < self.n_inputs);
        self.weights[neuron * self.words_per_row + input / WORD_BITS] ^= 1u64 << (input % WORD_BITS);
    }

    pub fn thresholds(&self) -> &[i32] {
        &self.thresholds
    }

    pub fn threshold(&self, neuron: usize) -> i32 {
        self.thresholds[neuron]
    }

    /// Sets a threshold, clamping into `[0, N]`.
    pub fn set_threshold(&mut self, neuron: usize, t: i64) {
        self.thresholds[neuron] = t.clamp(0, self.n_inputs as i64) as i32;
    }

    fn check_input(&self, x: &PackedBits) -> Result<()> {
        if x.len() != self.n_inputs {
            return Err(Error::Length {
                expected: self.n_inputs,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn preactivation(&self, neuron: usize, x: &PackedBits) -> u32 {
        xnor_popcount_words(self.weight_row(neuron), x.words(), self.n_inputs)
    }

    /// Binary activations `popcount >= T` for every neuron.
    pub fn activate(&self, x: &PackedBits) -> Result<PackedBits> {
        self.check_input(x)?;
        let mut out = PackedBits::zeros(self.n_neurons);
        for j in 0..self.n_neurons {
            if self.preactivation(j, x) as i32 >= self.thresholds[j] {
                out.set(j, true);
            }
        }
        Ok(out)
    }

    /// Signed integer scores `2·popcount − N`, i.e. the ±1 dot product.
    pub fn scores(&self, x: &PackedBits) -> Result<Vec<i32>> {
        self.check_input(x)?;
        let n = self.n_inputs as i32;
        Ok((0..self.n_neurons).map(|j| 2 * self.preactivation(j, x) as i32 - n).collect())
    }
}
