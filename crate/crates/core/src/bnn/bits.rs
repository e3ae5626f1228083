use crate::error::{Error, Result};

pub const WORD_BITS: usize = 64;

pub fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// Mask of the valid bits in the last word of a `len`-bit vector.
fn tail_mask(len: usize) -> u64 {
    match len % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Bit vector packed little-endian into 64-bit words. Bit `i` lives in word
/// `i / 64` at position `i % 64`; pad bits past `len` are always zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PackedBits {
    words: Vec<u64>,
    len: usize,
}

impl PackedBits {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut out = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                out.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        out
    }

    /// Encodes ±1 values, +1 as a set bit. Zero counts as +1.
    pub fn from_signs(values: &[i8]) -> Self {
        let bools: Vec<bool> = values.iter().map(|&v| v >= 0).collect();
        Self::from_bools(&bools)
    }

    /// Takes ownership of raw words, clearing any pad bits.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Result<Self> {
        if words.len() != words_for(len) {
            return Err(Error::Length {
                expected: words_for(len) * WORD_BITS,
                got: words.len() * WORD_BITS,
            });
        }
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Ok(Self { words, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

/// POPCOUNT(XNOR(w, x)) over the first `n` bits of two packed slices.
/// Callers guarantee both slices hold `words_for(n)` words.
#[inline]
pub fn xnor_popcount_words(w: &[u64], x: &[u64], n: usize) -> u32 {
    let full = n / WORD_BITS;
    let mut count: u32 = w[..full]
        .iter()
        .zip(&x[..full])
        .map(|(a, b)| (!(a ^ b)).count_ones())
        .sum();
    if !n.is_multiple_of(WORD_BITS) {
        count += (!(w[full] ^ x[full]) & tail_mask(n)).count_ones();
    }
    count
}

/// Number of positions where `w` and `x` agree, in `[0, N]`.
pub fn xnor_popcount_preactivation(w: &PackedBits, x: &PackedBits) -> Result<u32> {
    if w.len != x.len {
        return Err(Error::Length {
            expected: w.len,
            got: x.len,
        });
    }
    Ok(xnor_popcount_words(&w.words, &x.words, w.len))
}

/// Sign activation with the threshold convention `sign(0) = +1`:
/// fires iff `preactivation >= threshold`.
#[inline]
pub fn neuron_activation(preactivation: i64, threshold: i64) -> bool {
    preactivation - threshold >= 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;
    use rand::Rng;

    fn naive(w: &[bool], x: &[bool]) -> u32 {
        w.iter().zip(x).filter(|(a, b)| a == b).count() as u32
    }

    #[test]
    fn hand_example() {
        // w = 10110, x = 10011 -> XNOR 11010 -> 3
        let w = PackedBits::from_bools(&[true, false, true, true, false]);
        let x = PackedBits::from_bools(&[true, false, false, true, true]);
        assert_eq!(xnor_popcount_preactivation(&w, &x).unwrap(), 3);
    }

    #[test]
    fn self_agreement_is_n() {
        let mut rng = seeded(1);
        for n in [1, 5, 63, 64, 65, 784, 1000] {
            let bits: Vec<bool> = (0..n).map(|_| rng.random()).collect();
            let v = PackedBits::from_bools(&bits);
            assert_eq!(xnor_popcount_preactivation(&v, &v).unwrap(), n as u32);
        }
    }

    #[test]
    fn length_mismatch() {
        let a = PackedBits::zeros(10);
        let b = PackedBits::zeros(11);
        assert!(matches!(xnor_popcount_preactivation(&a, &b), Err(Error::Length { .. })));
    }

    #[test]
    fn pad_bits_excluded() {
        // all-zero vectors agree everywhere, including where pad bits would
        assert_eq!(xnor_popcount_preactivation(&PackedBits::zeros(70), &PackedBits::zeros(70)).unwrap(), 70);
        let p = PackedBits::from_words(vec![u64::MAX, u64::MAX], 70).unwrap();
        assert_eq!(p.count_ones(), 70);
    }

    #[test]
    fn packed_matches_naive_exhaustive_widths() {
        let mut rng = seeded(2);
        for n in 1..=256 {
            for _ in 0..8 {
                let w: Vec<bool> = (0..n).map(|_| rng.random()).collect();
                let x: Vec<bool> = (0..n).map(|_| rng.random()).collect();
                let got = xnor_popcount_preactivation(&PackedBits::from_bools(&w), &PackedBits::from_bools(&x)).unwrap();
                assert_eq!(got, naive(&w, &x), "n={n}");
            }
        }
    }

    #[test]
    fn activation_ties_fire() {
        assert!(neuron_activation(7, 7));
        assert!(!neuron_activation(6, 7));
        assert!(neuron_activation(100, 50));
    }

    proptest! {
        #[test]
        fn packed_matches_naive_large(seed: u64, n in 257usize..4096) {
            let mut rng = seeded(seed);
            let w: Vec<bool> = (0..n).map(|_| rng.random()).collect();
            let x: Vec<bool> = (0..n).map(|_| rng.random()).collect();
            let got = xnor_popcount_preactivation(&PackedBits::from_bools(&w), &PackedBits::from_bools(&x)).unwrap();
            prop_assert_eq!(got, naive(&w, &x));
        }

        #[test]
        fn bools_roundtrip(bits in proptest::collection::vec(any::<bool>(), 0..300)) {
            prop_assert_eq!(PackedBits::from_bools(&bits).to_bools(), bits);
        }
    }
}
