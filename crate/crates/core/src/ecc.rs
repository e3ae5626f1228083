//! (72,64) extended-Hamming SECDED codec and its bit-error transfer curve.
//!
//! Codeword layout, bit `i` of a `u128` (bits 72..128 are always zero):
//!
//! | bits    | contents                                   |
//! |---------|--------------------------------------------|
//! | 0..64   | payload, bit `i` = payload bit `i`         |
//! | 64..71  | Hamming checks `c0..c6`                    |
//! | 71      | overall parity over bits 0..71             |
//!
//! Parity-check columns: payload bit `i` gets the `i`-th integer in
//! `3..=71` that is not a power of two; check bit `c_k` gets `1 << k`; the
//! overall parity bit gets column 0. Every nonzero 7-bit syndrome in
//! `1..=71` names exactly one position, so the code has minimum distance 4.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::Serialize;

use crate::error::{Error, Result};

pub const PAYLOAD_BITS: usize = 64;
pub const CODEWORD_BITS: usize = 72;
const OVERALL_PARITY: usize = 71;
const CODEWORD_MASK: u128 = (1u128 << CODEWORD_BITS) - 1;

struct Tables {
    /// Parity-check column for every codeword position.
    column: [u8; CODEWORD_BITS],
    /// `masks[k]` selects positions whose column has bit `k` set.
    masks: [u128; 7],
    /// Syndrome → position for single errors.
    position: [Option<u8>; 128],
}

const fn build_tables() -> Tables {
    let mut column = [0u8; CODEWORD_BITS];
    let mut next = 3u8;
    let mut i = 0;
    while i < PAYLOAD_BITS {
        while next.is_power_of_two() {
            next += 1;
        }
        column[i] = next;
        next += 1;
        i += 1;
    }
    let mut k = 0;
    while k < 7 {
        column[PAYLOAD_BITS + k] = 1 << k;
        k += 1;
    }
    column[OVERALL_PARITY] = 0;

    let mut masks = [0u128; 7];
    let mut position = [None; 128];
    let mut p = 0;
    while p < CODEWORD_BITS {
        let mut k = 0;
        while k < 7 {
            if column[p] & (1 << k) != 0 {
                masks[k] |= 1u128 << p;
            }
            k += 1;
        }
        if column[p] != 0 {
            position[column[p] as usize] = Some(p as u8);
        }
        p += 1;
    }
    Tables { column, masks, position }
}

static TABLES: Tables = build_tables();

/// Parity-check column of codeword position `pos` (0 for the overall parity bit).
pub fn parity_check_column(pos: usize) -> u8 {
    TABLES.column[pos]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SecdedCodeword(u128);

impl SecdedCodeword {
    pub fn from_bits(bits: u128) -> Self {
        Self(bits & CODEWORD_MASK)
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn payload(self) -> u64 {
        self.0 as u64
    }

    /// `c0..c6` in bits 0..7, overall parity in bit 7.
    pub fn check_bits(self) -> u8 {
        (self.0 >> PAYLOAD_BITS) as u8
    }

    pub fn with_flipped(self, pos: usize) -> Self {
        Self(self.0 ^ (1u128 << pos))
    }

    pub fn to_bool_vec(self) -> Vec<bool> {
        (0..CODEWORD_BITS).map(|i| (self.0 >> i) & 1 == 1).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecodeStatus {
    Ok,
    /// A single flip at this codeword position was repaired.
    Corrected(usize),
    /// Even-weight error pattern: the payload is passed through untouched.
    DetectedUncorrectable,
    /// Odd-weight pattern whose syndrome names no position. At least three
    /// bits are wrong; the payload is passed through untouched.
    MiscorrectionPossible,
}

fn syndrome(word: u128) -> u8 {
    let mut s = 0u8;
    for (k, mask) in TABLES.masks.iter().enumerate() {
        s |= (((word & mask).count_ones() & 1) as u8) << k;
    }
    s
}

pub fn encode(payload: u64) -> SecdedCodeword {
    let mut word = payload as u128;
    let s = syndrome(word);
    word |= (s as u128) << PAYLOAD_BITS;
    if word.count_ones() & 1 == 1 {
        word |= 1u128 << OVERALL_PARITY;
    }
    SecdedCodeword(word)
}

pub fn decode(received: SecdedCodeword) -> (u64, DecodeStatus) {
    let word = received.0;
    let s = syndrome(word);
    let odd = word.count_ones() & 1 == 1;
    match (s, odd) {
        (0, false) => (word as u64, DecodeStatus::Ok),
        (_, false) => (word as u64, DecodeStatus::DetectedUncorrectable),
        (0, true) => (word as u64, DecodeStatus::Corrected(OVERALL_PARITY)),
        (s, true) => match TABLES.position[s as usize] {
            Some(p) => ((word ^ (1u128 << p)) as u64, DecodeStatus::Corrected(p as usize)),
            None => (word as u64, DecodeStatus::MiscorrectionPossible),
        },
    }
}

fn pack(bits: &[bool], expected: usize) -> Result<u128> {
    if bits.len() != expected {
        return Err(Error::Length {
            expected,
            got: bits.len(),
        });
    }
    Ok(bits.iter().enumerate().fold(0u128, |acc, (i, &b)| acc | ((b as u128) << i)))
}

/// Bit-vector front end for [`encode`].
pub fn secded_encode(payload: &[bool]) -> Result<SecdedCodeword> {
    Ok(encode(pack(payload, PAYLOAD_BITS)? as u64))
}

/// Bit-vector front end for [`decode`].
pub fn secded_decode(received: &[bool]) -> Result<(Vec<bool>, DecodeStatus)> {
    let (payload, status) = decode(SecdedCodeword(pack(received, CODEWORD_BITS)?));
    Ok(((0..PAYLOAD_BITS).map(|i| (payload >> i) & 1 == 1).collect(), status))
}

/// One point of the SECDED transfer curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferPoint {
    pub input_ber: f64,
    pub output_ber: f64,
    pub ci_halfwidth: f64,
    pub n_words: u64,
}

/// Flips each of the 72 bits of `n_words` codewords independently with
/// probability `p`, decodes, and reports residual payload errors per payload
/// bit. Words flagged uncorrectable keep their corrupted payload.
pub fn secded_output_ber<R: Rng + ?Sized>(p: f64, n_words: u64, rng: &mut R) -> Result<TransferPoint> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("bit error probability must be in [0, 1], got {p}")));
    }
    if n_words == 0 {
        return Err(Error::Domain("n_words must be at least 1".into()));
    }
    let total_bits = n_words * CODEWORD_BITS as u64;
    let (mut sum, mut sum_sq) = (0u64, 0u64);
    if p > 0.0 {
        // The decoder is syndrome-linear, so the all-zero codeword is
        // representative and the error pattern alone fixes the outcome.
        let gaps = Geometric::new(p).map_err(|e| Error::Domain(e.to_string()))?;
        let mut next = gaps.sample(rng);
        let mut word_index = u64::MAX;
        let mut pattern = 0u128;
        let mut flush = |pattern: u128| {
            if pattern != 0 {
                let (payload, _) = decode(SecdedCodeword(pattern));
                let r = payload.count_ones() as u64;
                sum += r;
                sum_sq += r * r;
            }
        };
        while next < total_bits {
            let w = next / CODEWORD_BITS as u64;
            if w != word_index {
                flush(pattern);
                pattern = 0;
                word_index = w;
            }
            pattern |= 1u128 << (next % CODEWORD_BITS as u64);
            next = next.saturating_add(gaps.sample(rng)).saturating_add(1);
        }
        flush(pattern);
    }
    let n = n_words as f64;
    let mean = sum as f64 / n;
    let var = (sum_sq as f64 / n - mean * mean).max(0.0);
    let half = 1.959_963_984_540_054 * (var / n).sqrt();
    Ok(TransferPoint {
        input_ber: p,
        output_ber: mean / PAYLOAD_BITS as f64,
        ci_halfwidth: half / PAYLOAD_BITS as f64,
        n_words,
    })
}

/// Locates the input BER above which SECDED stops helping (output ≥ input)
/// by bisection on `[lo, hi]`. Every evaluation reuses `seed`, so the
/// comparison uses common random numbers.
pub fn find_crossover(lo: f64, hi: f64, n_words: u64, seed: u64, iterations: usize) -> Result<f64> {
    let helps = |p: f64| -> Result<bool> {
        let pt = secded_output_ber(p, n_words, &mut crate::rng::seeded(seed))?;
        Ok(pt.output_ber < p)
    };
    if !helps(lo)? || helps(hi)? {
        return Err(Error::Domain(format!("no crossover bracketed by [{lo}, {hi}]")));
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..iterations {
        let mid = (lo * hi).sqrt();
        if helps(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}
