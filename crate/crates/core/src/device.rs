//! RRAM device statistics: programming conditions, log-normal resistance
//! populations, bit-error rates for 1T1R and 2T2R reads, and programming
//! energy.
//!
//! Resistances are log-normal: `ln R ~ N(mu, sigma²)` separately for the
//! low (LRS) and high (HRS) resistive states. A programming condition maps
//! onto a distribution through a scalar *programming strength*
//!
//! ```text
//! s = ln(I_C / 200 µA) / ln 2.5 + ln(V / 1.5 V) / ln(5/3) + ln(t / 1 µs) / ln 10
//! ```
//!
//! which is 0 at the weak condition (200 µA, 1.5 V, 1 µs) and 3 at the strong
//! one (500 µA, 2.5 V, 10 µs). Distribution parameters are interpolated
//! linearly in `s` over an anchor table. Anchors must widen the median gap
//! and narrow both spreads as `s` grows, which makes the 2T2R error rate
//! non-increasing in every condition field.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{Error, Result};

/// Calibrated compliance-current range, µA.
pub const CURRENT_RANGE_UA: (f64, f64) = (50.0, 500.0);
/// Calibrated RESET voltage range, V.
pub const VOLTAGE_RANGE_V: (f64, f64) = (1.0, 3.0);
/// Calibrated pulse duration range, s.
pub const PULSE_RANGE_S: (f64, f64) = (1e-7, 1e-4);

/// Programming knobs for one write.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProgrammingCondition {
    #[serde(rename = "compliance_current_uA")]
    pub compliance_current_ua: f64,
    #[serde(rename = "reset_voltage_V")]
    pub reset_voltage_v: f64,
    #[serde(rename = "pulse_duration_s")]
    pub pulse_duration_s: f64,
}

impl ProgrammingCondition {
    pub const fn new(compliance_current_ua: f64, reset_voltage_v: f64, pulse_duration_s: f64) -> Self {
        Self {
            compliance_current_ua,
            reset_voltage_v,
            pulse_duration_s,
        }
    }

    /// 200 µA, 1.5 V, 1 µs: the low-energy endurance condition.
    pub const fn weak() -> Self {
        Self::new(200.0, 1.5, 1e-6)
    }

    /// 500 µA, 2.5 V, 10 µs.
    pub const fn strong() -> Self {
        Self::new(500.0, 2.5, 10e-6)
    }

    /// Checks positivity and the calibrated range of every field.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("compliance_current_uA", self.compliance_current_ua, CURRENT_RANGE_UA),
            ("reset_voltage_V", self.reset_voltage_v, VOLTAGE_RANGE_V),
            ("pulse_duration_s", self.pulse_duration_s, PULSE_RANGE_S),
        ];
        for (field, value, (min, max)) in fields {
            if !(value.is_finite() && value > 0.0 && value >= min && value <= max) {
                return Err(Error::Range { field, value, min, max });
            }
        }
        Ok(())
    }

    /// Scalar programming strength; see the module docs.
    pub fn strength(&self) -> f64 {
        (self.compliance_current_ua / 200.0).ln() / 2.5f64.ln()
            + (self.reset_voltage_v / 1.5).ln() / (5.0f64 / 3.0).ln()
            + (self.pulse_duration_s / 1e-6).ln() / 10f64.ln()
    }
}

impl std::fmt::Display for ProgrammingCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "I_C={}uA V={}V t={}s",
            self.compliance_current_ua, self.reset_voltage_v, self.pulse_duration_s
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeviceState {
    Lrs,
    Hrs,
}

/// Log-normal parameters (in ln-ohms) for both resistive states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResistanceDistribution {
    pub mu_ln_lrs: f64,
    pub sigma_ln_lrs: f64,
    pub mu_ln_hrs: f64,
    pub sigma_ln_hrs: f64,
}

impl ResistanceDistribution {
    pub fn new(mu_ln_lrs: f64, sigma_ln_lrs: f64, mu_ln_hrs: f64, sigma_ln_hrs: f64) -> Result<Self> {
        let d = Self::from_raw(mu_ln_lrs, sigma_ln_lrs, mu_ln_hrs, sigma_ln_hrs)?;
        if !(mu_ln_hrs > mu_ln_lrs) {
            return Err(Error::Domain(format!(
                "HRS median (ln {mu_ln_hrs}) must lie above LRS median (ln {mu_ln_lrs})"
            )));
        }
        Ok(d)
    }

    /// Like [`new`](Self::new) but allows overlapping or inverted medians.
    /// Spreads must still be strictly positive.
    pub fn from_raw(mu_ln_lrs: f64, sigma_ln_lrs: f64, mu_ln_hrs: f64, sigma_ln_hrs: f64) -> Result<Self> {
        for (name, s) in [("sigma_ln_lrs", sigma_ln_lrs), ("sigma_ln_hrs", sigma_ln_hrs)] {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Domain(format!("{name} must be strictly positive, got {s}")));
            }
        }
        if !(mu_ln_lrs.is_finite() && mu_ln_hrs.is_finite()) {
            return Err(Error::Domain("medians must be finite".into()));
        }
        Ok(Self {
            mu_ln_lrs,
            sigma_ln_lrs,
            mu_ln_hrs,
            sigma_ln_hrs,
        })
    }

    /// Point masses at `exp(mu_ln_lrs)` and `exp(mu_ln_hrs)`: the spread is
    /// the smallest positive normal float, so every draw rounds to the median.
    pub fn degenerate(mu_ln_lrs: f64, mu_ln_hrs: f64) -> Result<Self> {
        Self::new(mu_ln_lrs, f64::MIN_POSITIVE, mu_ln_hrs, f64::MIN_POSITIVE)
    }

    pub fn params(&self, state: DeviceState) -> (f64, f64) {
        match state {
            DeviceState::Lrs => (self.mu_ln_lrs, self.sigma_ln_lrs),
            DeviceState::Hrs => (self.mu_ln_hrs, self.sigma_ln_hrs),
        }
    }

    /// Geometric mean of the two medians, the default 1T1R reference.
    pub fn log_midpoint_ohms(&self) -> f64 {
        (0.5 * (self.mu_ln_lrs + self.mu_ln_hrs)).exp()
    }

    /// Standard-normal z-score of the 2T2R read margin.
    fn differential_margin(&self) -> f64 {
        let gap = self.mu_ln_hrs - self.mu_ln_lrs;
        if gap == 0.0 {
            return 0.0;
        }
        gap / self.sigma_ln_lrs.hypot(self.sigma_ln_hrs)
    }
}

/// Standard normal CDF, accurate deep into both tails.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// One draw of `ln R` for the given state.
pub fn sample_ln_resistance<R: Rng + ?Sized>(dist: &ResistanceDistribution, state: DeviceState, rng: &mut R) -> f64 {
    let (mu, sigma) = dist.params(state);
    let z: f64 = rng.sample(StandardNormal);
    mu + sigma * z
}

/// One draw of a device resistance in ohms.
pub fn sample_resistance<R: Rng + ?Sized>(dist: &ResistanceDistribution, state: DeviceState, rng: &mut R) -> f64 {
    sample_ln_resistance(dist, state, rng).exp()
}

/// Error rate of a single-device read against a fixed reference, averaged
/// over equiprobable stored bits.
pub fn ber_1t1r(dist: &ResistanceDistribution, r_ref_ohms: f64) -> Result<f64> {
    if !(r_ref_ohms > 0.0 && r_ref_ohms.is_finite()) {
        return Err(Error::Domain(format!("reference resistance must be positive, got {r_ref_ohms}")));
    }
    let ln_ref = r_ref_ohms.ln();
    if !(dist.mu_ln_lrs < ln_ref && ln_ref < dist.mu_ln_hrs) {
        log::warn!("1T1R reference {r_ref_ohms} ohm lies outside the LRS/HRS medians");
    }
    let hrs_below = std_normal_cdf((ln_ref - dist.mu_ln_hrs) / dist.sigma_ln_hrs);
    let lrs_above = std_normal_cdf((dist.mu_ln_lrs - ln_ref) / dist.sigma_ln_lrs);
    Ok(0.5 * (hrs_below + lrs_above))
}

/// Probability that an independent HRS draw falls below an LRS draw, which
/// is exactly when a differential read flips.
pub fn ber_2t2r(dist: &ResistanceDistribution) -> f64 {
    std_normal_cdf(-dist.differential_margin())
}

/// Monte-Carlo bit-error estimate. `half_width` is the 95% Agresti-Coull
/// half-width, which stays nonzero when no errors are observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerEstimate {
    pub estimate: f64,
    pub half_width: f64,
    pub errors: u64,
    pub trials: u64,
}

impl BerEstimate {
    pub fn from_counts(errors: u64, trials: u64) -> Self {
        const Z: f64 = 1.959_963_984_540_054;
        let n_adj = trials as f64 + Z * Z;
        let p_adj = (errors as f64 + Z * Z / 2.0) / n_adj;
        Self {
            estimate: errors as f64 / trials as f64,
            half_width: Z * (p_adj * (1.0 - p_adj) / n_adj).sqrt(),
            errors,
            trials,
        }
    }
}

pub fn ber_2t2r_mc<R: Rng + ?Sized>(dist: &ResistanceDistribution, n_trials: u64, rng: &mut R) -> Result<BerEstimate> {
    if n_trials == 0 {
        return Err(Error::Domain("n_trials must be at least 1".into()));
    }
    let mut errors = 0u64;
    for _ in 0..n_trials {
        let ln_hrs = sample_ln_resistance(dist, DeviceState::Hrs, rng);
        let ln_lrs = sample_ln_resistance(dist, DeviceState::Lrs, rng);
        if ln_hrs < ln_lrs {
            errors += 1;
        }
    }
    Ok(BerEstimate::from_counts(errors, n_trials))
}

/// Monte-Carlo counterpart of [`ber_1t1r`]: stored bits alternate so both
/// states are sampled equally often.
pub fn ber_1t1r_mc<R: Rng + ?Sized>(
    dist: &ResistanceDistribution,
    r_ref_ohms: f64,
    n_trials: u64,
    rng: &mut R,
) -> Result<BerEstimate> {
    if n_trials == 0 {
        return Err(Error::Domain("n_trials must be at least 1".into()));
    }
    if !(r_ref_ohms > 0.0) {
        return Err(Error::Domain(format!("reference resistance must be positive, got {r_ref_ohms}")));
    }
    let ln_ref = r_ref_ohms.ln();
    let mut errors = 0u64;
    for i in 0..n_trials {
        let wrong = if i % 2 == 0 {
            sample_ln_resistance(dist, DeviceState::Lrs, rng) >= ln_ref
        } else {
            sample_ln_resistance(dist, DeviceState::Hrs, rng) < ln_ref
        };
        errors += wrong as u64;
    }
    Ok(BerEstimate::from_counts(errors, n_trials))
}

/// Per-device programming energy for one condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub set_energy_j: f64,
    pub reset_energy_j: f64,
    pub mean_energy_per_bit_j: f64,
}

/// One row of the calibration table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub strength: f64,
    pub distribution: ResistanceDistribution,
}

/// Device calibration: the strength→distribution anchor table plus the
/// voltage charged during SET.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    anchors: Vec<Anchor>,
    set_voltage_v: f64,
}

const DEFAULT_ANCHORS: [(f64, f64, f64, f64, f64); 6] = [
    (-3.5, 8.70, 0.55, 10.10, 0.65),
    (-1.5, 8.65, 0.50, 10.38, 0.58),
    (0.0, 8.60, 0.45, 10.70, 0.52),
    (1.5, 8.55, 0.42, 11.10, 0.48),
    (3.0, 8.50, 0.40, 11.38, 0.45),
    (4.5, 8.45, 0.38, 11.65, 0.42),
];

impl Default for Calibration {
    fn default() -> Self {
        let anchors = DEFAULT_ANCHORS
            .iter()
            .map(|&(strength, ml, sl, mh, sh)| Anchor {
                strength,
                distribution: ResistanceDistribution {
                    mu_ln_lrs: ml,
                    sigma_ln_lrs: sl,
                    mu_ln_hrs: mh,
                    sigma_ln_hrs: sh,
                },
            })
            .collect();
        Self::new(anchors, 2.0).expect("default calibration is valid")
    }
}

impl Calibration {
    /// Validates the anchor table: at least two anchors, strictly increasing
    /// strength, gap non-decreasing and spreads non-increasing.
    pub fn new(anchors: Vec<Anchor>, set_voltage_v: f64) -> Result<Self> {
        if anchors.len() < 2 {
            return Err(Error::Config("calibration needs at least two anchors".into()));
        }
        if !(set_voltage_v > 0.0 && set_voltage_v.is_finite()) {
            return Err(Error::Config(format!("set_voltage_V must be positive, got {set_voltage_v}")));
        }
        for a in &anchors {
            let d = a.distribution;
            ResistanceDistribution::new(d.mu_ln_lrs, d.sigma_ln_lrs, d.mu_ln_hrs, d.sigma_ln_hrs)
                .map_err(|e| Error::Config(format!("anchor at strength {}: {e}", a.strength)))?;
        }
        for w in anchors.windows(2) {
            let (lo, hi) = (&w[0], &w[1]);
            let (dl, dh) = (lo.distribution, hi.distribution);
            let ok = hi.strength > lo.strength
                && dh.mu_ln_hrs - dh.mu_ln_lrs >= dl.mu_ln_hrs - dl.mu_ln_lrs
                && dh.sigma_ln_lrs <= dl.sigma_ln_lrs
                && dh.sigma_ln_hrs <= dl.sigma_ln_hrs;
            if !ok {
                return Err(Error::Config(format!(
                    "anchors at strength {} and {} break monotonicity",
                    lo.strength, hi.strength
                )));
            }
        }
        Ok(Self { anchors, set_voltage_v })
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn set_voltage_v(&self) -> f64 {
        self.set_voltage_v
    }

    pub fn condition_to_distribution(&self, cond: &ProgrammingCondition) -> Result<ResistanceDistribution> {
        cond.validate()?;
        Ok(self.distribution_at_strength(cond.strength()))
    }

    /// Piecewise-linear interpolation; clamps outside the table.
    pub fn distribution_at_strength(&self, s: f64) -> ResistanceDistribution {
        let first = &self.anchors[0];
        let last = &self.anchors[self.anchors.len() - 1];
        if s <= first.strength {
            return first.distribution;
        }
        if s >= last.strength {
            return last.distribution;
        }
        let k = self.anchors.partition_point(|a| a.strength <= s);
        let (lo, hi) = (&self.anchors[k - 1], &self.anchors[k]);
        let f = (s - lo.strength) / (hi.strength - lo.strength);
        let lerp = |a: f64, b: f64| a + f * (b - a);
        let (a, b) = (lo.distribution, hi.distribution);
        ResistanceDistribution {
            mu_ln_lrs: lerp(a.mu_ln_lrs, b.mu_ln_lrs),
            sigma_ln_lrs: lerp(a.sigma_ln_lrs, b.sigma_ln_lrs),
            mu_ln_hrs: lerp(a.mu_ln_hrs, b.mu_ln_hrs),
            sigma_ln_hrs: lerp(a.sigma_ln_hrs, b.sigma_ln_hrs),
        }
    }

    /// SET is charged `V_set · I_C · t`, RESET `V_reset · I_C · t`.
    pub fn programming_energy(&self, cond: &ProgrammingCondition) -> EnergyReport {
        let charge = cond.compliance_current_ua * 1e-6 * cond.pulse_duration_s;
        let set_energy_j = self.set_voltage_v * charge;
        let reset_energy_j = cond.reset_voltage_v * charge;
        EnergyReport {
            set_energy_j,
            reset_energy_j,
            mean_energy_per_bit_j: (set_energy_j + reset_energy_j) / 2.0,
        }
    }
}

/// Distribution for `cond` under the default calibration.
pub fn condition_to_distribution(cond: &ProgrammingCondition) -> Result<ResistanceDistribution> {
    Calibration::default().condition_to_distribution(cond)
}

/// Energy for `cond` under the default calibration.
pub fn programming_energy(cond: &ProgrammingCondition) -> EnergyReport {
    Calibration::default().programming_energy(cond)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn sym(gap: f64, sigma: f64) -> ResistanceDistribution {
        ResistanceDistribution::from_raw(9.0, sigma, 9.0 + gap, sigma).unwrap()
    }

    #[test]
    fn zero_error_interval_is_not_degenerate() {
        let e = BerEstimate::from_counts(0, 1_000_000);
        assert_eq!(e.estimate, 0.0);
        // roughly the rule of three: upper bound near 3/n
        assert!(e.half_width > 1e-6 && e.half_width < 5e-6, "{}", e.half_width);
        let big = BerEstimate::from_counts(5_000, 1_000_000);
        let wald = 1.959_963_984_540_054 * (0.005f64 * 0.995 / 1e6).sqrt();
        assert!((big.half_width / wald - 1.0).abs() < 0.01);
    }

    #[test]
    fn strength_anchors_weak_and_strong() {
        assert!(ProgrammingCondition::weak().strength().abs() < 1e-12);
        assert!((ProgrammingCondition::strong().strength() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_names_field() {
        let err = condition_to_distribution(&ProgrammingCondition::new(600.0, 2.0, 1e-6)).unwrap_err();
        assert!(matches!(err, Error::Range { field: "compliance_current_uA", .. }));
        let err = condition_to_distribution(&ProgrammingCondition::new(200.0, -1.0, 1e-6)).unwrap_err();
        assert!(matches!(err, Error::Range { field: "reset_voltage_V", .. }));
        let err = condition_to_distribution(&ProgrammingCondition::new(200.0, 2.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Range { field: "pulse_duration_s", .. }));
    }

    #[test]
    fn identical_conditions_identical_distributions() {
        let c = ProgrammingCondition::new(321.0, 1.7, 3e-6);
        assert_eq!(condition_to_distribution(&c).unwrap(), condition_to_distribution(&c).unwrap());
    }

    #[test]
    fn strong_beats_weak() {
        let weak = ber_2t2r(&condition_to_distribution(&ProgrammingCondition::weak()).unwrap());
        let strong = ber_2t2r(&condition_to_distribution(&ProgrammingCondition::strong()).unwrap());
        assert!(strong < weak);
        assert!((1e-3..=1e-2).contains(&weak), "weak BER {weak}");
        assert!(strong < 1e-5, "strong BER {strong}");
    }

    #[test]
    fn monotone_in_each_field() {
        let calib = Calibration::default();
        let ber = |c: ProgrammingCondition| ber_2t2r(&calib.condition_to_distribution(&c).unwrap());
        let steps = 40;
        let lin = |(lo, hi): (f64, f64), k: usize| (lo + (hi - lo) * k as f64 / steps as f64).min(hi);
        for base in [ProgrammingCondition::weak(), ProgrammingCondition::strong(), ProgrammingCondition::new(80.0, 1.1, 2e-7)] {
            let mut prev = [f64::INFINITY; 3];
            for k in 0..=steps {
                let mut cs = [base; 3];
                cs[0].compliance_current_ua = lin(CURRENT_RANGE_UA, k);
                cs[1].reset_voltage_v = lin(VOLTAGE_RANGE_V, k);
                cs[2].pulse_duration_s = lin(PULSE_RANGE_S, k);
                for (i, c) in cs.into_iter().enumerate() {
                    let b = ber(c);
                    assert!(b <= prev[i], "field {i} step {k}: {b} > {}", prev[i]);
                    prev[i] = b;
                }
            }
        }
    }

    #[test]
    fn degenerate_lrs_sample_is_median() {
        let d = ResistanceDistribution::degenerate(8.5, 11.5).unwrap();
        let mut rng = seeded(3);
        for _ in 0..100 {
            assert_eq!(sample_resistance(&d, DeviceState::Lrs, &mut rng), 8.5f64.exp());
        }
    }

    #[test]
    fn sample_is_seed_deterministic() {
        let d = sym(2.0, 0.5);
        let a = sample_resistance(&d, DeviceState::Hrs, &mut seeded(99));
        let b = sample_resistance(&d, DeviceState::Hrs, &mut seeded(99));
        assert_eq!(a, b);
    }

    #[test]
    fn hrs_log_mean_within_four_standard_errors() {
        let d = sym(2.0, 0.5);
        let mut rng = seeded(7);
        let n = 1_000_000;
        let mean = (0..n).map(|_| sample_resistance(&d, DeviceState::Hrs, &mut rng).ln()).sum::<f64>() / n as f64;
        let se = 0.5 / (n as f64).sqrt();
        assert!((mean - d.mu_ln_hrs).abs() < 4.0 * se);
    }

    #[test]
    fn ber_1t1r_reference_cases() {
        let d = sym(2.0, 0.5);
        let b = ber_1t1r(&d, d.log_midpoint_ohms()).unwrap();
        assert!((b - 2.275_013_194_817_921e-2).abs() < 1e-12, "{b:e}");

        let d0 = ResistanceDistribution::degenerate(8.5, 11.5).unwrap();
        assert_eq!(ber_1t1r(&d0, d0.log_midpoint_ohms()).unwrap(), 0.0);

        let same = sym(0.0, 0.5);
        assert_eq!(ber_1t1r(&same, 9.0f64.exp()).unwrap(), 0.5);

        assert!(matches!(ber_1t1r(&d, 0.0), Err(Error::Domain(_))));
        assert!(matches!(ber_1t1r(&d, -5.0), Err(Error::Domain(_))));
    }

    #[test]
    fn ber_2t2r_reference_cases() {
        let b = ber_2t2r(&sym(2.0, 0.5));
        // Phi(-2 * sqrt 2)
        assert!((b - 2.338_867_490_523_632_6e-3).abs() < 1e-12, "{b}");
        assert_eq!(ber_2t2r(&sym(0.0, 0.3)), 0.5);
        assert_eq!(ber_2t2r(&sym(0.0, 1.7)), 0.5);
        assert_eq!(ber_2t2r(&ResistanceDistribution::degenerate(8.5, 11.5).unwrap()), 0.0);
    }

    #[test]
    fn mc_degenerate_and_deterministic() {
        let d0 = ResistanceDistribution::degenerate(8.5, 11.5).unwrap();
        assert_eq!(ber_2t2r_mc(&d0, 10_000, &mut seeded(1)).unwrap().estimate, 0.0);
        let d = sym(1.0, 0.5);
        let a = ber_2t2r_mc(&d, 10_000, &mut seeded(5)).unwrap();
        let b = ber_2t2r_mc(&d, 10_000, &mut seeded(5)).unwrap();
        assert_eq!(a, b);
        assert!(ber_2t2r_mc(&d, 0, &mut seeded(5)).is_err());
    }

    #[test]
    fn energy_arithmetic() {
        let e = programming_energy(&ProgrammingCondition::weak());
        assert!((e.reset_energy_j - 0.3e-9).abs() <= 1e-24);
        assert_eq!(e.mean_energy_per_bit_j, (e.set_energy_j + e.reset_energy_j) / 2.0);

        let mut c = ProgrammingCondition::weak();
        c.pulse_duration_s *= 2.0;
        let e2 = programming_energy(&c);
        assert_eq!(e2.set_energy_j, 2.0 * e.set_energy_j);
        assert_eq!(e2.reset_energy_j, 2.0 * e.reset_energy_j);

        let strong = programming_energy(&ProgrammingCondition::strong());
        assert!(strong.mean_energy_per_bit_j > e.mean_energy_per_bit_j);
    }

    #[test]
    fn bad_calibration_rejected() {
        let mut anchors = Calibration::default().anchors().to_vec();
        anchors[2].distribution.sigma_ln_hrs = 0.9;
        assert!(matches!(Calibration::new(anchors, 2.0), Err(Error::Config(_))));
    }
}
