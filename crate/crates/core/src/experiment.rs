//! Experiment drivers behind the command-line subcommands. Each returns flat
//! rows that serialize straight to CSV; every row carries the seed it was
//! drawn from, and trial `t` of grid point `k` always uses
//! `trial_stream(seed, k, t)`, so output depends only on (config, seed).

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::bnn::{inject_weight_errors, weight_bit_differences, ArrayBank, ArrayGeometry, BnnModel, PackedBits};
use crate::device::{ber_1t1r, ber_2t2r, ber_2t2r_mc, Calibration, ProgrammingCondition};
use crate::ecc::{secded_output_ber, TransferPoint};
use crate::error::{Error, Result};
use crate::rng::trial_stream;
use crate::train::EpochLog;

/// Provenance written as a `#` comment above the CSV header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunMeta {
    pub seed: u64,
    pub config_hash: String,
}

impl RunMeta {
    pub fn comment_line(&self) -> String {
        format!(
            "# tool=rram-bnn {} seed={} config_hash={}",
            env!("CARGO_PKG_VERSION"),
            self.seed,
            self.config_hash
        )
    }
}

pub fn write_csv<W: Write, T: Serialize>(mut out: W, meta: &RunMeta, rows: &[T]) -> Result<()> {
    writeln!(out, "{}", meta.comment_line())?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file<T: Serialize>(path: impl AsRef<Path>, meta: &RunMeta, rows: &[T]) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_csv(std::io::BufWriter::new(std::fs::File::create(path)?), meta, rows)
}

/// Sample mean and, for two or more values, the sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    // Shifted by the first value so identical samples give an exact mean.
    let mean = xs[0] + xs.iter().map(|x| x - xs[0]).sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some(var.sqrt()))
}

/// Evaluation data: binarized images with their labels.
#[derive(Debug, Clone, Copy)]
pub struct EvalSet<'a> {
    pub inputs: &'a [PackedBits],
    pub labels: &'a [u8],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerSweepRecord {
    pub experiment_id: &'static str,
    pub weight_ber: f64,
    pub accuracy_mean: f64,
    pub accuracy_std: Option<f64>,
    pub flipped_bits_mean: f64,
    pub n_trials: usize,
    pub n_images: usize,
    pub seed: u64,
}

fn check_trials(n_trials: usize) -> Result<()> {
    if n_trials == 0 {
        return Err(Error::Config("n_trials must be at least 1".into()));
    }
    Ok(())
}

/// Flips every weight bit independently with each probability in `bers` and
/// scores the corrupted models. Thresholds are left intact.
pub fn sweep_ber(model: &BnnModel, eval: EvalSet<'_>, bers: &[f64], n_trials: usize, seed: u64) -> Result<Vec<BerSweepRecord>> {
    check_trials(n_trials)?;
    let mut rows = Vec::with_capacity(bers.len());
    for (k, &ber) in bers.iter().enumerate() {
        let mut acc = Vec::with_capacity(n_trials);
        let mut flips = 0u64;
        for t in 0..n_trials {
            let mut rng = trial_stream(seed, k as u32, t as u32);
            let faulty = inject_weight_errors(model, ber, &mut rng)?;
            flips += weight_bit_differences(model, &faulty)?;
            acc.push(faulty.accuracy(eval.inputs, eval.labels)?);
        }
        let (mean, std) = mean_std(&acc);
        log::info!("weight BER {ber:e}: accuracy {mean:.4}");
        rows.push(BerSweepRecord {
            experiment_id: "sweep-ber",
            weight_ber: ber,
            accuracy_mean: mean,
            accuracy_std: std,
            flipped_bits_mean: flips as f64 / n_trials as f64,
            n_trials,
            n_images: eval.labels.len(),
            seed,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerCurveRecord {
    pub experiment_id: &'static str,
    #[serde(rename = "compliance_current_uA")]
    pub compliance_current_ua: f64,
    #[serde(rename = "reset_voltage_V")]
    pub reset_voltage_v: f64,
    pub pulse_duration_s: f64,
    pub strength: f64,
    pub mean_energy_per_bit_j: f64,
    pub ref_ohms: f64,
    pub ber_1t1r: f64,
    pub ber_2t2r: f64,
    pub ber_2t2r_mc: f64,
    pub ber_2t2r_mc_ci: f64,
    pub n_mc: u64,
    /// Payload BER after SECDED(72,64) over 1T1R cells at `ber_1t1r`.
    pub ber_1t1r_secded: f64,
    pub ber_1t1r_secded_ci: f64,
    pub n_words: u64,
    pub seed: u64,
}

/// Bit-error rates of the three storage schemes at each programming
/// condition. `ref_ohms` fixes the 1T1R reference; `None` uses the
/// log-midpoint of the two medians at each condition.
pub fn ber_curves(
    calib: &Calibration,
    conditions: &[ProgrammingCondition],
    ref_ohms: Option<f64>,
    n_mc: u64,
    n_words: u64,
    seed: u64,
) -> Result<Vec<BerCurveRecord>> {
    let mut rows = Vec::with_capacity(conditions.len());
    for (k, cond) in conditions.iter().enumerate() {
        let dist = calib.condition_to_distribution(cond)?;
        let r_ref = ref_ohms.unwrap_or_else(|| dist.log_midpoint_ohms());
        let p1 = ber_1t1r(&dist, r_ref)?;
        let mc = ber_2t2r_mc(&dist, n_mc, &mut trial_stream(seed, k as u32, 0))?;
        let ecc = secded_output_ber(p1, n_words, &mut trial_stream(seed, k as u32, 1))?;
        log::info!("{cond}: 1T1R {p1:.3e}, 2T2R {:.3e}, SECDED {:.3e}", ber_2t2r(&dist), ecc.output_ber);
        rows.push(BerCurveRecord {
            experiment_id: "ber-curves",
            compliance_current_ua: cond.compliance_current_ua,
            reset_voltage_v: cond.reset_voltage_v,
            pulse_duration_s: cond.pulse_duration_s,
            strength: cond.strength(),
            mean_energy_per_bit_j: calib.programming_energy(cond).mean_energy_per_bit_j,
            ref_ohms: r_ref,
            ber_1t1r: p1,
            ber_2t2r: ber_2t2r(&dist),
            ber_2t2r_mc: mc.estimate,
            ber_2t2r_mc_ci: mc.half_width,
            n_mc,
            ber_1t1r_secded: ecc.output_ber,
            ber_1t1r_secded_ci: ecc.ci_halfwidth,
            n_words,
            seed,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub experiment_id: &'static str,
    #[serde(rename = "compliance_current_uA")]
    pub compliance_current_ua: f64,
    #[serde(rename = "reset_voltage_V")]
    pub reset_voltage_v: f64,
    pub pulse_duration_s: f64,
    pub set_energy_j: f64,
    pub reset_energy_j: f64,
    pub mean_energy_per_bit_j: f64,
    /// Energy to program every weight of the model once (two devices per bit).
    pub model_program_energy_j: f64,
    pub ber_2t2r: f64,
    /// Fraction of weight bits read back wrong, averaged over trials.
    pub effective_ber: f64,
    pub accuracy_mean: f64,
    pub accuracy_std: Option<f64>,
    pub n_trials: usize,
    pub n_images: usize,
    pub seed: u64,
}

/// Programs the model into fresh 2T2R arrays at each condition and scores
/// it. Array reads are deterministic once programmed, so each trial reads the
/// weights back once and scores the batch with digital XNOR-popcount; this
/// matches per-image in-array inference exactly.
pub fn energy_tradeoff(
    model: &BnnModel,
    eval: EvalSet<'_>,
    calib: &Calibration,
    geometry: ArrayGeometry,
    conditions: &[ProgrammingCondition],
    n_trials: usize,
    seed: u64,
) -> Result<Vec<EnergyRecord>> {
    check_trials(n_trials)?;
    let total_bits = model.weight_bits() as f64;
    let mut rows = Vec::with_capacity(conditions.len());
    for (k, cond) in conditions.iter().enumerate() {
        let dist = calib.condition_to_distribution(cond)?;
        let energy = calib.programming_energy(cond);
        let mut acc = Vec::with_capacity(n_trials);
        let (mut flips, mut bank_energy) = (0u64, 0.0);
        for t in 0..n_trials {
            let mut rng = trial_stream(seed, k as u32, t as u32);
            let bank = ArrayBank::program(model, cond, calib, geometry, &mut rng)?;
            let seen = bank.read_back_model()?;
            flips += weight_bit_differences(model, &seen)?;
            bank_energy = bank.program_energy_j();
            acc.push(seen.accuracy(eval.inputs, eval.labels)?);
        }
        let (mean, std) = mean_std(&acc);
        log::info!("{cond}: {:.3e} J/bit, accuracy {mean:.4}", energy.mean_energy_per_bit_j);
        rows.push(EnergyRecord {
            experiment_id: "energy-tradeoff",
            compliance_current_ua: cond.compliance_current_ua,
            reset_voltage_v: cond.reset_voltage_v,
            pulse_duration_s: cond.pulse_duration_s,
            set_energy_j: energy.set_energy_j,
            reset_energy_j: energy.reset_energy_j,
            mean_energy_per_bit_j: energy.mean_energy_per_bit_j,
            model_program_energy_j: bank_energy,
            ber_2t2r: ber_2t2r(&dist),
            effective_ber: flips as f64 / (n_trials as f64 * total_bits),
            accuracy_mean: mean,
            accuracy_std: std,
            n_trials,
            n_images: eval.labels.len(),
            seed,
        });
    }
    Ok(rows)
}

/// Cheapest row whose mean accuracy is within `max_drop` of `reference`.
pub fn cheapest_within(rows: &[EnergyRecord], reference: f64, max_drop: f64) -> Option<&EnergyRecord> {
    rows.iter()
        .filter(|r| r.accuracy_mean >= reference - max_drop)
        .min_by(|a, b| a.mean_energy_per_bit_j.total_cmp(&b.mean_energy_per_bit_j))
}

/// SECDED transfer curve; point `k` draws from `trial_stream(seed, k, 0)`.
pub fn ecc_curve(bers: &[f64], n_words: u64, seed: u64) -> Result<Vec<TransferPoint>> {
    bers.iter()
        .enumerate()
        .map(|(k, &p)| {
            let pt = secded_output_ber(p, n_words, &mut trial_stream(seed, k as u32, 0))?;
            log::info!("SECDED input {p:e}: output {:.3e}", pt.output_ber);
            Ok(pt)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainLogRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_accuracy: Option<f64>,
    pub seed: u64,
}

pub fn train_log_rows(log: &[EpochLog], seed: u64) -> Vec<TrainLogRecord> {
    log.iter()
        .map(|e| TrainLogRecord {
            epoch: e.epoch,
            train_loss: e.train_loss,
            test_accuracy: e.test_accuracy,
            seed,
        })
        .collect()
}
