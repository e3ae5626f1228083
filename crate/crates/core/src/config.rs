//! Experiment configuration: a TOML file with `[device]`, `[array]`,
//! `[train]` and `[sweep]` sections. Every key is optional and falls back to
//! the defaults below; unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bnn::ArrayGeometry;
use crate::device::{Anchor, Calibration, ProgrammingCondition, ResistanceDistribution};
use crate::error::{Error, Result};
use crate::train::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceSection {
    #[serde(rename = "set_voltage_V")]
    pub set_voltage_v: f64,
    pub anchor_strength: Vec<f64>,
    pub anchor_mu_ln_lrs: Vec<f64>,
    pub anchor_sigma_ln_lrs: Vec<f64>,
    pub anchor_mu_ln_hrs: Vec<f64>,
    pub anchor_sigma_ln_hrs: Vec<f64>,
    /// Fixed 1T1R reference resistance; defaults to the log-midpoint of the
    /// two medians at each condition.
    pub ref_ohms: Option<f64>,
}

impl Default for DeviceSection {
    fn default() -> Self {
        let calib = Calibration::default();
        let a = calib.anchors();
        Self {
            set_voltage_v: calib.set_voltage_v(),
            anchor_strength: a.iter().map(|a| a.strength).collect(),
            anchor_mu_ln_lrs: a.iter().map(|a| a.distribution.mu_ln_lrs).collect(),
            anchor_sigma_ln_lrs: a.iter().map(|a| a.distribution.sigma_ln_lrs).collect(),
            anchor_mu_ln_hrs: a.iter().map(|a| a.distribution.mu_ln_hrs).collect(),
            anchor_sigma_ln_hrs: a.iter().map(|a| a.distribution.sigma_ln_hrs).collect(),
            ref_ohms: None,
        }
    }
}

impl DeviceSection {
    pub fn calibration(&self) -> Result<Calibration> {
        let n = self.anchor_strength.len();
        let columns = [
            self.anchor_mu_ln_lrs.len(),
            self.anchor_sigma_ln_lrs.len(),
            self.anchor_mu_ln_hrs.len(),
            self.anchor_sigma_ln_hrs.len(),
        ];
        if columns.iter().any(|&c| c != n) {
            return Err(Error::Config(format!(
                "[device] anchor columns have different lengths: strength {n}, others {columns:?}"
            )));
        }
        let anchors = (0..n)
            .map(|i| {
                Ok(Anchor {
                    strength: self.anchor_strength[i],
                    distribution: ResistanceDistribution::new(
                        self.anchor_mu_ln_lrs[i],
                        self.anchor_sigma_ln_lrs[i],
                        self.anchor_mu_ln_hrs[i],
                        self.anchor_sigma_ln_hrs[i],
                    )?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Calibration::new(anchors, self.set_voltage_v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArraySection {
    pub rows: usize,
    pub cols: usize,
    pub max_arrays: usize,
}

impl Default for ArraySection {
    fn default() -> Self {
        let g = ArrayGeometry::default();
        Self {
            rows: g.rows,
            cols: g.cols,
            max_arrays: g.max_arrays,
        }
    }
}

impl ArraySection {
    pub fn geometry(&self) -> ArrayGeometry {
        ArrayGeometry {
            rows: self.rows,
            cols: self.cols,
            max_arrays: self.max_arrays,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub lr_decay: f64,
    pub seed: u64,
    /// Hidden layer widths between the 784 inputs and 10 outputs.
    pub hidden: Vec<usize>,
    /// Train on the first N training images only.
    pub train_limit: Option<usize>,
    /// Score the first N test images after each epoch; 0 disables scoring.
    pub test_limit: Option<usize>,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            momentum: t.momentum,
            lr_decay: t.lr_decay,
            seed: t.seed,
            hidden: vec![300],
            train_limit: None,
            test_limit: None,
        }
    }
}

impl TrainSection {
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            seed: self.seed,
            lr_decay: self.lr_decay,
        }
    }

    pub fn architecture(&self) -> Vec<usize> {
        let mut a = vec![crate::dataset::PIXELS];
        a.extend(&self.hidden);
        a.push(10);
        a
    }
}

/// Default programming-condition grid, weakest to strongest. Each entry is
/// `[compliance_current_uA, reset_voltage_V, pulse_duration_s]`.
pub const DEFAULT_CONDITIONS: [[f64; 3]; 7] = [
    [200.0, 1.5, 1e-6],
    [250.0, 1.5, 1e-6],
    [300.0, 1.8, 1e-6],
    [300.0, 2.0, 2e-6],
    [400.0, 2.0, 5e-6],
    [500.0, 2.5, 5e-6],
    [500.0, 2.5, 10e-6],
];

pub const DEFAULT_BERS: [f64; 7] = [0.0, 1e-5, 1e-4, 1e-3, 1e-2, 0.05, 0.1];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub seed: u64,
    pub n_trials: usize,
    pub bers: Vec<f64>,
    pub conditions: Vec<[f64; 3]>,
    /// Paired draws per condition for the Monte-Carlo BER columns.
    pub n_mc: u64,
    /// Input bit-error rates for the SECDED transfer curve.
    pub ecc_bers: Vec<f64>,
    /// Codewords simulated per SECDED point.
    pub ecc_words: u64,
    /// Evaluate on the first `test_limit` test images only.
    pub test_limit: Option<usize>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            seed: 42,
            n_trials: 10,
            bers: DEFAULT_BERS.to_vec(),
            conditions: DEFAULT_CONDITIONS.to_vec(),
            n_mc: 1_000_000,
            ecc_bers: vec![0.0, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 2e-2, 5e-2, 0.1],
            ecc_words: 1_000_000,
            test_limit: None,
        }
    }
}

impl SweepSection {
    pub fn programming_conditions(&self) -> Vec<ProgrammingCondition> {
        self.conditions.iter().map(|&[i, v, t]| ProgrammingCondition::new(i, v, t)).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub device: DeviceSection,
    pub array: ArraySection,
    pub train: TrainSection,
    pub sweep: SweepSection,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.device.calibration()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of SHA-256 over the canonical TOML rendering, so
    /// equivalent files with different formatting hash alike.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        hex::encode(&digest[..8])
    }
}
