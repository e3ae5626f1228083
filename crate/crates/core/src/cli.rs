//! Command-line front end. Progress goes to stderr through `log`; data goes
//! to the files named on the command line.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bnn::io as model_io;
use crate::config::Config;
use crate::dataset::{load_split, LabeledImageSet, Split};
use crate::experiment::{self, write_csv_file, EvalSet, RunMeta};
use crate::error::Result;
use crate::train::train_bnn;

#[derive(Debug, Parser)]
#[command(name = "rram-bnn", version, about = "2T2R memory and binarized network simulator")]
pub struct Cli {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the seed of the selected experiment.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a binarized MNIST classifier and save its weights.
    Train(TrainArgs),
    /// Accuracy under uniformly injected weight bit errors.
    SweepBer(ModelArgs),
    /// 1T1R, 2T2R and SECDED-on-1T1R bit-error rates per programming condition.
    BerCurves(OutArgs),
    /// Accuracy and programming energy with weights held in 2T2R arrays.
    EnergyTradeoff(ModelArgs),
    /// SECDED(72,64) transfer curve.
    EccCurve(OutArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Directory holding the four MNIST IDX files.
    #[arg(long, env = "MNIST_DIR")]
    pub mnist_dir: PathBuf,
    /// Where to write the trained weights.
    #[arg(long)]
    pub model_out: PathBuf,
    /// Per-epoch log CSV.
    #[arg(long)]
    pub log_out: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Train on the first N training images only.
    #[arg(long)]
    pub train_limit: Option<usize>,
    /// Score the first N test images each epoch (0 disables).
    #[arg(long)]
    pub test_limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, env = "MNIST_DIR")]
    pub mnist_dir: PathBuf,
    /// Weights written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub n_trials: Option<usize>,
    /// Evaluate on the first N test images.
    #[arg(long)]
    pub test_limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    #[arg(long)]
    pub out: PathBuf,
}

fn test_set(dir: &Path, limit: Option<usize>) -> Result<LabeledImageSet> {
    let test = load_split(dir, Split::Test)?;
    Ok(match limit {
        Some(n) => test.head(n),
        None => test,
    })
}

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        match cli.command {
            Command::Train(_) => cfg.train.seed = seed,
            _ => cfg.sweep.seed = seed,
        }
    }
    // Command-line overrides are folded into the config before hashing so
    // the recorded hash pins down the whole run.
    match &cli.command {
        Command::Train(a) => {
            cfg.train.epochs = a.epochs.unwrap_or(cfg.train.epochs);
            cfg.train.train_limit = a.train_limit.or(cfg.train.train_limit);
            cfg.train.test_limit = a.test_limit.or(cfg.train.test_limit);
        }
        Command::SweepBer(a) | Command::EnergyTradeoff(a) => {
            cfg.sweep.n_trials = a.n_trials.unwrap_or(cfg.sweep.n_trials);
            cfg.sweep.test_limit = a.test_limit.or(cfg.sweep.test_limit);
        }
        Command::BerCurves(_) | Command::EccCurve(_) => {}
    }
    match cli.command {
        Command::Train(a) => {
            let meta = RunMeta {
                seed: cfg.train.seed,
                config_hash: cfg.hash(),
            };
            let mut train = load_split(&a.mnist_dir, Split::Train)?;
            if let Some(n) = cfg.train.train_limit {
                train = train.head(n);
            }
            let test = match cfg.train.test_limit {
                Some(0) => None,
                limit => Some(test_set(&a.mnist_dir, limit)?),
            };
            log::info!("training {:?} on {} images", cfg.train.architecture(), train.len());
            let outcome = train_bnn(&train, test.as_ref(), &cfg.train.architecture(), &cfg.train.train_config())?;
            if let Some(dir) = a.model_out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            model_io::save(&outcome.model, &a.model_out)?;
            log::info!("weights written to {}", a.model_out.display());
            if let Some(path) = a.log_out {
                write_csv_file(path, &meta, &experiment::train_log_rows(&outcome.log, meta.seed))?;
            }
        }
        Command::SweepBer(a) => {
            let (model, test, meta, trials) = model_inputs(&cfg, &a)?;
            let bits = test.binarized();
            let eval = EvalSet {
                inputs: &bits,
                labels: test.labels(),
            };
            let rows = experiment::sweep_ber(&model, eval, &cfg.sweep.bers, trials, meta.seed)?;
            write_csv_file(&a.out, &meta, &rows)?;
        }
        Command::EnergyTradeoff(a) => {
            let (model, test, meta, trials) = model_inputs(&cfg, &a)?;
            let bits = test.binarized();
            let eval = EvalSet {
                inputs: &bits,
                labels: test.labels(),
            };
            let rows = experiment::energy_tradeoff(
                &model,
                eval,
                &cfg.device.calibration()?,
                cfg.array.geometry(),
                &cfg.sweep.programming_conditions(),
                trials,
                meta.seed,
            )?;
            write_csv_file(&a.out, &meta, &rows)?;
        }
        Command::BerCurves(a) => {
            let meta = sweep_meta(&cfg);
            let rows = experiment::ber_curves(
                &cfg.device.calibration()?,
                &cfg.sweep.programming_conditions(),
                cfg.device.ref_ohms,
                cfg.sweep.n_mc,
                cfg.sweep.ecc_words,
                meta.seed,
            )?;
            write_csv_file(&a.out, &meta, &rows)?;
        }
        Command::EccCurve(a) => {
            let meta = sweep_meta(&cfg);
            let rows = experiment::ecc_curve(&cfg.sweep.ecc_bers, cfg.sweep.ecc_words, meta.seed)?;
            write_csv_file(&a.out, &meta, &rows)?;
        }
    }
    Ok(())
}

fn sweep_meta(cfg: &Config) -> RunMeta {
    RunMeta {
        seed: cfg.sweep.seed,
        config_hash: cfg.hash(),
    }
}

fn model_inputs(
    cfg: &Config,
    a: &ModelArgs,
) -> Result<(crate::bnn::BnnModel, LabeledImageSet, RunMeta, usize)> {
    let model = model_io::load(&a.model)?;
    let test = test_set(&a.mnist_dir, cfg.sweep.test_limit)?;
    Ok((model, test, sweep_meta(cfg), cfg.sweep.n_trials))
}
