//! Simulation of differential 2T2R resistive memories running binarized
//! neural networks without error correction.
//!
//! The crate is organized bottom-up:
//!
//! - [`device`]: programming conditions, log-normal resistance populations,
//!   1T1R/2T2R bit-error rates and programming energy.
//! - [`array`]: kilobit arrays with PCSA and XNOR-PCSA reads.
//! - [`ecc`]: the (72,64) SECDED baseline.
//! - [`bnn`]: packed XNOR-popcount inference, fault injection, execution on
//!   simulated arrays and the `BNN1` weight format.
//! - [`train`]: straight-through-estimator training and batch-norm folding.
//! - [`dataset`]: MNIST IDX loading.
//! - [`experiment`] and [`config`]: seeded sweeps that write CSV.
//! - [`cli`]: the `rram-bnn` command line.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod bnn;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod device;
pub mod ecc;
mod error;
pub mod experiment;
pub mod rng;
pub mod train;

pub use error::{Error, IdxError, Result};
