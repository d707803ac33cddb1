//! Experiment orchestration: `(N_tr, lambda)` sweeps that pair empirical
//! test errors with theory predictions, sigma calibration, and the CSV and
//! manifest artifacts.

mod calibrate;
mod config;
mod manifest;
mod run;
mod sweep;

use thiserror::Error;

pub use calibrate::{calibrate_sigma, golden_section_min, EmpiricalPoint, CALIBRATION_TOL};
pub use config::{
    default_n_train_grid, ConfigError, DatasetConfig, ExperimentConfig, KernelStrategy, RawConfig,
    SigmaSetting, TheoryNoise, DEFAULT_CALIBRATION_LAMBDA, DEFAULT_LAMBDA_GRID, DEFAULT_N_TEST,
};
pub use manifest::RunManifest;
pub use run::{rep_seed, run_experiment, theory_row, write_outputs, RunOutput};
pub use sweep::{emit_csv, read_sweep_csv, write_sweep_csv, SweepRow, SWEEP_HEADER};

use crate::data::DataError;
use crate::estimate::EstimateError;
use crate::krr::KrrError;
use crate::qsim::QsimError;
use crate::rmt::RmtError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("data: {0}")]
    Data(#[from] DataError),
    #[error("circuit: {0}")]
    Qsim(#[from] QsimError),
    #[error("estimation: {0}")]
    Estimate(#[from] EstimateError),
    #[error("theory: {0}")]
    Theory(#[from] RmtError),
    #[error("cell n_train={n_train} lambda={lambda:e} rep={rep}: {source}")]
    Cell {
        n_train: usize,
        lambda: f64,
        rep: usize,
        #[source]
        source: KrrError,
    },
    #[error("calibration: {0}")]
    Calibration(String),
    #[error("duplicate per-repetition seed {0}")]
    SeedCollision(u64),
    #[error("i/o on {path}: {message}")]
    Io { path: String, message: String },
}
