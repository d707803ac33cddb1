//! Quantum kernel ridge regression at desk scale.
//!
//! * [`qsim`] simulates the encoding circuits and evaluates fidelity kernels.
//! * [`krr`] fits and evaluates dual-form ridge regression.
//! * [`rmt`] solves for the effective regularization and evaluates the
//!   deterministic-equivalent test risk.
//! * [`estimate`] estimates the population spectrum and projected target from
//!   a kernel matrix.
//! * [`data`] generates or loads datasets.
//! * [`harness`] runs `(N_tr, lambda)` sweeps and writes CSV artifacts.
//!
//! The numerical modules are generic over [`Real`]; the aliases below fix the
//! scalar to `f64` (used by the harness) or `f32`.

// `!(x >= 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod estimate;
pub mod harness;
pub mod krr;
pub mod qsim;
pub mod rmt;
pub mod rng;
pub mod scalar;

pub use scalar::Real;

pub type StateVector64 = qsim::StateVector<f64>;
pub type PauliVector64 = qsim::PauliVector<f64>;
pub type Spectrum64 = rmt::Spectrum<f64>;
pub type TheoryParams64 = rmt::TheoryParams<f64>;
pub type RiskBreakdown64 = rmt::RiskBreakdown<f64>;
pub type DualWeights64 = krr::DualWeights<f64>;
pub type FitReport64 = krr::FitReport<f64>;
pub type SpectralEstimate64 = estimate::SpectralEstimate<f64>;

pub type StateVector32 = qsim::StateVector<f32>;
pub type Spectrum32 = rmt::Spectrum<f32>;
pub type RiskBreakdown32 = rmt::RiskBreakdown<f32>;
pub type DualWeights32 = krr::DualWeights<f32>;
pub type SpectralEstimate32 = estimate::SpectralEstimate<f32>;
