//! Deterministic-equivalent theory of the ridge test risk.
//!
//! The effective regularization `kappa` is the root of
//! `(1/N) sum_i xi_i / (xi_i + kappa) + lambda / kappa = 1`, found by
//! bisection on the certified bracket `[lambda, lambda + tr(Sigma) / N]`.
//! From it follow `eta = df_2(kappa) / N` and the risk
//! `kappa^2 / (1 - eta) * sum beta_i^2 / (xi_i + kappa)^2 + sigma^2 eta / (1 - eta) + sigma^2`.

use thiserror::Error;

use crate::scalar::Real;

/// `eta` at or above `1 - SINGULAR_MARGIN` is reported as a singularity.
pub const SINGULAR_MARGIN: f64 = 1e-12;
/// Smallest regularization the solver is meant for (ridgeless proxy).
pub const LAMBDA_FLOOR: f64 = 1e-12;
/// Bisection stops once the bracket is this narrow relative to its upper end.
pub const KAPPA_REL_WIDTH: f64 = 1e-14;
pub const KAPPA_MAX_ITER: usize = 300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("spectrum is empty")]
    Empty,
    #[error("eigenvalue {index} is negative or not finite: {value}")]
    BadValue { index: usize, value: f64 },
    #[error("eigenvalues must be sorted non-increasing (index {0})")]
    Unsorted(usize),
    #[error("spectrum has no strictly positive eigenvalue")]
    AllZero,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RmtError {
    #[error("lambda must be positive and finite, got {0}")]
    InvalidLambda(f64),
    #[error("n_train must be positive")]
    ZeroSamples,
    #[error("beta_star has {found} entries, spectrum has {expected}")]
    ParamShape { expected: usize, found: usize },
    #[error("noise level must be non-negative and finite, got {0}")]
    InvalidSigma(f64),
    #[error("risk diverges: eta = {eta} (kappa = {kappa:e})")]
    Singular { kappa: f64, eta: f64 },
    #[error("kappa bracket [{lo:e}, {hi:e}] does not contain a root")]
    BracketFailure { lo: f64, hi: f64 },
}

/// Eigenvalues of a population covariance, non-increasing and non-negative.
/// Exact zeros are allowed and contribute nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    eigenvalues: Vec<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn new(eigenvalues: Vec<T>) -> Result<Self, SpectrumError> {
        if eigenvalues.is_empty() {
            return Err(SpectrumError::Empty);
        }
        for (index, &v) in eigenvalues.iter().enumerate() {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(SpectrumError::BadValue {
                    index,
                    value: v.as_f64(),
                });
            }
        }
        if let Some(i) = eigenvalues.windows(2).position(|w| w[0] < w[1]) {
            return Err(SpectrumError::Unsorted(i + 1));
        }
        if !(eigenvalues[0] > T::zero()) {
            return Err(SpectrumError::AllZero);
        }
        Ok(Spectrum { eigenvalues })
    }

    /// `p` unit eigenvalues (`Sigma = I_p`).
    pub fn isotropic(p: usize) -> Self {
        Spectrum {
            eigenvalues: vec![T::one(); p.max(1)],
        }
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn trace(&self) -> T {
        self.eigenvalues.iter().fold(T::zero(), |a, &x| a + x)
    }

    fn positive(&self) -> impl Iterator<Item = T> + '_ {
        self.eigenvalues.iter().copied().filter(|&x| x > T::zero())
    }
}

/// Inputs of the risk formula besides the spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryParams<T> {
    pub n_train: usize,
    pub lambda: T,
    /// Label noise standard deviation.
    pub sigma: T,
    /// Projected target vector, one entry per eigenvalue.
    pub beta_star: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskBreakdown<T> {
    pub kappa: T,
    pub eta: T,
    pub de_bias: T,
    pub de_variance: T,
    pub noise_floor: T,
    pub de_total: T,
}

fn check_lambda<T: Real>(lambda: T) -> Result<(), RmtError> {
    if lambda > T::zero() && lambda.is_finite() {
        Ok(())
    } else {
        Err(RmtError::InvalidLambda(lambda.as_f64()))
    }
}

/// `F(kappa) = (1/N) sum xi / (xi + kappa) + lambda / kappa - 1`, strictly
/// decreasing in `kappa`.
pub fn self_consistent_residual<T: Real>(spec: &Spectrum<T>, n_train: usize, lambda: T, kappa: T) -> T {
    effective_dof(spec, kappa, 1) / T::count(n_train) + lambda / kappa - T::one()
}

/// Unique positive root `kappa_lambda` of the self-consistent equation.
pub fn solve_kappa<T: Real>(spec: &Spectrum<T>, n_train: usize, lambda: T) -> Result<T, RmtError> {
    check_lambda(lambda)?;
    if n_train == 0 {
        return Err(RmtError::ZeroSamples);
    }
    let f = |k: T| self_consistent_residual(spec, n_train, lambda, k);
    let mut lo = lambda;
    let mut hi = lambda + spec.trace() / T::count(n_train);
    let (f_lo, f_hi) = (f(lo), f(hi));
    // F(lo) = df_1(lambda)/N >= 0 exactly; F(hi) <= 0 up to rounding.
    if f_lo < T::zero() || f_hi > T::lit(1e-12) {
        return Err(RmtError::BracketFailure {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    if f_hi >= T::zero() {
        return Ok(hi);
    }
    let rel_width = T::lit(KAPPA_REL_WIDTH).max(T::EPSILON * T::lit(4.0));
    let mut best = (hi, f_hi.abs());
    if f_lo.abs() < best.1 {
        best = (lo, f_lo.abs());
    }
    for _ in 0..KAPPA_MAX_ITER {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm.abs() < best.1 {
            best = (mid, fm.abs());
        }
        if fm == T::zero() {
            break;
        }
        if fm > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= rel_width * hi {
            break;
        }
    }
    Ok(best.0)
}

/// Closed-form `kappa` for `Sigma = I_p` with `gamma = p / N`:
/// `(gamma - 1 + lambda + sqrt((gamma - 1 + lambda)^2 + 4 lambda)) / 2`.
///
/// Evaluated in the rationalized form `2 lambda / (sqrt(..) - b)` when
/// `b = gamma - 1 + lambda` is negative, which avoids cancellation.
pub fn kappa_isotropic_closed_form<T: Real>(gamma: T, lambda: T) -> T {
    let b = gamma - T::one() + lambda;
    let root = (b * b + T::lit(4.0) * lambda).sqrt();
    if b >= T::zero() {
        (b + root) * T::lit(0.5)
    } else {
        T::lit(2.0) * lambda / (root - b)
    }
}

/// Effective degrees of freedom `df_s(t) = sum_i (xi_i / (xi_i + t))^s`.
pub fn effective_dof<T: Real>(spec: &Spectrum<T>, t: T, s: u32) -> T {
    spec.positive().fold(T::zero(), |acc, x| {
        let ratio = x / (x + t);
        acc + ratio.powi(s as i32)
    })
}

/// Normalized degrees of freedom `eta = df_2(kappa) / N`.
pub fn eta<T: Real>(spec: &Spectrum<T>, n_train: usize, kappa: T) -> T {
    effective_dof(spec, kappa, 2) / T::count(n_train)
}

/// `d kappa / d lambda = 1 / (1 - eta)`.
pub fn kappa_prime<T: Real>(spec: &Spectrum<T>, n_train: usize, kappa: T) -> Result<T, RmtError> {
    let e = eta(spec, n_train, kappa);
    if e >= T::one() - T::lit(SINGULAR_MARGIN) {
        return Err(RmtError::Singular {
            kappa: kappa.as_f64(),
            eta: e.as_f64(),
        });
    }
    Ok(T::one() / (T::one() - e))
}

/// Deterministic equivalent of the test risk and its decomposition.
pub fn de_risk<T: Real>(spec: &Spectrum<T>, params: &TheoryParams<T>) -> Result<RiskBreakdown<T>, RmtError> {
    if params.beta_star.len() != spec.len() {
        return Err(RmtError::ParamShape {
            expected: spec.len(),
            found: params.beta_star.len(),
        });
    }
    if !(params.sigma >= T::zero()) || !params.sigma.is_finite() {
        return Err(RmtError::InvalidSigma(params.sigma.as_f64()));
    }
    let kappa = solve_kappa(spec, params.n_train, params.lambda)?;
    let eta = eta(spec, params.n_train, kappa);
    if eta >= T::one() - T::lit(SINGULAR_MARGIN) {
        return Err(RmtError::Singular {
            kappa: kappa.as_f64(),
            eta: eta.as_f64(),
        });
    }
    let gain = T::one() / (T::one() - eta);
    let projected = spec
        .eigenvalues()
        .iter()
        .zip(&params.beta_star)
        .fold(T::zero(), |acc, (&x, &b)| {
            let d = x + kappa;
            acc + b * b / (d * d)
        });
    let de_bias = kappa * kappa * gain * projected;
    let noise_floor = params.sigma * params.sigma;
    let de_variance = noise_floor * eta * gain;
    Ok(RiskBreakdown {
        kappa,
        eta,
        de_bias,
        de_variance,
        noise_floor,
        de_total: de_bias + de_variance + noise_floor,
    })
}
