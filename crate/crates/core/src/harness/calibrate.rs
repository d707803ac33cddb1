use super::HarnessError;
use crate::rmt::{de_risk, Spectrum, TheoryParams};

/// Termination width of the golden-section search on sigma.
pub const CALIBRATION_TOL: f64 = 1e-6;

/// Empirical mean test error of one training size at the reference lambda.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalPoint {
    pub n_train: usize,
    pub emp_mean: f64,
}

/// Golden-section minimization of a unimodal `f` on `[lo, hi]`. The
/// endpoints are compared with the interior optimum so minima on the
/// boundary are returned exactly.
pub fn golden_section_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    [(lo, f(lo)), (hi, f(hi)), (mid, f(mid))]
        .into_iter()
        .fold((mid, f64::INFINITY), |best, cand| if cand.1 < best.1 { cand } else { best })
        .0
}

/// Noise level whose theory curve best matches the empirical means at the
/// reference lambda, in the least-squares sense over the training sizes.
///
/// Searches `sigma` in `[0, max_sigma]`. Cells where the theory is singular
/// carry no information and are skipped.
pub fn calibrate_sigma(
    spectrum: &Spectrum<f64>,
    beta: &[f64],
    points: &[EmpiricalPoint],
    reference_lambda: f64,
    max_sigma: f64,
) -> Result<f64, HarnessError> {
    if points.is_empty() {
        return Err(HarnessError::Calibration("no empirical rows at the reference lambda".into()));
    }
    // de_total(sigma) = bias + sigma^2 / (1 - eta)
    let mut cells = Vec::new();
    for p in points {
        let params = TheoryParams {
            n_train: p.n_train,
            lambda: reference_lambda,
            sigma: 0.0,
            beta_star: beta.to_vec(),
        };
        match de_risk(spectrum, &params) {
            Ok(r) => cells.push((r.de_bias, 1.0 / (1.0 - r.eta), p.emp_mean)),
            Err(crate::rmt::RmtError::Singular { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    if cells.is_empty() {
        return Err(HarnessError::Calibration("theory singular in every reference cell".into()));
    }
    let objective = |sigma: f64| {
        cells
            .iter()
            .map(|&(bias, gain, emp)| (bias + sigma * sigma * gain - emp).powi(2))
            .sum::<f64>()
            / cells.len() as f64
    };
    Ok(golden_section_min(objective, 0.0, max_sigma.max(0.0), CALIBRATION_TOL))
}
