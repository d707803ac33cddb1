//! Estimation of the population spectrum and the projected target vector
//! from the kernel matrix of an estimation dataset (Nystrom-style).

mod eigen;

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub use eigen::{symmetric_eigendecomposition, SymmetricEigen, SYMMETRY_TOL};

use crate::rmt::{Spectrum, SpectrumError};
use crate::scalar::Real;

/// Relative cutoff below which estimated eigenvalues are dropped before the
/// theory is evaluated.
pub const THEORY_CUTOFF: f64 = 1e-12;

/// Most negative eigenvalue of `K_est / N_est` accepted (and clipped to zero).
pub const PSD_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix not symmetric: |A[{row},{col}] - A[{col},{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,
    #[error("eigensolver did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("estimation set needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("label vector has {found} entries, kernel has {expected} rows")]
    LabelShape { expected: usize, found: usize },
    #[error("kernel matrix is not positive semidefinite: eigenvalue {0:e}")]
    NotPsd(f64),
    #[error("spectrum: {0}")]
    Spectrum(#[from] SpectrumError),
    #[error("csv: {0}")]
    Csv(String),
}

/// Eigendecomposition `K_est / N_est = H diag(Lambda) H^T` together with the
/// projected labels `beta = H^T y / sqrt(N_est)`.
#[derive(Debug, Clone)]
pub struct SpectralEstimate<T: Real> {
    /// Non-increasing, numerically negative values clipped to zero.
    pub eigenvalues: Vec<T>,
    /// Orthogonal, column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: DMatrix<T>,
    pub beta_est: Vec<T>,
    pub n_est: usize,
}

impl<T: Real> SpectralEstimate<T> {
    /// Number of eigenvalues strictly above `rel_tol * max`.
    pub fn count_above(&self, rel_tol: T) -> usize {
        let top = self.eigenvalues.first().copied().unwrap_or_else(T::zero);
        self.eigenvalues
            .iter()
            .filter(|&&x| x > rel_tol * top)
            .count()
    }

    /// Nystrom values of the `k`-th eigenfunction at the sample points,
    /// `sqrt(N_est) h_k`; their squared norm is `N_est`.
    pub fn nystrom_values(&self, k: usize) -> DVector<T> {
        self.eigenvectors.column(k) * T::count(self.n_est).sqrt()
    }

    /// Spectrum and matching `beta` prefix with every eigenvalue at or below
    /// `rel_cutoff * max` removed.
    pub fn truncated(&self, rel_cutoff: T) -> Result<(Spectrum<T>, Vec<T>), EstimateError> {
        let keep = self.count_above(rel_cutoff);
        let spectrum = Spectrum::new(self.eigenvalues[..keep].to_vec())?;
        Ok((spectrum, self.beta_est[..keep].to_vec()))
    }

    /// [`Self::truncated`] with the default cutoff.
    pub fn theory_inputs(&self) -> Result<(Spectrum<T>, Vec<T>), EstimateError> {
        self.truncated(T::lit(THEORY_CUTOFF))
    }

    /// Mean squared label minus the target mass captured by the retained
    /// modes. This is the label variance the theory sees as noise: the true
    /// noise plus any part of the target outside the kernel's span.
    pub fn residual_label_power(&self, y_est: &[T], rel_cutoff: T) -> T {
        let keep = self.count_above(rel_cutoff);
        let total = y_est.iter().fold(T::zero(), |a, &y| a + y * y) / T::count(y_est.len());
        let captured = self.beta_est[..keep]
            .iter()
            .fold(T::zero(), |a, &b| a + b * b);
        (total - captured).max(T::zero())
    }
}

/// Decomposes the scaled estimation kernel and projects the labels.
pub fn estimate_population<T: Real>(
    k_est: &DMatrix<T>,
    y_est: &[T],
) -> Result<SpectralEstimate<T>, EstimateError> {
    let n = k_est.nrows();
    if n < 2 {
        return Err(EstimateError::TooFewSamples(n));
    }
    if y_est.len() != n {
        return Err(EstimateError::LabelShape {
            expected: n,
            found: y_est.len(),
        });
    }
    let scaled = k_est / T::count(n);
    let eig = symmetric_eigendecomposition(&scaled)?;
    let mut eigenvalues = eig.eigenvalues;
    for v in eigenvalues.iter_mut() {
        if *v < T::zero() {
            if *v < -T::lit(PSD_TOL) {
                return Err(EstimateError::NotPsd(v.as_f64()));
            }
            *v = T::zero();
        }
    }
    let y = DVector::from_column_slice(y_est);
    let beta = eig.eigenvectors.tr_mul(&y) / T::count(n).sqrt();
    Ok(SpectralEstimate {
        eigenvalues,
        eigenvectors: eig.eigenvectors,
        beta_est: beta.iter().copied().collect(),
        n_est: n,
    })
}

/// Writes `index,eigenvalue,beta_est` rows.
pub fn write_estimate_csv<T: Real, W: Write>(
    eigenvalues: &[T],
    beta: &[T],
    out: W,
) -> Result<(), EstimateError> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| EstimateError::Csv(e.to_string());
    w.write_record(["index", "eigenvalue", "beta_est"]).map_err(err)?;
    for (i, (ev, b)) in eigenvalues.iter().zip(beta).enumerate() {
        w.write_record([
            i.to_string(),
            format!("{:?}", ev.as_f64()),
            format!("{:?}", b.as_f64()),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| EstimateError::Csv(e.to_string()))
}

/// Reads the output of [`write_estimate_csv`] back as `(eigenvalues, beta)`.
pub fn read_estimate_csv<R: Read>(input: R) -> Result<(Vec<f64>, Vec<f64>), EstimateError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(|e| EstimateError::Csv(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| EstimateError::Csv(format!("missing column `{name}`")))
    };
    let (ei, bi) = (col("eigenvalue")?, col("beta_est")?);
    let mut eigenvalues = Vec::new();
    let mut beta = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| EstimateError::Csv(e.to_string()))?;
        let parse = |i: usize| {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| EstimateError::Csv(format!("bad number on data row {}", line + 1)))
        };
        eigenvalues.push(parse(ei)?);
        beta.push(parse(bi)?);
    }
    Ok((eigenvalues, beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{kernel_matrix, AnsatzSpec, Family};
    use crate::rng;

    #[test]
    fn scaled_identity() {
        let n = 4;
        let k = DMatrix::<f64>::identity(n, n) * n as f64;
        let y = [1.0, -2.0, 0.5, 3.0];
        let est = estimate_population(&k, &y).unwrap();
        assert!(est.eigenvalues.iter().all(|&v| (v - 1.0).abs() < 1e-14));
        // beta = H^T y / 2 with H orthogonal: same norm as y / 2
        let bn: f64 = est.beta_est.iter().map(|b| b * b).sum();
        let yn: f64 = y.iter().map(|v| v * v).sum::<f64>() / 4.0;
        assert!((bn - yn).abs() < 1e-12);
        // H orthogonal: H beta sqrt(N) = y
        let h = &est.eigenvectors;
        let back = h * DVector::from_vec(est.beta_est.clone()) * 2.0;
        for i in 0..n {
            assert!((back[i] - y[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_two_by_two() {
        let k = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let est = estimate_population(&k, &[1.0, 1.0]).unwrap();
        assert_eq!(est.eigenvalues, vec![1.0, 0.0]);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((est.beta_est[0] - r).abs() < 1e-15);
        assert!((est.beta_est[1] - r).abs() < 1e-15);
        let (spec, beta) = est.theory_inputs().unwrap();
        assert_eq!(spec.len(), 1);
        assert_eq!(beta.len(), 1);
    }

    #[test]
    fn nystrom_normalization() {
        let a = AnsatzSpec::new(Family::Tpa, 2).unwrap();
        let mut g = rng::seeded(1);
        let x = rng::standard_normal_matrix::<f64>(&mut g, 60, 4);
        let k = kernel_matrix(&a, &x).unwrap();
        let y: Vec<f64> = (0..60).map(|i| (i as f64).sin()).collect();
        let est = estimate_population(&k, &y).unwrap();
        for kk in [0, 5, 59] {
            let psi = est.nystrom_values(kk);
            assert!((psi.norm_squared() / 60.0 - 1.0).abs() < 1e-12);
        }
        let h = &est.eigenvectors;
        assert!((h.transpose() * h - DMatrix::identity(60, 60)).amax() < 1e-8);
        let recon = h * DMatrix::from_diagonal(&DVector::from_vec(est.eigenvalues.clone())) * h.transpose();
        assert!((recon - &k / 60.0).norm() / (k.norm() / 60.0) < 1e-8);
        assert_eq!(est.count_above(1e-10), 9);
    }

    #[test]
    fn linear_kernel_recovers_covariance() {
        let mut g = rng::seeded(77);
        let n = 2000;
        let z = rng::standard_normal_matrix::<f64>(&mut g, n, 3);
        let scales = [2.0, 1.0, 0.5];
        let x = DMatrix::from_fn(n, 3, |i, j| z[(i, j)] * scales[j]);
        let k = &x * x.transpose();
        let y = vec![0.0; n];
        let est = estimate_population(&k, &y).unwrap();
        for (got, want) in est.eigenvalues.iter().zip([4.0, 1.0, 0.25]) {
            assert!((got - want).abs() / want < 0.1, "{got} vs {want}");
        }
        assert!(est.eigenvalues[3..].iter().all(|&v| v.abs() < 1e-8));
    }

    #[test]
    fn errors() {
        let k = DMatrix::<f64>::identity(1, 1);
        assert_eq!(
            estimate_population(&k, &[1.0]).unwrap_err(),
            EstimateError::TooFewSamples(1)
        );
        let k = DMatrix::<f64>::identity(3, 3);
        assert!(matches!(
            estimate_population(&k, &[1.0]),
            Err(EstimateError::LabelShape { .. })
        ));
        let k = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(
            estimate_population(&k, &[1.0, 1.0]),
            Err(EstimateError::NotPsd(_))
        ));
    }

    #[test]
    fn residual_label_power_counts_out_of_span_mass() {
        // rank-one kernel spanned by (1,1)/sqrt2; y = (1,-1) is orthogonal
        let k = DMatrix::from_row_slice(2, 2, &[1.0f64, 1.0, 1.0, 1.0]);
        let y = [1.0, -1.0];
        let est = estimate_population(&k, &y).unwrap();
        assert!((est.residual_label_power(&y, 1e-12) - 1.0).abs() < 1e-14);
        let y = [1.0, 1.0];
        let est = estimate_population(&k, &y).unwrap();
        assert!(est.residual_label_power(&y, 1e-12).abs() < 1e-14);
    }

    #[test]
    fn csv_round_trip() {
        let ev = [3.5, 1.0 / 3.0, 0.0];
        let beta = [-0.1, 2.0e-17, 7.0];
        let mut buf = Vec::new();
        write_estimate_csv(&ev, &beta, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("index,eigenvalue,beta_est\n"));
        let (e2, b2) = read_estimate_csv(buf.as_slice()).unwrap();
        assert_eq!(e2, ev);
        assert_eq!(b2, beta);
    }
}
