use nalgebra::{DMatrix, DVector};

use super::EstimateError;
use crate::scalar::Real;

/// Symmetric tolerance accepted by the decomposition, relative to `max|A|`
/// (absolute for matrices with entries below one).
pub const SYMMETRY_TOL: f64 = 1e-10;

const MAX_ITERATIONS: usize = 10_000;

/// `A = H diag(values) H^T`, eigenvalues sorted in non-increasing order.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T: Real> {
    pub eigenvalues: Vec<T>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: DMatrix<T>,
}

pub(crate) fn check_symmetric<T: Real>(a: &DMatrix<T>) -> Result<(), EstimateError> {
    if !a.is_square() {
        return Err(EstimateError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let scale = a.amax().max(T::one());
    let tol = T::lit(SYMMETRY_TOL) * scale;
    for i in 0..a.nrows() {
        for j in 0..i {
            let gap = (a[(i, j)] - a[(j, i)]).abs();
            if !(gap <= tol) {
                return Err(EstimateError::NotSymmetric {
                    row: i,
                    col: j,
                    gap: gap.as_f64(),
                });
            }
        }
    }
    Ok(())
}

/// Eigendecomposition of a real symmetric matrix.
///
/// Householder tridiagonalization plus implicit QR (nalgebra), followed by a
/// descending sort and a sign convention: the largest-magnitude entry of every
/// eigenvector is positive (ties go to the lowest row index).
pub fn symmetric_eigendecomposition<T: Real>(
    a: &DMatrix<T>,
) -> Result<SymmetricEigen<T>, EstimateError> {
    check_symmetric(a)?;
    if a.iter().any(|x| !x.is_finite()) {
        return Err(EstimateError::NonFinite);
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(SymmetricEigen {
            eigenvalues: Vec::new(),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    // Symmetrize exactly; nalgebra reads only the lower triangle anyway.
    let sym = (a + a.transpose()) * T::lit(0.5);
    let eig = nalgebra::linalg::SymmetricEigen::try_new(sym, T::EPSILON, MAX_ITERATIONS)
        .ok_or(EstimateError::NoConvergence {
            iterations: MAX_ITERATIONS,
        })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let eigenvalues: Vec<T> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: DVector<T> = eig.eigenvectors.column(src).into_owned();
        let mut pivot = 0;
        for i in 1..n {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        if col[pivot] < T::zero() {
            col.neg_mut();
        }
        eigenvectors.set_column(dst, &col);
    }
    Ok(SymmetricEigen {
        eigenvalues,
        eigenvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reconstruct(e: &SymmetricEigen<f64>) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&DVector::from_vec(e.eigenvalues.clone()));
        &e.eigenvectors * d * e.eigenvectors.transpose()
    }

    #[test]
    fn identity() {
        let e = symmetric_eigendecomposition(&DMatrix::<f64>::identity(3, 3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_sorted_with_identity_columns() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0f64, 0.0, 0.0, 3.0]);
        let e = symmetric_eigendecomposition(&a).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 1.0]);
        assert!((e.eigenvectors.column(0)[1] - 1.0).abs() < 1e-15);
        assert!((e.eigenvectors.column(1)[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_by_hand() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0f64, 1.0, 1.0, 2.0]);
        let e = symmetric_eigendecomposition(&a).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.eigenvectors.column(0);
        let v1 = e.eigenvectors.column(1);
        assert!((v0[0] - r).abs() < 1e-14 && (v0[1] - r).abs() < 1e-14);
        // sign convention: both entries tie in magnitude, first one wins
        assert!((v1[0] - r).abs() < 1e-14 && (v1[1] + r).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction_and_orthogonality() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for &n in &[1usize, 5, 40] {
            let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let a = &b + b.transpose();
            let e = symmetric_eigendecomposition(&a).unwrap();
            let err = (reconstruct(&e) - &a).norm() / a.norm().max(1e-300);
            assert!(err < 1e-8);
            let hth = e.eigenvectors.transpose() * &e.eigenvectors;
            assert!((hth - DMatrix::identity(n, n)).amax() < 1e-8);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            for k in 0..n {
                let col = e.eigenvectors.column(k);
                let pivot = col.iamax();
                assert!(col[pivot] > 0.0);
            }
        }
    }

    #[test]
    fn rejects_asymmetric_and_nonfinite() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(
            symmetric_eigendecomposition(&a),
            Err(EstimateError::NotSymmetric { .. })
        ));
        let a = DMatrix::from_row_slice(2, 2, &[1.0, f64::NAN, f64::NAN, 1.0]);
        assert!(symmetric_eigendecomposition(&a).is_err());
        let a = DMatrix::<f64>::zeros(2, 3);
        assert!(matches!(
            symmetric_eigendecomposition(&a),
            Err(EstimateError::NotSquare { .. })
        ));
    }

    #[test]
    fn works_in_single_precision() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0f32, 1.0, 1.0, 2.0]);
        let e = symmetric_eigendecomposition(&a).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-5);
    }
}
