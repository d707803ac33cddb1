//! Kernel ridge regression in dual form: `alpha = (K + N lambda I)^{-1} y`,
//! predictions `f(u) = sum_i alpha_i k(u_i, u)`.

pub mod primal;

pub use primal::{bias_variance, primal_ridge, test_risk};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::estimate::symmetric_eigendecomposition;
use crate::scalar::Real;

/// Symmetry tolerance on the kernel matrix.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Relative eigenvalue cutoff of the pseudo-inverse fallback.
pub const PINV_CUTOFF: f64 = 1e-12;
/// A fit is exact when `|(K + N lambda I) alpha - y| <= RESIDUAL_TOL |y|`.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KrrError {
    #[error("kernel matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("kernel matrix not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("lambda must be non-negative, got {0}")]
    NegativeLambda(f64),
    #[error("shape mismatch: expected {expected}, got {found}")]
    Shape { expected: usize, found: usize },
    #[error("empty input")]
    Empty,
    #[error("linear solve failed: {0}")]
    Solve(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Cholesky,
    EigenPinv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverChoice {
    /// Cholesky first, pseudo-inverse if the factorization fails or leaves a
    /// residual above [`RESIDUAL_TOL`].
    #[default]
    Auto,
    Cholesky,
    EigenPinv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualWeights<T> {
    pub alpha: Vec<T>,
    pub lambda: T,
    pub n_train: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport<T> {
    pub train_mse: T,
    pub solver: Solver,
    /// Eigenvalue cutoff applied by the pseudo-inverse (zero for Cholesky).
    pub jitter_used: T,
    /// `|(K + N lambda I) alpha - y| / |y|`.
    pub relative_residual: T,
    /// Set when the residual exceeds [`RESIDUAL_TOL`]: the system is singular
    /// and `y` is not in its range, or the solve lost accuracy.
    pub flagged: bool,
}

fn validate<T: Real>(k: &DMatrix<T>, y: &[T], lambda: T) -> Result<(), KrrError> {
    if !k.is_square() {
        return Err(KrrError::NotSquare {
            rows: k.nrows(),
            cols: k.ncols(),
        });
    }
    if k.nrows() == 0 {
        return Err(KrrError::Empty);
    }
    if y.len() != k.nrows() {
        return Err(KrrError::Shape {
            expected: k.nrows(),
            found: y.len(),
        });
    }
    if k.iter().any(|v| !v.is_finite()) {
        return Err(KrrError::NonFinite("kernel matrix"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(KrrError::NonFinite("labels"));
    }
    if !lambda.is_finite() {
        return Err(KrrError::NonFinite("lambda"));
    }
    if lambda < T::zero() {
        return Err(KrrError::NegativeLambda(lambda.as_f64()));
    }
    let tol = T::lit(SYMMETRY_TOL);
    for i in 0..k.nrows() {
        for j in 0..i {
            if (k[(i, j)] - k[(j, i)]).abs() > tol {
                return Err(KrrError::NotSymmetric { row: i, col: j });
            }
        }
    }
    Ok(())
}

fn regularized<T: Real>(k: &DMatrix<T>, lambda: T) -> DMatrix<T> {
    let n = k.nrows();
    let mut a = (k + k.transpose()) * T::lit(0.5);
    let shift = T::count(n) * lambda;
    for i in 0..n {
        a[(i, i)] += shift;
    }
    a
}

/// Cholesky solve; treated as failed when the squared pivots span more than
/// [`PINV_CUTOFF`], i.e. when the matrix is numerically singular.
fn solve_cholesky<T: Real>(a: &DMatrix<T>, y: &DVector<T>) -> Option<DVector<T>> {
    let chol = a.clone().cholesky()?;
    let l = chol.l_dirty();
    let pivots = (0..l.nrows()).map(|i| l[(i, i)] * l[(i, i)]);
    let (lo, hi) = pivots.fold((T::max_value()?, T::zero()), |(lo, hi), p| (lo.min(p), hi.max(p)));
    if !(lo > T::lit(PINV_CUTOFF) * hi) {
        return None;
    }
    let alpha = chol.solve(y);
    alpha.iter().all(|v| v.is_finite()).then_some(alpha)
}

/// Minimum-norm solution through the eigendecomposition; returns the cutoff.
fn solve_eigen_pinv<T: Real>(a: &DMatrix<T>, y: &DVector<T>) -> Result<(DVector<T>, T), KrrError> {
    let eig = symmetric_eigendecomposition(a).map_err(|e| KrrError::Solve(e.to_string()))?;
    let top = eig
        .eigenvalues
        .iter()
        .fold(T::zero(), |m, &v| m.max(v.abs()));
    let cutoff = T::lit(PINV_CUTOFF) * top;
    let projected = eig.eigenvectors.tr_mul(y);
    let scaled = DVector::from_iterator(
        projected.len(),
        projected.iter().zip(&eig.eigenvalues).map(|(&c, &ev)| {
            if ev > cutoff {
                c / ev
            } else {
                T::zero()
            }
        }),
    );
    Ok((&eig.eigenvectors * scaled, cutoff))
}

fn relative_residual<T: Real>(a: &DMatrix<T>, alpha: &DVector<T>, y: &DVector<T>) -> T {
    let r = (a * alpha - y).norm();
    let scale = y.norm();
    if scale > T::zero() {
        r / scale
    } else {
        r
    }
}

/// Fits the dual weights with the default solver strategy.
pub fn fit_dual<T: Real>(
    k: &DMatrix<T>,
    y: &[T],
    lambda: T,
) -> Result<(DualWeights<T>, FitReport<T>), KrrError> {
    fit_dual_with(k, y, lambda, SolverChoice::Auto)
}

/// Solves `(K + N lambda I) alpha = y`.
pub fn fit_dual_with<T: Real>(
    k: &DMatrix<T>,
    y: &[T],
    lambda: T,
    choice: SolverChoice,
) -> Result<(DualWeights<T>, FitReport<T>), KrrError> {
    validate(k, y, lambda)?;
    let a = regularized(k, lambda);
    let yv = DVector::from_column_slice(y);
    let tol = T::lit(RESIDUAL_TOL);

    let chol = || {
        solve_cholesky(&a, &yv).map(|alpha| {
            let res = relative_residual(&a, &alpha, &yv);
            (alpha, Solver::Cholesky, T::zero(), res)
        })
    };
    let pinv = || -> Result<_, KrrError> {
        let (alpha, cutoff) = solve_eigen_pinv(&a, &yv)?;
        let res = relative_residual(&a, &alpha, &yv);
        Ok((alpha, Solver::EigenPinv, cutoff, res))
    };

    let (alpha, solver, jitter_used, residual) = match choice {
        SolverChoice::Cholesky => {
            chol().ok_or_else(|| KrrError::Solve("matrix not positive definite".into()))?
        }
        SolverChoice::EigenPinv => pinv()?,
        SolverChoice::Auto => match chol() {
            Some(c) if c.3 <= tol => c,
            Some(c) => {
                let p = pinv()?;
                if p.3 < c.3 {
                    p
                } else {
                    c
                }
            }
            None => pinv()?,
        },
    };

    let fitted = k * &alpha;
    let train_mse = mse(fitted.as_slice(), y)?;
    Ok((
        DualWeights {
            alpha: alpha.iter().copied().collect(),
            lambda,
            n_train: y.len(),
        },
        FitReport {
            train_mse,
            solver,
            jitter_used,
            relative_residual: residual,
            flagged: !(residual <= tol),
        },
    ))
}

/// `k_cross * alpha` for an `M x N` cross-kernel.
pub fn predict<T: Real>(weights: &DualWeights<T>, k_cross: &DMatrix<T>) -> Result<Vec<T>, KrrError> {
    if k_cross.ncols() != weights.n_train || weights.alpha.len() != weights.n_train {
        return Err(KrrError::Shape {
            expected: weights.n_train,
            found: k_cross.ncols(),
        });
    }
    let alpha = DVector::from_column_slice(&weights.alpha);
    Ok((k_cross * alpha).iter().copied().collect())
}

/// Mean squared error.
pub fn mse<T: Real>(pred: &[T], truth: &[T]) -> Result<T, KrrError> {
    if pred.len() != truth.len() {
        return Err(KrrError::Shape {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    if pred.is_empty() {
        return Err(KrrError::Empty);
    }
    let sum = pred
        .iter()
        .zip(truth)
        .fold(T::zero(), |acc, (&p, &t)| acc + (p - t) * (p - t));
    Ok(sum / T::count(pred.len()))
}
