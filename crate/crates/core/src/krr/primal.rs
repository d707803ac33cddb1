//! Primal ridge regression on explicit features and the exact finite-sample
//! bias/variance of its test risk. Used to cross-check the dual solver and
//! the risk decomposition.

use nalgebra::{DMatrix, DVector};

use super::KrrError;
use crate::scalar::Real;

/// `theta = (X^T X / N + lambda I)^{-1} X^T y / N` for an `N x p` design.
pub fn primal_ridge<T: Real>(x: &DMatrix<T>, y: &[T], lambda: T) -> Result<DVector<T>, KrrError> {
    let n = x.nrows();
    if y.len() != n {
        return Err(KrrError::Shape { expected: n, found: y.len() });
    }
    if n == 0 {
        return Err(KrrError::Empty);
    }
    let (cov, rhs) = sample_moments(x, &DVector::from_column_slice(y));
    let a = regularize(&cov, lambda);
    a.cholesky()
        .map(|c| c.solve(&rhs))
        .ok_or_else(|| KrrError::Solve("primal system not positive definite".into()))
}

fn sample_moments<T: Real>(x: &DMatrix<T>, y: &DVector<T>) -> (DMatrix<T>, DVector<T>) {
    let inv_n = T::one() / T::count(x.nrows());
    (x.tr_mul(x) * inv_n, x.tr_mul(y) * inv_n)
}

fn regularize<T: Real>(cov: &DMatrix<T>, lambda: T) -> DMatrix<T> {
    let mut a = cov.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += lambda;
    }
    a
}

/// Exact bias and variance of the ridge test risk conditional on the design,
/// averaging only over training label noise:
///
/// `B = lambda^2 theta*^T R Sigma R theta*`, `V = sigma^2 / N Tr[Sigma S R^2]`
/// with `S = X^T X / N` and `R = (S + lambda I)^{-1}`.
pub fn bias_variance<T: Real>(
    x: &DMatrix<T>,
    population_cov: &DMatrix<T>,
    theta_star: &DVector<T>,
    lambda: T,
    sigma: T,
) -> Result<(T, T), KrrError> {
    let n = x.nrows();
    let p = x.ncols();
    if population_cov.shape() != (p, p) || theta_star.len() != p {
        return Err(KrrError::Shape { expected: p, found: theta_star.len() });
    }
    let inv_n = T::one() / T::count(n);
    let s = x.tr_mul(x) * inv_n;
    let r = regularize(&s, lambda)
        .try_inverse()
        .ok_or_else(|| KrrError::Solve("S + lambda I is singular".into()))?;
    let rt = &r * theta_star;
    let bias = lambda * lambda * (population_cov * &rt).dot(&rt);
    let variance = sigma * sigma * inv_n * (population_cov * &s * &r * &r).trace();
    Ok((bias, variance))
}

/// `(theta* - theta)^T Sigma (theta* - theta) + sigma^2`.
pub fn test_risk<T: Real>(
    population_cov: &DMatrix<T>,
    theta_star: &DVector<T>,
    theta_hat: &DVector<T>,
    sigma: T,
) -> T {
    let diff = theta_star - theta_hat;
    (population_cov * &diff).dot(&diff) + sigma * sigma
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krr::fit_dual;
    use crate::rng;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn push_through_identity() {
        for seed in 0..20 {
            let mut g = rng::seeded(seed);
            let x = rng::standard_normal_matrix::<f64>(&mut g, 5, 3);
            let y: Vec<f64> = (0..5).map(|_| g.random_range(-2.0..2.0)).collect();
            let lambda = 10f64.powf(g.random_range(-3.0..0.0));
            let primal = primal_ridge(&x, &y, lambda).unwrap();
            let k = &x * x.transpose();
            let (w, _) = fit_dual(&k, &y, lambda).unwrap();
            let dual = x.transpose() * DVector::from_vec(w.alpha);
            assert!((primal - dual).amax() < 1e-10);
        }
    }

    #[test]
    fn error_decomposition_identity() {
        // theta* - theta = lambda R theta* - R X^T eps / N
        let mut g = rng::seeded(4);
        let (n, p) = (12, 4);
        let x = rng::standard_normal_matrix::<f64>(&mut g, n, p);
        let theta_star = DVector::from_fn(p, |_, _| g.random_range(-1.0..1.0));
        let eps = DVector::from_fn(n, |_, _| {
            let z: f64 = StandardNormal.sample(&mut g);
            0.3 * z
        });
        let lambda = 0.05;
        let y = &x * &theta_star + &eps;
        let theta = primal_ridge(&x, y.as_slice(), lambda).unwrap();
        let s = x.tr_mul(&x) / n as f64;
        let r = regularize(&s, lambda).try_inverse().unwrap();
        let expect = &r * &theta_star * lambda - &r * x.tr_mul(&eps) / n as f64;
        assert!(((&theta_star - theta) - expect).amax() < 1e-12);
    }

    #[test]
    fn noiseless_bias_only() {
        let mut g = rng::seeded(6);
        let x = rng::standard_normal_matrix::<f64>(&mut g, 30, 3);
        let cov = DMatrix::<f64>::identity(3, 3);
        let theta_star = DVector::from_vec(vec![1.0, -0.5, 2.0]);
        let y = &x * &theta_star;
        let lambda = 0.2;
        let theta = primal_ridge(&x, y.as_slice(), lambda).unwrap();
        let (b, v) = bias_variance(&x, &cov, &theta_star, lambda, 0.0).unwrap();
        assert_eq!(v, 0.0);
        assert!((test_risk(&cov, &theta_star, &theta, 0.0) - b).abs() < 1e-12);
    }

    #[test]
    fn shape_checks() {
        let x = DMatrix::<f64>::zeros(4, 3);
        assert!(primal_ridge(&x, &[1.0; 3], 0.1).is_err());
        let cov = DMatrix::<f64>::identity(2, 2);
        assert!(bias_variance(&x, &cov, &DVector::zeros(3), 0.1, 1.0).is_err());
    }
}
