use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Dataset, DatasetMeta, Source};
use crate::rng;

/// Noiseless target `sum_j sin(u_j) theta*_j`.
pub fn synthetic_target(u: &[f64], theta_star: &[f64]) -> f64 {
    u.iter().zip(theta_star).map(|(x, t)| x.sin() * t).sum()
}

/// Target vector with i.i.d. entries uniform on `[0, 2 pi]`.
pub fn sample_theta_star(d: usize, seed: u64) -> Vec<f64> {
    let mut g = rng::seeded(seed);
    (0..d).map(|_| g.random_range(0.0..=TAU)).collect()
}

/// `n_samples` draws of `u ~ N(0, I_d)` with labels
/// `y = sin(u)^T theta* + eps`, `eps ~ N(0, sigma^2)`.
///
/// Inputs are drawn first (row by row), then the noise, from one stream.
pub fn gen_synthetic(d: usize, n_samples: usize, sigma: f64, theta_star: &[f64], seed: u64) -> Dataset {
    assert_eq!(theta_star.len(), d, "theta_star must have length d");
    let mut g = rng::seeded(seed);
    let inputs = rng::standard_normal_matrix::<f64>(&mut g, n_samples, d);
    let labels = (0..n_samples)
        .map(|i| {
            let u: Vec<f64> = inputs.row(i).iter().copied().collect();
            let z: f64 = StandardNormal.sample(&mut g);
            synthetic_target(&u, theta_star) + sigma * z
        })
        .collect();
    Dataset {
        inputs,
        labels,
        meta: DatasetMeta {
            source: Source::Synthetic,
            sigma: Some(sigma),
            seed,
        },
    }
}
