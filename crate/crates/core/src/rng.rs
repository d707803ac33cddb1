//! Seeded randomness.
//!
//! Every random draw in the crate goes through [`seeded`]: a ChaCha20 stream
//! keyed by a 64-bit seed (expanded with `SeedableRng::seed_from_u64`).
//! Gaussians come from `rand_distr::StandardNormal` (ziggurat) applied to that
//! stream, so a seed reproduces the same numbers on every platform.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Real;

pub type Rng = ChaCha20Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Mixes a 64-bit word (splitmix64 finalizer).
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent and a list of integer labels.
pub fn derive_seed(base: u64, labels: &[u64]) -> u64 {
    let h = labels
        .iter()
        .fold(0x51_7c_c1_b7_27_22_0a_95u64, |acc, &l| mix64(acc ^ mix64(l)));
    base ^ h
}

/// `rows x cols` matrix of independent standard normal draws, filled row by row.
pub fn standard_normal_matrix<T: Real>(rng: &mut Rng, rows: usize, cols: usize) -> DMatrix<T> {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let z: f64 = StandardNormal.sample(rng);
            m[(i, j)] = T::lit(z);
        }
    }
    m
}
