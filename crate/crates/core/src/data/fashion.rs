use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;

use super::{DataError, Dataset, DatasetMeta, IdxImages, Source};
use crate::estimate::symmetric_eigendecomposition;
use crate::rng;

/// Smallest per-feature standard deviation used when standardizing; constant
/// pixels would otherwise divide by zero.
pub const STD_FLOOR: f64 = 1e-8;

/// Standardization statistics and the leading principal directions.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: DVector<f64>,
    pub scale: DVector<f64>,
    /// `d x d_raw`, orthonormal rows.
    pub components: DMatrix<f64>,
    /// Variances along each retained component.
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    /// Fits standardization and PCA on the rows of `raw`.
    pub fn fit(raw: &DMatrix<f64>, d: usize) -> Result<Self, DataError> {
        let (n, width) = raw.shape();
        if n < 2 {
            return Err(DataError::NotEnoughSamples { needed: 2, available: n });
        }
        if d > width {
            return Err(DataError::RankTooLow { requested: d, available: width });
        }
        let mean = DVector::from_fn(width, |j, _| raw.column(j).sum() / n as f64);
        let scale = DVector::from_fn(width, |j, _| {
            let var = raw.column(j).iter().map(|x| (x - mean[j]).powi(2)).sum::<f64>() / n as f64;
            var.sqrt().max(STD_FLOOR)
        });
        let z = standardize(raw, &mean, &scale);
        let cov = z.tr_mul(&z) / n as f64;
        let eig = symmetric_eigendecomposition(&cov).map_err(|e| DataError::Eigen(e.to_string()))?;
        let top = eig.eigenvalues.first().copied().unwrap_or(0.0);
        let available = eig.eigenvalues.iter().filter(|&&v| v > 1e-12 * top).count();
        if d > available {
            return Err(DataError::RankTooLow { requested: d, available });
        }
        let components = DMatrix::from_fn(d, width, |k, j| eig.eigenvectors[(j, k)]);
        Ok(PcaModel {
            mean,
            scale,
            components,
            explained_variance: eig.eigenvalues[..d].to_vec(),
        })
    }

    /// Standardizes rows with the fitted statistics and projects them.
    pub fn transform(&self, raw: &DMatrix<f64>) -> DMatrix<f64> {
        standardize(raw, &self.mean, &self.scale) * self.components.transpose()
    }

    /// Maps component scores back to raw feature space.
    pub fn inverse_transform(&self, scores: &DMatrix<f64>) -> DMatrix<f64> {
        let z = scores * &self.components;
        DMatrix::from_fn(z.nrows(), z.ncols(), |i, j| z[(i, j)] * self.scale[j] + self.mean[j])
    }

    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }
}

fn standardize(raw: &DMatrix<f64>, mean: &DVector<f64>, scale: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(raw.nrows(), raw.ncols(), |i, j| (raw[(i, j)] - mean[j]) / scale[j])
}

/// Output of [`make_fashion_binary`].
#[derive(Debug, Clone)]
pub struct FashionSplit {
    pub train_pool: Dataset,
    pub test_pool: Dataset,
    pub pca: PcaModel,
}

/// Restricts the data to two classes, relabels them `0.0` / `1.0`, splits off
/// `test_size` samples at random and fits standardization plus PCA to `d`
/// components on the remaining training pool only.
pub fn make_fashion_binary(
    images: &IdxImages,
    labels: &[u8],
    class_a: u8,
    class_b: u8,
    d: usize,
    split_seed: u64,
    test_size: usize,
) -> Result<FashionSplit, DataError> {
    if images.count != labels.len() {
        return Err(DataError::CountMismatch { images: images.count, labels: labels.len() });
    }
    let mut picked: Vec<usize> = (0..labels.len())
        .filter(|&i| labels[i] == class_a || labels[i] == class_b)
        .collect();
    for class in [class_a, class_b] {
        if !picked.iter().any(|&i| labels[i] == class) {
            return Err(DataError::ClassAbsent(class));
        }
    }
    if picked.len() < test_size + 2 {
        return Err(DataError::NotEnoughSamples { needed: test_size + 2, available: picked.len() });
    }
    picked.shuffle(&mut rng::seeded(split_seed));
    let (test_idx, train_idx) = picked.split_at(test_size);

    let width = images.pixels_per_image();
    let raw = |idx: &[usize]| {
        DMatrix::from_fn(idx.len(), width, |i, j| f64::from(images.image(idx[i])[j]))
    };
    let target = |idx: &[usize]| -> Vec<f64> {
        idx.iter().map(|&i| if labels[i] == class_a { 0.0 } else { 1.0 }).collect()
    };
    let train_raw = raw(train_idx);
    let pca = PcaModel::fit(&train_raw, d)?;
    let meta = DatasetMeta { source: Source::FashionMnist, sigma: None, seed: split_seed };
    let train_pool = Dataset { inputs: pca.transform(&train_raw), labels: target(train_idx), meta: meta.clone() };
    let test_pool = Dataset { inputs: pca.transform(&raw(test_idx)), labels: target(test_idx), meta };
    Ok(FashionSplit { train_pool, test_pool, pca })
}
