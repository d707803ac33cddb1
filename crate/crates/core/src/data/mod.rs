//! Datasets: the synthetic `sin(u)^T theta*` regression task and the
//! Fashion-MNIST two-class pipeline (IDX ingestion, standardization, PCA).

mod fashion;
mod idx;
mod synthetic;

use std::fmt;

use nalgebra::DMatrix;
use thiserror::Error;

pub use fashion::{make_fashion_binary, FashionSplit, PcaModel, STD_FLOOR};
pub use idx::{load_idx, parse_idx_images, parse_idx_labels, IdxImages, IMAGES_MAGIC, LABELS_MAGIC};
pub use synthetic::{gen_synthetic, sample_theta_star, synthetic_target};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{what}: bad magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic {
        what: &'static str,
        found: u32,
        expected: u32,
    },
    #[error("{what}: truncated file, need {expected} bytes but found {found}")]
    Truncated {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("image file has {images} items but label file has {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("class {0} does not occur in the data")]
    ClassAbsent(u8),
    #[error("requested {requested} principal components but only {available} are available")]
    RankTooLow { requested: usize, available: usize },
    #[error("not enough samples: need {needed}, have {available}")]
    NotEnoughSamples { needed: usize, available: usize },
    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Synthetic,
    FashionMnist,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Synthetic => "synthetic",
            Source::FashionMnist => "fashion_mnist",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub source: Source,
    /// Label noise level when known.
    pub sigma: Option<f64>,
    pub seed: u64,
}

/// Inputs (one sample per row) and real labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: DMatrix<f64>,
    pub labels: Vec<f64>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.ncols()
    }

    /// Rows `indices` as a new dataset.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let inputs = DMatrix::from_fn(indices.len(), self.dim(), |i, j| self.inputs[(indices[i], j)]);
        Dataset {
            inputs,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            meta: self.meta.clone(),
        }
    }

    /// Sample standard deviation of the labels.
    pub fn label_std(&self) -> f64 {
        let n = self.labels.len() as f64;
        if n < 2.0 {
            return 0.0;
        }
        let mean = self.labels.iter().sum::<f64>() / n;
        (self.labels.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    }
}
