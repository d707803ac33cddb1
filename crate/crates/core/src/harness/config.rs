use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::qsim::{AnsatzSpec, Family, QsimError};

pub const DEFAULT_LAMBDA_GRID: [f64; 5] = [1e-10, 1e-8, 1e-6, 1e-4, 1e-2];
pub const DEFAULT_N_TEST: usize = 1000;
pub const DEFAULT_N_REPS: usize = 30;
pub const DEFAULT_CALIBRATION_LAMBDA: f64 = 1e-2;
pub const DEFAULT_FASHION_TEST_SIZE: usize = 2000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("{0}")]
    Parse(String),
    #[error("missing key `{0}`")]
    Missing(&'static str),
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key, reason: reason.into() }
}

/// Either a fixed value or a request to fit it against the empirical curve.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SigmaSetting {
    Fixed(f64),
    #[serde(deserialize_with = "calibrate_keyword")]
    Calibrate,
}

fn calibrate_keyword<'de, D: serde::Deserializer<'de>>(d: D) -> Result<(), D::Error> {
    let s = String::deserialize(d)?;
    if s == "calibrate" {
        Ok(())
    } else {
        Err(serde::de::Error::custom(format!("expected a number or \"calibrate\", got {s:?}")))
    }
}

impl fmt::Display for SigmaSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaSetting::Fixed(s) => write!(f, "{s}"),
            SigmaSetting::Calibrate => f.write_str("calibrate"),
        }
    }
}

/// Noise level fed to the theory when sigma is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TheoryNoise {
    /// The configured sigma as is.
    #[default]
    Config,
    /// `max(sigma^2, residual label power)`: label power the retained modes
    /// do not capture is treated as extra noise.
    AbsorbResidual,
}

impl TheoryNoise {
    pub fn name(self) -> &'static str {
        match self {
            TheoryNoise::Config => "config",
            TheoryNoise::AbsorbResidual => "absorb_residual",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelStrategy {
    /// Training kernels are submatrices of one precomputed pool Gram matrix.
    #[default]
    Pool,
    /// Every repetition draws and encodes a fresh training set.
    Independent,
}

impl KernelStrategy {
    pub fn name(self) -> &'static str {
        match self {
            KernelStrategy::Pool => "pool",
            KernelStrategy::Independent => "independent",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetConfig {
    Synthetic {
        /// Label noise of the generated data.
        noise_sigma: f64,
    },
    FashionMnist {
        images_path: PathBuf,
        labels_path: PathBuf,
        class_a: u8,
        class_b: u8,
        test_size: usize,
    },
}

/// File-level view of the config: every key optional, unknown keys rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub ansatz: Option<String>,
    pub n_qubits: Option<usize>,
    pub depth: Option<usize>,
    pub input_dim: Option<usize>,
    pub dataset: Option<String>,
    pub noise_sigma: Option<f64>,
    pub images_path: Option<PathBuf>,
    pub labels_path: Option<PathBuf>,
    pub class_a: Option<u8>,
    pub class_b: Option<u8>,
    pub test_size: Option<usize>,
    pub n_train_grid: Option<Vec<usize>>,
    pub lambda_grid: Option<Vec<f64>>,
    pub n_test: Option<usize>,
    pub n_reps: Option<usize>,
    pub n_est: Option<usize>,
    pub sigma: Option<SigmaSetting>,
    pub theory_noise: Option<TheoryNoise>,
    pub calibration_lambda: Option<f64>,
    pub base_seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub kernel_strategy: Option<KernelStrategy>,
    pub pool_size: Option<usize>,
}

impl RawConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub ansatz: AnsatzSpec,
    pub dataset: DatasetConfig,
    pub n_train_grid: Vec<usize>,
    pub lambda_grid: Vec<f64>,
    pub n_test: usize,
    pub n_reps: usize,
    pub n_est: usize,
    pub sigma: SigmaSetting,
    pub theory_noise: TheoryNoise,
    pub calibration_lambda: f64,
    pub base_seed: u64,
    pub output_dir: Option<PathBuf>,
    pub kernel_strategy: KernelStrategy,
    /// Pool size for [`KernelStrategy::Pool`].
    pub pool_size: usize,
}

/// Roughly 15 training sizes, geometric in `gamma = p / N` over `[0.25, 8]`,
/// with extra points near `gamma = 1`. Always contains `N = p`.
pub fn default_n_train_grid(p: usize) -> Vec<usize> {
    let mut gammas: Vec<f64> = (0..11).map(|i| 8f64 * 32f64.powf(-(i as f64) / 10.0)).collect();
    gammas.extend([1.5, 1.25, 1.1, 0.9, 0.8, 0.67]);
    let mut grid: Vec<usize> = gammas
        .iter()
        .map(|g| ((p as f64 / g).round() as usize).max(1))
        .chain(std::iter::once(p))
        .collect();
    grid.sort_unstable();
    grid.dedup();
    grid
}

fn default_n_est(n_qubits: usize, p: usize) -> usize {
    match n_qubits {
        0..=2 => 1000,
        3 => 3000,
        _ => 4000.max(2 * p).min(10_000),
    }
}

impl ExperimentConfig {
    /// Fills defaults and validates.
    pub fn resolve(raw: RawConfig) -> Result<Self, ConfigError> {
        let family: Family = raw
            .ansatz
            .as_deref()
            .ok_or(ConfigError::Missing("ansatz"))?
            .parse()
            .map_err(|e: QsimError| invalid("ansatz", e.to_string()))?;
        let n = raw.n_qubits.ok_or(ConfigError::Missing("n_qubits"))?;
        let ansatz = AnsatzSpec::with_shape(
            family,
            n,
            raw.depth.unwrap_or(n),
            raw.input_dim.unwrap_or(2 * n),
        )
        .map_err(|e| invalid("ansatz", e.to_string()))?;
        let p = ansatz.effective_dim();

        let sigma = raw.sigma.ok_or(ConfigError::Missing("sigma"))?;
        if let SigmaSetting::Fixed(s) = sigma {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(invalid("sigma", format!("{s} is not a non-negative number")));
            }
        }

        let dataset = match raw.dataset.as_deref().unwrap_or("synthetic") {
            "synthetic" => {
                let noise_sigma = match (raw.noise_sigma, sigma) {
                    (Some(s), _) => s,
                    (None, SigmaSetting::Fixed(s)) => s,
                    (None, SigmaSetting::Calibrate) => return Err(ConfigError::Missing("noise_sigma")),
                };
                if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
                    return Err(invalid("noise_sigma", format!("{noise_sigma} is not a non-negative number")));
                }
                DatasetConfig::Synthetic { noise_sigma }
            }
            "fashion_mnist" => {
                let class_a = raw.class_a.unwrap_or(0);
                let class_b = raw.class_b.unwrap_or(1);
                if class_a == class_b || class_a > 9 || class_b > 9 {
                    return Err(invalid("class_a/class_b", "need two distinct classes in 0..=9"));
                }
                DatasetConfig::FashionMnist {
                    images_path: raw.images_path.ok_or(ConfigError::Missing("images_path"))?,
                    labels_path: raw.labels_path.ok_or(ConfigError::Missing("labels_path"))?,
                    class_a,
                    class_b,
                    test_size: raw.test_size.unwrap_or(DEFAULT_FASHION_TEST_SIZE),
                }
            }
            other => return Err(invalid("dataset", format!("unknown dataset {other:?}"))),
        };

        let n_train_grid = raw.n_train_grid.unwrap_or_else(|| default_n_train_grid(p));
        if n_train_grid.is_empty() || n_train_grid.contains(&0) {
            return Err(invalid("n_train_grid", "must be non-empty with positive entries"));
        }
        let lambda_grid = raw.lambda_grid.unwrap_or_else(|| DEFAULT_LAMBDA_GRID.to_vec());
        if lambda_grid.is_empty() || lambda_grid.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(invalid("lambda_grid", "must be non-empty with positive finite entries"));
        }
        let n_test = raw.n_test.unwrap_or(DEFAULT_N_TEST);
        if n_test == 0 {
            return Err(invalid("n_test", "must be at least 1"));
        }
        let n_reps = raw.n_reps.unwrap_or(DEFAULT_N_REPS);
        if n_reps == 0 {
            return Err(invalid("n_reps", "must be at least 1"));
        }
        let n_est = raw.n_est.unwrap_or_else(|| default_n_est(n, p));
        if n_est < 2 {
            return Err(invalid("n_est", "must be at least 2"));
        }
        let calibration_lambda = raw.calibration_lambda.unwrap_or(DEFAULT_CALIBRATION_LAMBDA);
        if sigma == SigmaSetting::Calibrate && !lambda_grid.contains(&calibration_lambda) {
            return Err(invalid(
                "calibration_lambda",
                format!("{calibration_lambda:e} is not in lambda_grid"),
            ));
        }
        let max_n = *n_train_grid.iter().max().expect("non-empty");
        let pool_size = raw.pool_size.unwrap_or((4 * max_n).max(1000));
        if pool_size < max_n {
            return Err(invalid("pool_size", format!("{pool_size} is below the largest n_train {max_n}")));
        }

        Ok(ExperimentConfig {
            ansatz,
            dataset,
            n_train_grid,
            lambda_grid,
            n_test,
            n_reps,
            n_est,
            sigma,
            theory_noise: raw.theory_noise.unwrap_or_default(),
            calibration_lambda,
            base_seed: raw.base_seed.unwrap_or(0),
            output_dir: raw.output_dir,
            kernel_strategy: raw.kernel_strategy.unwrap_or_default(),
            pool_size,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Self::resolve(RawConfig::from_toml_str(text)?)
    }

    /// Key-value echo of the resolved config, one `key = value` per line.
    pub fn echo(&self) -> String {
        let list = |v: &[String]| format!("[{}]", v.join(", "));
        let mut lines = vec![
            format!("ansatz = {}", self.ansatz.family.name()),
            format!("n_qubits = {}", self.ansatz.n_qubits),
            format!("depth = {}", self.ansatz.depth),
            format!("input_dim = {}", self.ansatz.input_dim),
        ];
        match &self.dataset {
            DatasetConfig::Synthetic { noise_sigma } => {
                lines.push("dataset = synthetic".into());
                lines.push(format!("noise_sigma = {noise_sigma}"));
            }
            DatasetConfig::FashionMnist { images_path, labels_path, class_a, class_b, test_size } => {
                lines.push("dataset = fashion_mnist".into());
                lines.push(format!("images_path = {}", images_path.display()));
                lines.push(format!("labels_path = {}", labels_path.display()));
                lines.push(format!("class_a = {class_a}"));
                lines.push(format!("class_b = {class_b}"));
                lines.push(format!("test_size = {test_size}"));
            }
        }
        lines.extend([
            format!("n_train_grid = {}", list(&self.n_train_grid.iter().map(|n| n.to_string()).collect::<Vec<_>>())),
            format!("lambda_grid = {}", list(&self.lambda_grid.iter().map(|l| format!("{l:e}")).collect::<Vec<_>>())),
            format!("n_test = {}", self.n_test),
            format!("n_reps = {}", self.n_reps),
            format!("n_est = {}", self.n_est),
            format!("sigma = {}", self.sigma),
            format!("theory_noise = {}", self.theory_noise.name()),
            format!("calibration_lambda = {:e}", self.calibration_lambda),
            format!("base_seed = {}", self.base_seed),
            format!("kernel_strategy = {}", self.kernel_strategy.name()),
            format!("pool_size = {}", self.pool_size),
        ]);
        if let Some(dir) = &self.output_dir {
            lines.push(format!("output_dir = {}", dir.display()));
        }
        lines.join("\n")
    }
}
