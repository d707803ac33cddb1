use std::collections::HashSet;
use std::fs::{self, File};
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rayon::prelude::*;

use super::calibrate::{calibrate_sigma, EmpiricalPoint};
use super::config::{DatasetConfig, ExperimentConfig, KernelStrategy, SigmaSetting, TheoryNoise};
use super::manifest::RunManifest;
use super::sweep::{emit_csv, SweepRow};
use super::HarnessError;
use crate::data::{gen_synthetic, load_idx, make_fashion_binary, sample_theta_star, Dataset};
use crate::estimate::{estimate_population, write_estimate_csv, THEORY_CUTOFF};
use crate::krr::{fit_dual, mse, predict};
use crate::qsim::{cross_from_states, encode_rows, gram_from_states, StateVector};
use crate::rmt::{de_risk, RmtError, Spectrum, TheoryParams};
use crate::rng::{derive_seed, seeded};

const TAG_THETA: u64 = 1;
const TAG_EST: u64 = 2;
const TAG_TEST: u64 = 3;
const TAG_POOL: u64 = 4;
const TAG_CELL: u64 = 5;
const TAG_SPLIT: u64 = 6;

/// Seed of the training draw for one `(N_tr, lambda index, rep)` cell.
pub fn rep_seed(base: u64, n_train: usize, lambda_index: usize, rep: usize) -> u64 {
    derive_seed(base, &[TAG_CELL, n_train as u64, lambda_index as u64, rep as u64])
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<SweepRow>,
    pub manifest: RunManifest,
    /// Full estimated spectrum and projected labels, before truncation.
    pub eigenvalues: Vec<f64>,
    pub beta_est: Vec<f64>,
    /// Number of modes kept for the theory.
    pub retained: usize,
    /// Noise level used for the `de_*` columns.
    pub theory_sigma: f64,
    pub calibrated_sigma: Option<f64>,
    pub residual_label_power: f64,
}

struct TheoryCell {
    de_bias: f64,
    de_variance: f64,
    de_total: f64,
    kappa: f64,
    eta: f64,
    singular: bool,
}

/// Theory columns for one cell; a singular cell keeps its `kappa` and `eta`
/// and reports infinite risk.
fn theory_cell(
    spectrum: &Spectrum<f64>,
    beta: &[f64],
    n_train: usize,
    lambda: f64,
    sigma: f64,
) -> Result<TheoryCell, RmtError> {
    let params = TheoryParams { n_train, lambda, sigma, beta_star: beta.to_vec() };
    match de_risk(spectrum, &params) {
        Ok(r) => Ok(TheoryCell {
            de_bias: r.de_bias,
            de_variance: r.de_variance,
            de_total: r.de_total,
            kappa: r.kappa,
            eta: r.eta,
            singular: false,
        }),
        Err(RmtError::Singular { kappa, eta }) => Ok(TheoryCell {
            de_bias: f64::INFINITY,
            de_variance: f64::INFINITY,
            de_total: f64::INFINITY,
            kappa,
            eta,
            singular: true,
        }),
        Err(e) => Err(e),
    }
}

/// `(de_bias, de_variance, de_total, kappa, eta, singular)` for one cell.
pub fn theory_row(
    spectrum: &Spectrum<f64>,
    beta: &[f64],
    n_train: usize,
    lambda: f64,
    sigma: f64,
) -> Result<(f64, f64, f64, f64, f64, bool), RmtError> {
    let c = theory_cell(spectrum, beta, n_train, lambda, sigma)?;
    Ok((c.de_bias, c.de_variance, c.de_total, c.kappa, c.eta, c.singular))
}

enum Sampler {
    Synthetic { d: usize, theta: Vec<f64>, noise_sigma: f64 },
    Pool(Dataset),
}

impl Sampler {
    fn draw(&self, n: usize, seed: u64) -> Result<Dataset, HarnessError> {
        match self {
            Sampler::Synthetic { d, theta, noise_sigma } => Ok(gen_synthetic(*d, n, *noise_sigma, theta, seed)),
            Sampler::Pool(pool) => {
                if n > pool.len() {
                    return Err(crate::data::DataError::NotEnoughSamples { needed: n, available: pool.len() }.into());
                }
                let idx = sample(&mut seeded(seed), pool.len(), n).into_vec();
                Ok(pool.select(&idx))
            }
        }
    }
}

struct CellResult {
    mse: f64,
    flagged: bool,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

fn io_err(path: &Path, e: impl ToString) -> HarnessError {
    HarnessError::Io { path: path.display().to_string(), message: e.to_string() }
}

/// Runs the full `(N_tr, lambda)` sweep described by `config`.
///
/// Phases: estimation set and spectral estimate, a fixed test set, the
/// training cells (in parallel), aggregation, optional sigma calibration,
/// theory columns, and, when `output_dir` is set, `sweep.csv`,
/// `estimate.csv` and `manifest.txt`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    let base = config.base_seed;
    let ansatz = &config.ansatz;
    let mut manifest = RunManifest {
        config_echo: config.echo(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        ..Default::default()
    };
    let mut clock = Instant::now();
    let mut lap = |name: &str, manifest: &mut RunManifest| {
        manifest.phases.push((name.to_string(), clock.elapsed()));
        clock = Instant::now();
    };

    // data sources
    let (sampler, test_set) = match &config.dataset {
        DatasetConfig::Synthetic { noise_sigma } => {
            let seed = derive_seed(base, &[TAG_THETA]);
            manifest.seeds.push(("theta_star".into(), seed));
            let d = ansatz.input_dim;
            let sampler = Sampler::Synthetic { d, theta: sample_theta_star(d, seed), noise_sigma: *noise_sigma };
            let test_seed = derive_seed(base, &[TAG_TEST]);
            manifest.seeds.push(("test_set".into(), test_seed));
            let test = sampler.draw(config.n_test, test_seed)?;
            manifest.facts.push(("training_draws".into(), "fresh i.i.d. samples per cell".into()));
            (sampler, test)
        }
        DatasetConfig::FashionMnist { images_path, labels_path, class_a, class_b, test_size } => {
            let (images, labels) = load_idx(images_path, labels_path)?;
            let split_seed = derive_seed(base, &[TAG_SPLIT]);
            manifest.seeds.push(("split".into(), split_seed));
            let split = make_fashion_binary(
                &images,
                &labels,
                *class_a,
                *class_b,
                ansatz.input_dim,
                split_seed,
                (*test_size).max(config.n_test),
            )?;
            manifest.facts.push(("pca_fit".into(), "training pool only".into()));
            manifest.facts.push(("train_pool_size".into(), split.train_pool.len().to_string()));
            manifest.facts.push((
                "training_draws".into(),
                "subsets of the training pool, without replacement within a draw, independent across cells".into(),
            ));
            let first: Vec<usize> = (0..config.n_test).collect();
            let test = split.test_pool.select(&first);
            (Sampler::Pool(split.train_pool), test)
        }
    };
    manifest.facts.push(("test_set".into(), format!("one fixed set of {} points shared by all cells", test_set.len())));
    lap("data", &mut manifest);

    // spectral estimate
    let est_seed = derive_seed(base, &[TAG_EST]);
    manifest.seeds.push(("estimation_set".into(), est_seed));
    let est_set = sampler.draw(config.n_est, est_seed)?;
    let est_states = encode_rows(ansatz, &est_set.inputs)?;
    let k_est = gram_from_states(&est_states);
    drop(est_states);
    let estimate = estimate_population(&k_est, &est_set.labels)?;
    drop(k_est);
    let (spectrum, beta) = estimate.truncated(THEORY_CUTOFF)?;
    let residual = estimate.residual_label_power(&est_set.labels, THEORY_CUTOFF);
    manifest.facts.push(("retained_modes".into(), format!("{} of {}", spectrum.len(), estimate.n_est)));
    manifest.facts.push(("residual_label_power".into(), residual.to_string()));
    lap("estimate", &mut manifest);

    // training cells
    let test_states = encode_rows(ansatz, &test_set.inputs)?;
    let pool = match config.kernel_strategy {
        KernelStrategy::Pool => {
            let seed = derive_seed(base, &[TAG_POOL]);
            manifest.seeds.push(("pool".into(), seed));
            let size = match &sampler {
                Sampler::Pool(p) => config.pool_size.min(p.len()),
                Sampler::Synthetic { .. } => config.pool_size,
            };
            let pool = sampler.draw(size, seed)?;
            let states = encode_rows(ansatz, &pool.inputs)?;
            let gram = gram_from_states(&states);
            let cross = cross_from_states(&test_states, &states);
            manifest.facts.push(("pool_size".into(), size.to_string()));
            manifest.facts.push(("pool_draws".into(), "training sets subsampled from the pool without replacement".into()));
            Some((pool, gram, cross))
        }
        KernelStrategy::Independent => None,
    };
    manifest.facts.push(("kernel_strategy".into(), config.kernel_strategy.name().into()));

    let mut cells = Vec::new();
    for &n in &config.n_train_grid {
        for li in 0..config.lambda_grid.len() {
            for rep in 0..config.n_reps {
                cells.push((n, li, rep, rep_seed(base, n, li, rep)));
            }
        }
    }
    let mut seen = HashSet::with_capacity(cells.len());
    for c in &cells {
        if !seen.insert(c.3) {
            return Err(HarnessError::SeedCollision(c.3));
        }
    }
    manifest.cell_seeds = cells.clone();

    let results: Vec<CellResult> = cells
        .par_iter()
        .map(|&(n, li, rep, seed)| {
            let lambda = config.lambda_grid[li];
            let (k, cross, y) = match &pool {
                Some((pool, gram, cross)) => {
                    if n > pool.len() {
                        return Err(crate::data::DataError::NotEnoughSamples { needed: n, available: pool.len() }.into());
                    }
                    let idx = sample(&mut seeded(seed), pool.len(), n).into_vec();
                    let k = DMatrix::from_fn(n, n, |i, j| gram[(idx[i], idx[j])]);
                    let c = DMatrix::from_fn(cross.nrows(), n, |i, j| cross[(i, idx[j])]);
                    (k, c, idx.iter().map(|&i| pool.labels[i]).collect::<Vec<_>>())
                }
                None => {
                    let train = sampler.draw(n, seed)?;
                    let states: Vec<StateVector<f64>> = encode_rows(ansatz, &train.inputs)?;
                    (gram_from_states(&states), cross_from_states(&test_states, &states), train.labels)
                }
            };
            let cell_err = |source| HarnessError::Cell { n_train: n, lambda, rep, source };
            let (weights, report) = fit_dual(&k, &y, lambda).map_err(cell_err)?;
            let pred = predict(&weights, &cross).map_err(cell_err)?;
            let err = mse(&pred, &test_set.labels).map_err(cell_err)?;
            Ok(CellResult { mse: err, flagged: report.flagged })
        })
        .collect::<Result<_, HarnessError>>()?;
    let flagged = results.iter().filter(|r| r.flagged).count();
    manifest.facts.push(("flagged_fits".into(), flagged.to_string()));
    lap("training", &mut manifest);

    // aggregation, in grid order
    let mut empirical = Vec::new();
    for (ni, &n) in config.n_train_grid.iter().enumerate() {
        for li in 0..config.lambda_grid.len() {
            let start = (ni * config.lambda_grid.len() + li) * config.n_reps;
            let errs: Vec<f64> = results[start..start + config.n_reps].iter().map(|r| r.mse).collect();
            let (m, s) = mean_std(&errs);
            empirical.push((n, li, m, s));
        }
    }

    // theory noise
    let mut calibrated_sigma = None;
    let theory_sigma = match config.sigma {
        SigmaSetting::Fixed(s) => match config.theory_noise {
            TheoryNoise::Config => s,
            TheoryNoise::AbsorbResidual => (s * s).max(residual).sqrt(),
        },
        SigmaSetting::Calibrate => {
            let li = config
                .lambda_grid
                .iter()
                .position(|&l| l == config.calibration_lambda)
                .ok_or_else(|| HarnessError::Calibration("reference lambda not in the grid".into()))?;
            let points: Vec<EmpiricalPoint> = empirical
                .iter()
                .filter(|e| e.1 == li)
                .map(|e| EmpiricalPoint { n_train: e.0, emp_mean: e.2 })
                .collect();
            let s = calibrate_sigma(&spectrum, &beta, &points, config.calibration_lambda, est_set.label_std())?;
            calibrated_sigma = Some(s);
            manifest.facts.push(("calibrated_sigma".into(), s.to_string()));
            s
        }
    };
    manifest.facts.push(("theory_noise".into(), config.theory_noise.name().into()));
    manifest.facts.push(("theory_sigma".into(), theory_sigma.to_string()));

    let p = ansatz.effective_dim();
    let mut rows = Vec::with_capacity(empirical.len());
    for &(n, li, emp_mean, emp_std) in &empirical {
        let lambda = config.lambda_grid[li];
        let t = theory_cell(&spectrum, &beta, n, lambda, theory_sigma)?;
        rows.push(SweepRow {
            ansatz: ansatz.family.name().to_string(),
            n_qubits: ansatz.n_qubits,
            p_effective: p,
            n_train: n,
            gamma: p as f64 / n as f64,
            lambda,
            n_reps: config.n_reps,
            emp_mean,
            emp_std,
            de_bias: t.de_bias,
            de_variance: t.de_variance,
            de_total: t.de_total,
            kappa: t.kappa,
            eta: t.eta,
            singular: t.singular,
        });
    }
    lap("theory", &mut manifest);

    let out = RunOutput {
        rows,
        manifest,
        eigenvalues: estimate.eigenvalues,
        beta_est: estimate.beta_est,
        retained: spectrum.len(),
        theory_sigma,
        calibrated_sigma,
        residual_label_power: residual,
    };
    if let Some(dir) = &config.output_dir {
        write_outputs(&out, dir)?;
    }
    Ok(out)
}

/// Writes `sweep.csv`, `estimate.csv` and `manifest.txt` into `dir`.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    emit_csv(&out.rows, &dir.join("sweep.csv"))?;
    let est_path = dir.join("estimate.csv");
    let file = File::create(&est_path).map_err(|e| io_err(&est_path, e))?;
    write_estimate_csv(&out.eigenvalues, &out.beta_est, file).map_err(|e| io_err(&est_path, e))?;
    let man_path = dir.join("manifest.txt");
    fs::write(&man_path, out.manifest.render()).map_err(|e| io_err(&man_path, e))
}
