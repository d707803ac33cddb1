use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use qkrr_core::estimate::{read_estimate_csv, THEORY_CUTOFF};
use qkrr_core::harness::{
    calibrate_sigma, read_sweep_csv, run_experiment, theory_row, EmpiricalPoint, ExperimentConfig,
    RawConfig, TheoryNoise, DEFAULT_CALIBRATION_LAMBDA,
};
use qkrr_core::qsim::{effective_rank_probe, AnsatzSpec, Family};
use qkrr_core::rmt::Spectrum;

const DEFAULT_OUTPUT_DIR: &str = "qkrr-out";

#[derive(Parser)]
#[command(name = "qkrr", version, about = "Quantum kernel ridge regression: sweeps, theory curves and probes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an (N_tr, lambda) sweep and write sweep.csv, estimate.csv and manifest.txt.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config file.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Overrides `base_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `n_reps`.
        #[arg(long)]
        n_reps: Option<usize>,
        /// Overrides `n_est`.
        #[arg(long)]
        n_est: Option<usize>,
        /// Overrides `theory_noise` (config or absorb_residual).
        #[arg(long)]
        theory_noise: Option<String>,
    },
    /// Numerical rank of the Pauli second-moment matrix of an ansatz.
    RankProbe {
        #[arg(long)]
        ansatz: Family,
        #[arg(long)]
        qubits: usize,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        rel_tol: f64,
    },
    /// Deterministic-equivalent risk for an estimated spectrum (estimate.csv).
    Theory {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        ntrain: usize,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
    },
    /// Fit sigma so the theory matches a sweep's empirical means at one lambda.
    Calibrate {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CALIBRATION_LAMBDA)]
        lambda: f64,
        /// Upper end of the search; defaults to the root mean square label.
        #[arg(long)]
        max_sigma: Option<f64>,
    },
}

fn open(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("cannot open {}", path.display()))
}

/// Reads `estimate.csv` and drops modes at or below the theory cutoff.
fn load_spectrum(path: &Path) -> Result<(Spectrum<f64>, Vec<f64>, f64)> {
    let (eigenvalues, beta) =
        read_estimate_csv(open(path)?).with_context(|| format!("reading {}", path.display()))?;
    let top = eigenvalues.iter().cloned().fold(0.0, f64::max);
    let (kept, kept_beta): (Vec<f64>, Vec<f64>) = eigenvalues
        .iter()
        .zip(&beta)
        .filter(|(&e, _)| e > THEORY_CUTOFF * top)
        .map(|(&e, &b)| (e, b))
        .unzip();
    let spectrum = Spectrum::new(kept).with_context(|| format!("spectrum in {}", path.display()))?;
    let label_rms = beta.iter().map(|b| b * b).sum::<f64>().sqrt();
    Ok((spectrum, kept_beta, label_rms))
}

fn run(
    config: &Path,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
    n_reps: Option<usize>,
    n_est: Option<usize>,
    theory_noise: Option<String>,
) -> Result<()> {
    let mut raw = RawConfig::from_file(config)?;
    raw.output_dir = output_dir.or(raw.output_dir).or_else(|| Some(DEFAULT_OUTPUT_DIR.into()));
    raw.base_seed = seed.or(raw.base_seed);
    raw.n_reps = n_reps.or(raw.n_reps);
    raw.n_est = n_est.or(raw.n_est);
    if let Some(mode) = theory_noise {
        raw.theory_noise = Some(match mode.as_str() {
            "config" => TheoryNoise::Config,
            "absorb_residual" => TheoryNoise::AbsorbResidual,
            other => bail!("unknown theory noise mode `{other}` (expected config or absorb_residual)"),
        });
    }
    let cfg = ExperimentConfig::resolve(raw)?;
    let out = run_experiment(&cfg)?;
    let dir = cfg.output_dir.as_deref().expect("output dir set above");
    println!("rows = {}", out.rows.len());
    println!("retained_modes = {}", out.retained);
    println!("theory_sigma = {}", out.theory_sigma);
    if let Some(s) = out.calibrated_sigma {
        println!("calibrated_sigma = {s}");
    }
    println!("output_dir = {}", dir.display());
    Ok(())
}

fn rank_probe(family: Family, qubits: usize, samples: usize, seed: u64, rel_tol: f64) -> Result<()> {
    if samples == 0 {
        bail!("--samples must be positive");
    }
    let ansatz = AnsatzSpec::new(family, qubits)?;
    let rank = effective_rank_probe::<f64>(&ansatz, samples, seed, rel_tol)?;
    println!("ansatz = {family}");
    println!("n_qubits = {qubits}");
    println!("rank = {rank}");
    println!("p_effective = {}", ansatz.effective_dim());
    Ok(())
}

fn theory(spectrum: &Path, lambda: f64, ntrain: usize, sigma: f64) -> Result<()> {
    let (spec, beta, _) = load_spectrum(spectrum)?;
    let (bias, variance, total, kappa, eta, singular) = theory_row(&spec, &beta, ntrain, lambda, sigma)?;
    println!("n_train = {ntrain}");
    println!("lambda = {lambda}");
    println!("sigma = {sigma}");
    println!("retained_modes = {}", spec.len());
    println!("kappa = {kappa}");
    println!("eta = {eta}");
    println!("de_bias = {bias}");
    println!("de_variance = {variance}");
    println!("de_total = {total}");
    println!("singular = {singular}");
    Ok(())
}

fn calibrate(spectrum: &Path, sweep: &Path, lambda: f64, max_sigma: Option<f64>) -> Result<()> {
    let (spec, beta, label_rms) = load_spectrum(spectrum)?;
    let rows = read_sweep_csv(open(sweep)?).with_context(|| format!("reading {}", sweep.display()))?;
    let points: Vec<EmpiricalPoint> = rows
        .iter()
        .filter(|r| r.lambda == lambda)
        .map(|r| EmpiricalPoint { n_train: r.n_train, emp_mean: r.emp_mean })
        .collect();
    if points.is_empty() {
        bail!("no rows with lambda = {lambda:e} in {}", sweep.display());
    }
    let sigma = calibrate_sigma(&spec, &beta, &points, lambda, max_sigma.unwrap_or(label_rms))?;
    println!("reference_lambda = {lambda}");
    println!("points = {}", points.len());
    println!("sigma = {sigma}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, output_dir, seed, n_reps, n_est, theory_noise } => {
            run(&config, output_dir, seed, n_reps, n_est, theory_noise)
        }
        Command::RankProbe { ansatz, qubits, samples, seed, rel_tol } => {
            rank_probe(ansatz, qubits, samples, seed, rel_tol)
        }
        Command::Theory { spectrum, lambda, ntrain, sigma } => theory(&spectrum, lambda, ntrain, sigma),
        Command::Calibrate { spectrum, sweep, lambda, max_sigma } => {
            calibrate(&spectrum, &sweep, lambda, max_sigma)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
