use std::path::Path;
use std::process::{Command, Output};

fn qkrr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkrr")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
}

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(
        &path,
        format!(
            "ansatz = \"tpa\"\nn_qubits = 2\nsigma = 0.3\nn_train_grid = [4, 9, 18]\n\
             lambda_grid = [1e-8, 1e-2]\nn_reps = 4\nn_est = 300\nn_test = 200\n{extra}"
        ),
    )
    .unwrap();
    path.display().to_string()
}

#[test]
fn rank_probe_tpa_two_qubits() {
    let o = qkrr(&["rank-probe", "--ansatz", "tpa", "--qubits", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(value(&text, "rank"), "9");
    assert_eq!(value(&text, "p_effective"), "9");
    let o = qkrr(&["rank-probe", "--ansatz", "hea", "--qubits", "2"]);
    assert_eq!(value(&stdout(&o), "rank"), "16");
}

#[test]
fn run_theory_calibrate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("out");
    let o = qkrr(&["run", "--config", &cfg, "--output-dir", out.to_str().unwrap(), "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(value(&stdout(&o), "rows"), "6");
    for f in ["sweep.csv", "estimate.csv", "manifest.txt"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("base_seed = 3"));

    let spectrum = out.join("estimate.csv");
    let o = qkrr(&["theory", "--spectrum", spectrum.to_str().unwrap(), "--lambda", "1e-2", "--ntrain", "9", "--sigma", "0.3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(value(&text, "retained_modes"), "9");
    let total: f64 = value(&text, "de_total").parse().unwrap();
    let bias: f64 = value(&text, "de_bias").parse().unwrap();
    let var: f64 = value(&text, "de_variance").parse().unwrap();
    assert!((total - bias - var - 0.09).abs() < 1e-12);
    // matches the sweep's own theory column
    let sweep = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let row = sweep.lines().find(|l| l.starts_with("tpa,2,9,9,1.0,0.01,")).unwrap();
    assert_eq!(row.split(',').nth(11).unwrap().parse::<f64>().unwrap(), total);

    let o = qkrr(&[
        "calibrate",
        "--spectrum",
        spectrum.to_str().unwrap(),
        "--sweep",
        out.join("sweep.csv").to_str().unwrap(),
        "--lambda",
        "1e-2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sigma: f64 = value(&stdout(&o), "sigma").parse().unwrap();
    assert!(sigma > 0.3, "misspecified target calibrates above the label noise: {sigma}");
}

#[test]
fn failures_exit_nonzero_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["run".into(), "--config".into(), "/nonexistent/run.toml".into()],
        vec!["run".into(), "--config".into(), write_config(dir.path(), "bogus_key = 1\n")],
        vec!["theory".into(), "--spectrum".into(), "/nonexistent.csv".into(), "--lambda".into(), "1e-2".into(), "--ntrain".into(), "4".into()],
        vec!["rank-probe".into(), "--ansatz".into(), "tpa".into(), "--qubits".into(), "9".into()],
    ];
    for args in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = qkrr(&args);
        assert!(!o.status.success(), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error: "));
    }
}

#[test]
fn calibrate_without_reference_rows_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("o");
    assert!(qkrr(&["run", "--config", &cfg, "--output-dir", out.to_str().unwrap()]).status.success());
    let o = qkrr(&[
        "calibrate",
        "--spectrum",
        out.join("estimate.csv").to_str().unwrap(),
        "--sweep",
        out.join("sweep.csv").to_str().unwrap(),
        "--lambda",
        "0.5",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no rows with lambda"));
}
