use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::HarnessError;

pub const SWEEP_HEADER: [&str; 15] = [
    "ansatz",
    "n_qubits",
    "p_effective",
    "n_train",
    "gamma",
    "lambda",
    "n_reps",
    "emp_mean",
    "emp_std",
    "de_bias",
    "de_variance",
    "de_total",
    "kappa",
    "eta",
    "singular",
];

/// One `(N_tr, lambda)` cell: empirical statistics next to the theory.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub ansatz: String,
    pub n_qubits: usize,
    pub p_effective: usize,
    pub n_train: usize,
    /// `p_effective / n_train`.
    pub gamma: f64,
    pub lambda: f64,
    pub n_reps: usize,
    pub emp_mean: f64,
    pub emp_std: f64,
    pub de_bias: f64,
    pub de_variance: f64,
    pub de_total: f64,
    pub kappa: f64,
    pub eta: f64,
    /// The theory diverges in this cell; the `de_*` columns hold `inf`.
    pub singular: bool,
}

/// Shortest decimal that parses back to `v`, exponent form for tiny or huge values.
fn num(v: f64) -> String {
    format!("{v:?}")
}

impl SweepRow {
    fn record(&self) -> Vec<String> {
        let de = |v: f64| if self.singular { "inf".to_string() } else { num(v) };
        vec![
            self.ansatz.clone(),
            self.n_qubits.to_string(),
            self.p_effective.to_string(),
            self.n_train.to_string(),
            num(self.gamma),
            num(self.lambda),
            self.n_reps.to_string(),
            num(self.emp_mean),
            num(self.emp_std),
            de(self.de_bias),
            de(self.de_variance),
            de(self.de_total),
            num(self.kappa),
            num(self.eta),
            self.singular.to_string(),
        ]
    }
}

fn csv_err(path: &str) -> impl Fn(csv::Error) -> HarnessError + '_ {
    move |e| HarnessError::Io { path: path.to_string(), message: e.to_string() }
}

/// Writes the header and one line per row; floats use the shortest
/// representation that parses back to the same value.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), HarnessError> {
    let err = csv_err("<sweep>");
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER).map_err(&err)?;
    for row in rows {
        w.write_record(row.record()).map_err(&err)?;
    }
    w.flush().map_err(|e| HarnessError::Io { path: "<sweep>".into(), message: e.to_string() })
}

pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    write_sweep_csv(rows, file)
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>, HarnessError> {
    let err = csv_err("<sweep>");
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(&err)?.clone();
    if header.iter().ne(SWEEP_HEADER.iter().copied()) {
        return Err(HarnessError::Io {
            path: "<sweep>".into(),
            message: format!("unexpected header {:?}", header),
        });
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(&err)?;
        let bad = |col: &str| HarnessError::Io {
            path: "<sweep>".into(),
            message: format!("data row {}: cannot parse `{col}`", line + 1),
        };
        let f = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(SWEEP_HEADER[i]));
        let u = |i: usize| rec[i].parse::<usize>().map_err(|_| bad(SWEEP_HEADER[i]));
        rows.push(SweepRow {
            ansatz: rec[0].to_string(),
            n_qubits: u(1)?,
            p_effective: u(2)?,
            n_train: u(3)?,
            gamma: f(4)?,
            lambda: f(5)?,
            n_reps: u(6)?,
            emp_mean: f(7)?,
            emp_std: f(8)?,
            de_bias: f(9)?,
            de_variance: f(10)?,
            de_total: f(11)?,
            kappa: f(12)?,
            eta: f(13)?,
            singular: rec[14].parse::<bool>().map_err(|_| bad("singular"))?,
        });
    }
    Ok(rows)
}
