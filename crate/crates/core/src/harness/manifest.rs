use std::fmt::Write as _;
use std::time::Duration;

/// Plain-text record of one run: the resolved config, the code version,
/// timings per phase, every seed and the modelling choices in effect.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunManifest {
    pub config_echo: String,
    pub version: String,
    pub phases: Vec<(String, Duration)>,
    /// Named seeds (theta, estimation set, test set, pool, split).
    pub seeds: Vec<(String, u64)>,
    /// `(n_train, lambda_index, rep, seed)` for every cell.
    pub cell_seeds: Vec<(usize, usize, usize, u64)>,
    /// Free-form `key = value` facts: strategy, noise level, flagged fits.
    pub facts: Vec<(String, String)>,
}

impl RunManifest {
    pub fn fact(&self, key: &str) -> Option<&str> {
        self.facts.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# qkrr run manifest");
        let _ = writeln!(out, "version = {}", self.version);
        let _ = writeln!(out, "\n[config]\n{}", self.config_echo);
        let _ = writeln!(out, "\n[choices]");
        for (k, v) in &self.facts {
            let _ = writeln!(out, "{k} = {v}");
        }
        let _ = writeln!(out, "\n[phases_seconds]");
        for (name, d) in &self.phases {
            let _ = writeln!(out, "{name} = {:.3}", d.as_secs_f64());
        }
        let _ = writeln!(out, "\n[seeds]");
        for (name, s) in &self.seeds {
            let _ = writeln!(out, "{name} = {s}");
        }
        let _ = writeln!(out, "\n[cell_seeds]\n# n_train lambda_index rep seed");
        for (n, l, r, s) in &self.cell_seeds {
            let _ = writeln!(out, "{n} {l} {r} {s}");
        }
        out
    }
}
