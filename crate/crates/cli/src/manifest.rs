//! Run manifests: the reproducibility contract of every CSV the harness
//! writes.

/// Everything needed to reproduce a run bit for bit, plus the wall time for
/// operator logs.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    /// Ordered snapshot of the effective configuration.
    pub config: Vec<(String, String)>,
    pub base_seed: u64,
    pub repetitions: u64,
    pub version: String,
    /// Wall time in seconds; reported to stderr, never written into the
    /// CSV so identical configurations stay byte-identical.
    pub wall_secs: f64,
}

impl RunManifest {
    pub fn new(command: &str, base_seed: u64, repetitions: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            config: Vec::new(),
            base_seed,
            repetitions,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_secs: 0.0,
        }
    }

    pub fn with(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.config.push((key.to_string(), value.to_string()));
        self
    }

    /// The trailing `#` comment line carried by every CSV. Excludes wall
    /// time and thread count: only inputs that determine the output values.
    pub fn csv_comment(&self) -> String {
        let mut line = format!(
            "# manifest: command={} seed={} reps={} version={}",
            self.command, self.base_seed, self.repetitions, self.version
        );
        for (k, v) in &self.config {
            line.push_str(&format!(" {k}={v}"));
        }
        line.push('\n');
        line
    }

    /// One-line operator summary including wall time.
    pub fn log_line(&self) -> String {
        format!(
            "{}: {} repetitions, seed {}, {:.2}s",
            self.command, self.repetitions, self.base_seed, self.wall_secs
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comment_line_is_stable_and_excludes_wall_time() {
        let mut m = RunManifest::new("bias-table", 42, 1000).with("preset", "dgp4");
        m.wall_secs = 1.23;
        let a = m.csv_comment();
        m.wall_secs = 99.0;
        assert_eq!(a, m.csv_comment());
        assert!(a.starts_with("# manifest: command=bias-table seed=42 reps=1000"));
        assert!(a.contains("preset=dgp4"));
        assert!(!a.contains("1.23"));
    }
}
