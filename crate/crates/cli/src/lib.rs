//! Config-driven experiment runner for `veritas-core`.
//!
//! [`run`] validates a config, executes the named experiment, writes its data
//! files and `report.json` into the output directory, and returns the report.
//! Data files depend only on the config; `report.json` also carries the wall
//! time.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod report;

use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

pub use config::{Experiment, ExperimentConfig, Violation};
pub use report::{FileEntry, PerformanceTrace, RunReport};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid config:\n{}", .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Validation(Vec<Violation>),
    #[error("{0}")]
    Model(String),
    #[error("{}: {1}", .0.display())]
    Io(PathBuf, #[source] io::Error),
}

impl RunError {
    /// Process exit code: 2 for validation failures, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 2,
            _ => 3,
        }
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(PathBuf::new(), e)
    }
}

pub fn default_output_dir(experiment: Experiment) -> PathBuf {
    Path::new("veritas-out").join(experiment.name())
}

/// Validates and runs `config`.
pub fn run(config: &ExperimentConfig) -> Result<RunReport, RunError> {
    let violations = config.validate();
    if !violations.is_empty() {
        return Err(RunError::Validation(violations));
    }
    let start = Instant::now();
    let resolved = config.resolved();
    let dir = resolved
        .output_dir
        .clone()
        .unwrap_or_else(|| default_output_dir(resolved.experiment));
    let mut out = report::OutputDir::create(&dir).map_err(|e| RunError::Io(dir.clone(), e))?;
    let outcome = experiments::dispatch(&resolved, &mut out).map_err(|e| match e {
        RunError::Io(p, err) if p.as_os_str().is_empty() => RunError::Io(dir.clone(), err),
        other => other,
    })?;
    let report = RunReport {
        config: resolved,
        verdicts: outcome.verdicts,
        statistics: outcome.statistics,
        performance_trace: outcome.performance_trace,
        files: out.into_files(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(dir.join("report.json"), json + "\n")
        .map_err(|e| RunError::Io(dir.join("report.json"), e))?;
    Ok(report)
}

/// Terminal styling, disabled by `VERITAS_NO_COLOR` or a non-terminal stdout.
#[derive(Debug, Clone, Copy)]
pub struct Style {
    pub color: bool,
}

impl Style {
    pub fn detect() -> Self {
        use std::io::IsTerminal;
        Self {
            color: std::env::var_os("VERITAS_NO_COLOR").is_none() && io::stdout().is_terminal(),
        }
    }

    pub fn bold(&self, s: &str) -> String {
        self.paint("1", s)
    }

    pub fn dim(&self, s: &str) -> String {
        self.paint("2", s)
    }

    fn paint(&self, code: &str, s: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{s}\x1b[0m")
        } else {
            s.to_owned()
        }
    }
}

fn short(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Object(_) => "{...}".into(),
        other => other.to_string(),
    }
}

/// A one-page summary of a report.
pub fn summary(report: &RunReport, dir: &Path, style: Style) -> String {
    let mut s = String::new();
    s += &format!(
        "{} {} (seed {})\n",
        style.bold("experiment"),
        report.config.experiment,
        report.config.seed.unwrap_or_default()
    );
    s += &format!("{}\n", style.bold("verdicts"));
    for (k, v) in &report.verdicts {
        s += &format!("  {k:<34} {}\n", short(v));
    }
    s += &format!("{}\n", style.bold("statistics"));
    for (k, v) in &report.statistics {
        s += &format!("  {k:<34} {}\n", short(v));
    }
    let trace = &report.performance_trace;
    s += &format!(
        "{} {} vs {}\n",
        style.bold("performance"),
        trace.metric,
        trace.experience
    );
    if let (Some(first), Some(last)) = (trace.points.first(), trace.points.last()) {
        s += &format!(
            "  {} = {}  ...  {} = {}\n",
            first.0, first.1, last.0, last.1
        );
    }
    s += &format!("{} {}\n", style.bold("files"), dir.display());
    for f in &report.files {
        s += &format!(
            "  {:<14} {:>10} B  {}\n",
            f.name,
            f.bytes,
            style.dim(&f.sha256[..16])
        );
    }
    s += &format!(
        "  report.json\n{} {:.3} s\n",
        style.bold("wall time"),
        report.wall_time_seconds
    );
    s
}
