//! Machine forecasters.
//!
//! A forecaster sees only the outcome prefix `outcomes[..t]` when it forecasts
//! step `t`; [`forecast_outcomes`] takes nothing else, so hidden truths
//! cannot leak into it. The one exception is [`ForecasterSpec::TruthOracle`],
//! which copies the generator's truth. It stands for a population that is
//! directly observable, and it has to be asked for by name.

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prob::{check_probability, ProbError};
use crate::processes::Path;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForecastError {
    #[error(transparent)]
    Probability(#[from] ProbError),
    #[error("the truth oracle needs the generator's path, not just outcomes")]
    OracleRequiresTruth,
    #[error("cannot forecast an empty path")]
    EmptyPath,
}

pub const DEFAULT_PRIOR: f64 = 0.5;

fn default_prior() -> f64 {
    DEFAULT_PRIOR
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForecasterSpec {
    /// Always `alpha`.
    Constant { alpha: f64 },
    /// `prior_forecast` at `t = 0`, then the running mean of past outcomes.
    EmpiricalFrequency {
        #[serde(default = "default_prior")]
        prior_forecast: f64,
    },
    /// Reads the true probability off the path.
    TruthOracle,
    /// Always `alpha`; right only while the regime happens to match.
    BrokenClockReader { alpha: f64 },
}

impl ForecasterSpec {
    pub fn validate(&self) -> Result<(), ForecastError> {
        match *self {
            ForecasterSpec::Constant { alpha } | ForecasterSpec::BrokenClockReader { alpha } => {
                check_probability(alpha)?;
            }
            ForecasterSpec::EmpiricalFrequency { prior_forecast } => {
                check_probability(prior_forecast)?;
            }
            ForecasterSpec::TruthOracle => {}
        }
        Ok(())
    }

    pub fn requires_oracle(&self) -> bool {
        matches!(self, ForecasterSpec::TruthOracle)
    }
}

/// One step of a forecaster run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    pub t: usize,
    pub forecast: f64,
    pub outcome: bool,
    pub truth: f64,
}

/// Forecasts for every step from the observable outcomes alone.
pub fn forecast_outcomes(
    spec: &ForecasterSpec,
    outcomes: &[bool],
) -> Result<Vec<f64>, ForecastError> {
    spec.validate()?;
    let n = outcomes.len();
    Ok(match *spec {
        ForecasterSpec::Constant { alpha } | ForecasterSpec::BrokenClockReader { alpha } => {
            vec![alpha; n]
        }
        ForecasterSpec::EmpiricalFrequency { prior_forecast } => {
            let mut out = Vec::with_capacity(n);
            let mut ones = 0u64;
            for (t, &o) in outcomes.iter().enumerate() {
                out.push(if t == 0 {
                    prior_forecast
                } else {
                    ones as f64 / t as f64
                });
                ones += u64::from(o);
            }
            out
        }
        ForecasterSpec::TruthOracle => return Err(ForecastError::OracleRequiresTruth),
    })
}

/// Runs a forecaster over a path, pairing each forecast with the outcome and
/// the hidden truth for later scoring.
pub fn run_forecaster(
    spec: &ForecasterSpec,
    path: &Path,
) -> Result<Vec<ForecastRecord>, ForecastError> {
    if path.is_empty() {
        return Err(ForecastError::EmptyPath);
    }
    let forecasts = if spec.requires_oracle() {
        path.truths()
    } else {
        forecast_outcomes(spec, &path.outcomes())?
    };
    Ok(path
        .steps
        .iter()
        .zip(forecasts)
        .map(|(s, forecast)| ForecastRecord {
            t: s.t,
            forecast,
            outcome: s.outcome,
            truth: s.truth,
        })
        .collect())
}

/// Writes `t,forecast,outcome,truth`.
pub fn write_records_csv<W: io::Write>(records: &[ForecastRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "forecast", "outcome", "truth"])?;
    for r in records {
        w.write_record([
            r.t.to_string(),
            r.forecast.to_string(),
            u8::from(r.outcome).to_string(),
            r.truth.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
