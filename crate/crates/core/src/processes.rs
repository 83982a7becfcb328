//! Generators of true processes with known conditional probabilities.
//!
//! Every process here has a deterministic truth schedule: the probability of
//! the event at step `t` is a function of `t` alone, and the outcome is one
//! Bernoulli draw at that probability. The stored truth therefore doubles as
//! the machine-invisible conditional probability given the history.

use std::fmt;
use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prob::{check_probability, ProbError, RngState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProcessError {
    #[error(transparent)]
    Probability(#[from] ProbError),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("step {t} outside horizon {horizon}")]
    StepOutOfRange { t: usize, horizon: usize },
    #[error("broken clock switch point {n} must be below horizon {horizon}")]
    SwitchBeyondHorizon { n: usize, horizon: usize },
    #[error("broken clock must change regime: pre and post are both {0}")]
    NoRegimeChange(f64),
}

/// How a two-regime process assigns its regimes over time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Even steps take the first regime, odd steps the second.
    #[default]
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessKind {
    Iid {
        alpha: f64,
    },
    RegimeSwitch {
        alpha: f64,
        beta: f64,
        #[serde(default)]
        schedule: Schedule,
    },
    /// Truth `pre` for `t < n`, `post` from `n` on.
    BrokenClock {
        pre: f64,
        n: usize,
        post: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    #[serde(flatten)]
    pub kind: ProcessKind,
    pub horizon: usize,
}

/// Which regime produced a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Iid,
    Alpha,
    Beta,
    Before,
    After,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Iid => "iid",
            Regime::Alpha => "alpha",
            Regime::Beta => "beta",
            Regime::Before => "before",
            Regime::After => "after",
        })
    }
}

impl ProcessSpec {
    pub fn new(kind: ProcessKind, horizon: usize) -> Result<Self, ProcessError> {
        let spec = Self { kind, horizon };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ProcessError> {
        if self.horizon == 0 {
            return Err(ProcessError::ZeroHorizon);
        }
        match self.kind {
            ProcessKind::Iid { alpha } => {
                check_probability(alpha)?;
            }
            ProcessKind::RegimeSwitch { alpha, beta, .. } => {
                check_probability(alpha)?;
                check_probability(beta)?;
            }
            ProcessKind::BrokenClock { pre, n, post } => {
                check_probability(pre)?;
                check_probability(post)?;
                if n >= self.horizon {
                    return Err(ProcessError::SwitchBeyondHorizon {
                        n,
                        horizon: self.horizon,
                    });
                }
                if pre == post {
                    return Err(ProcessError::NoRegimeChange(pre));
                }
            }
        }
        Ok(())
    }

    fn regime_at(&self, t: usize) -> (f64, Regime) {
        match self.kind {
            ProcessKind::Iid { alpha } => (alpha, Regime::Iid),
            ProcessKind::RegimeSwitch {
                alpha,
                beta,
                schedule: Schedule::Alternating,
            } => {
                if t.is_multiple_of(2) {
                    (alpha, Regime::Alpha)
                } else {
                    (beta, Regime::Beta)
                }
            }
            ProcessKind::BrokenClock { pre, n, post } => {
                if t < n {
                    (pre, Regime::Before)
                } else {
                    (post, Regime::After)
                }
            }
        }
    }
}

/// The true conditional probability of the event at step `t`.
pub fn truth_at(spec: &ProcessSpec, t: usize) -> Result<f64, ProcessError> {
    if t >= spec.horizon {
        return Err(ProcessError::StepOutOfRange {
            t,
            horizon: spec.horizon,
        });
    }
    Ok(spec.regime_at(t).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub t: usize,
    pub truth: f64,
    pub outcome: bool,
    pub regime: Option<Regime>,
}

/// A realized trajectory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Path {
    pub steps: Vec<Step>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The observable part of the path.
    pub fn outcomes(&self) -> Vec<bool> {
        self.steps.iter().map(|s| s.outcome).collect()
    }

    pub fn truths(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.truth).collect()
    }

    /// Writes `t,truth,outcome,regime`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "truth", "outcome", "regime"])?;
        for s in &self.steps {
            let regime = s.regime.map(|r| r.to_string()).unwrap_or_default();
            w.write_record([
                s.t.to_string(),
                s.truth.to_string(),
                u8::from(s.outcome).to_string(),
                regime,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Draws a path of length `spec.horizon`, consuming one uniform per step.
pub fn simulate(spec: &ProcessSpec, seed: RngState) -> Result<Path, ProcessError> {
    spec.validate()?;
    let mut rng = seed;
    let mut steps = Vec::with_capacity(spec.horizon);
    for t in 0..spec.horizon {
        let (truth, regime) = spec.regime_at(t);
        let outcome = rng.bernoulli(truth)?;
        steps.push(Step {
            t,
            truth,
            outcome,
            regime: Some(regime),
        });
    }
    Ok(Path { steps })
}

/// ORACLE. Marks the steps whose hidden truth equals `target` exactly.
///
/// This reads the generator's private schedule. It exists to show what a
/// selection rule needs to know, not to model anything a learner can do.
pub fn oracle_selection(path: &Path, target: f64) -> Vec<bool> {
    path.steps.iter().map(|s| s.truth == target).collect()
}
