//! Experiment configuration: JSON with a versioned schema.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use veritas_core::equivalence::DistanceKind;
use veritas_core::forecasters::ForecasterSpec;
use veritas_core::processes::ProcessKind;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Thm3Calibration,
    #[serde(rename = "thm4_5_broken_clock")]
    Thm45BrokenClock,
    Thm6Regime,
    Thm7Equivalence,
    Thm8Mle,
    Thm9Ngram,
    Thm10Rstar,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Thm3Calibration,
        Experiment::Thm45BrokenClock,
        Experiment::Thm6Regime,
        Experiment::Thm7Equivalence,
        Experiment::Thm8Mle,
        Experiment::Thm9Ngram,
        Experiment::Thm10Rstar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Thm3Calibration => "thm3_calibration",
            Experiment::Thm45BrokenClock => "thm4_5_broken_clock",
            Experiment::Thm6Regime => "thm6_regime",
            Experiment::Thm7Equivalence => "thm7_equivalence",
            Experiment::Thm8Mle => "thm8_mle",
            Experiment::Thm9Ngram => "thm9_ngram",
            Experiment::Thm10Rstar => "thm10_rstar",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Test-set selection and verdict thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionConfig {
    /// Target probability of the test set; defaults from the forecaster or process.
    pub target_alpha: Option<f64>,
    /// Forecast-matching tolerance used for selection.
    pub tolerance: Option<f64>,
    /// Calibration and correctness threshold.
    pub epsilon: Option<f64>,
    pub window_fraction: Option<f64>,
    pub burn_in: Option<usize>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceConfig {
    pub max_support: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MleConfig {
    /// `(w, b)` of the data-generating logistic model.
    pub theta: Option<[f64; 2]>,
    pub x_range: Option<[f64; 2]>,
    pub step_size: Option<f64>,
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NgramConfig {
    /// Corpus file; the bundled toy corpus when absent.
    pub corpus: Option<PathBuf>,
    pub n_max: Option<usize>,
    /// A specific sentence to check in addition to the sampled ones.
    pub sentence: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceConfig {
    pub kind: Option<DistanceKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    /// Mandatory; there is no clock-derived default.
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    /// Sample or instance count, depending on the experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process: Option<ProcessKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forecaster: Option<ForecasterSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<CriterionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<EquivalenceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mle: Option<MleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ngram: Option<NgramConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<DistanceConfig>,
}

/// One failed check, located by a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl ExperimentConfig {
    /// A config with only the required fields; everything else defaults.
    pub fn new(experiment: Experiment, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment,
            seed: Some(seed),
            horizon: None,
            samples: None,
            output_dir: None,
            process: None,
            forecaster: None,
            criterion: None,
            equivalence: None,
            mle: None,
            ngram: None,
            distance: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Fills every optional setting the experiment uses with its default, so
    /// the echoed config fully describes the run.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        let e = c.experiment;
        let (horizon, process, forecaster) = match e {
            Experiment::Thm3Calibration => (
                50_000,
                Some(ProcessKind::Iid { alpha: 0.7 }),
                Some(ForecasterSpec::Constant { alpha: 0.7 }),
            ),
            Experiment::Thm45BrokenClock => (
                100_000,
                Some(ProcessKind::BrokenClock {
                    pre: 0.5,
                    n: 100,
                    post: 0.9,
                }),
                Some(ForecasterSpec::BrokenClockReader { alpha: 0.5 }),
            ),
            Experiment::Thm6Regime | Experiment::Thm10Rstar => (
                if e == Experiment::Thm6Regime {
                    200_000
                } else {
                    20_000
                },
                Some(ProcessKind::RegimeSwitch {
                    alpha: 0.2,
                    beta: 0.8,
                    schedule: Default::default(),
                }),
                Some(ForecasterSpec::EmpiricalFrequency {
                    prior_forecast: 0.5,
                }),
            ),
            _ => (0, None, None),
        };
        if process.is_some() {
            c.horizon.get_or_insert(horizon);
            c.process = c.process.or(process);
            c.forecaster = c.forecaster.or(forecaster);
            let target = default_target(c.process.as_ref(), c.forecaster.as_ref());
            let crit = c.criterion.get_or_insert_with(CriterionConfig::default);
            crit.target_alpha.get_or_insert(target);
            crit.tolerance.get_or_insert(1e-9);
            let eps = if e == Experiment::Thm3Calibration {
                0.01
            } else {
                0.05
            };
            crit.epsilon.get_or_insert(eps);
            crit.window_fraction.get_or_insert(0.5);
            crit.burn_in
                .get_or_insert(1_000.min(c.horizon.unwrap_or(1).saturating_sub(1)));
            crit.delta.get_or_insert(0.05);
        }
        match e {
            Experiment::Thm7Equivalence => {
                c.samples.get_or_insert(1_000);
                let eq = c.equivalence.get_or_insert_with(EquivalenceConfig::default);
                eq.max_support.get_or_insert(12);
            }
            Experiment::Thm8Mle => {
                c.samples.get_or_insert(5_000);
                let m = c.mle.get_or_insert_with(MleConfig::default);
                m.theta.get_or_insert([1.5, -0.7]);
                m.x_range.get_or_insert([-2.0, 2.0]);
                m.step_size.get_or_insert(2.0);
                m.iterations.get_or_insert(2_000);
            }
            Experiment::Thm9Ngram => {
                c.samples.get_or_insert(100);
                let n = c.ngram.get_or_insert_with(NgramConfig::default);
                n.n_max.get_or_insert(4);
            }
            Experiment::Thm10Rstar => {
                let d = c.distance.get_or_insert_with(DistanceConfig::default);
                d.kind.get_or_insert(DistanceKind::KullbackLeibler);
            }
            _ => {}
        }
        c
    }

    /// Every reason the config cannot run; empty when it can.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut push = |field: &str, message: String| {
            v.push(Violation {
                field: field.to_owned(),
                message,
            })
        };
        let prob = |x: f64| (0.0..=1.0).contains(&x);
        let out_of_range = |x: f64| format!("probability out of range: {x} is not in [0, 1]");

        if self.schema_version != SCHEMA_VERSION {
            push(
                "schema_version",
                format!(
                    "unsupported schema version {} (expected {SCHEMA_VERSION})",
                    self.schema_version
                ),
            );
        }
        if self.seed.is_none() {
            push(
                "seed",
                "missing seed; runs must be seeded explicitly".into(),
            );
        }
        if self.horizon == Some(0) {
            push("horizon", "horizon must be at least 1".into());
        }
        if self.samples == Some(0) {
            push("samples", "samples must be at least 1".into());
        }
        let c = self.resolved();
        let horizon = c.horizon.unwrap_or(0);

        if let Some(p) = &c.process {
            match *p {
                ProcessKind::Iid { alpha } => {
                    if !prob(alpha) {
                        push("process.alpha", out_of_range(alpha));
                    }
                }
                ProcessKind::RegimeSwitch { alpha, beta, .. } => {
                    if !prob(alpha) {
                        push("process.alpha", out_of_range(alpha));
                    }
                    if !prob(beta) {
                        push("process.beta", out_of_range(beta));
                    }
                }
                ProcessKind::BrokenClock { pre, n, post } => {
                    if !prob(pre) {
                        push("process.pre", out_of_range(pre));
                    }
                    if !prob(post) {
                        push("process.post", out_of_range(post));
                    }
                    if pre == post {
                        push("process.post", format!("post must differ from pre ({pre})"));
                    }
                    if horizon > 0 && n >= horizon {
                        push(
                            "process.n",
                            format!("switch step {n} must be below the horizon {horizon}"),
                        );
                    }
                }
            }
        }
        if let Some(f) = &c.forecaster {
            match *f {
                ForecasterSpec::Constant { alpha }
                | ForecasterSpec::BrokenClockReader { alpha }
                    if !prob(alpha) =>
                {
                    push("forecaster.alpha", out_of_range(alpha));
                }
                ForecasterSpec::EmpiricalFrequency { prior_forecast } if !prob(prior_forecast) => {
                    push("forecaster.prior_forecast", out_of_range(prior_forecast));
                }
                _ => {}
            }
        }
        if let Some(k) = &c.criterion {
            if let Some(a) = k.target_alpha.filter(|&a| !prob(a)) {
                push("criterion.target_alpha", out_of_range(a));
            }
            if let Some(t) = k.tolerance.filter(|&t| !(t >= 0.0)) {
                push(
                    "criterion.tolerance",
                    format!("tolerance {t} must be non-negative"),
                );
            }
            if let Some(e) = k.epsilon.filter(|&e| !(e > 0.0)) {
                push("criterion.epsilon", format!("epsilon {e} must be positive"));
            }
            if let Some(w) = k.window_fraction.filter(|&w| !(w > 0.0 && w < 1.0)) {
                push(
                    "criterion.window_fraction",
                    format!("window_fraction {w} must lie in (0, 1)"),
                );
            }
            if let Some(d) = k.delta.filter(|&d| !(d > 0.0 && d < 1.0)) {
                push("criterion.delta", format!("delta {d} must lie in (0, 1)"));
            }
            if let Some(b) = k.burn_in.filter(|&b| horizon > 0 && b >= horizon) {
                push(
                    "criterion.burn_in",
                    format!("burn_in {b} must be below the horizon {horizon}"),
                );
            }
        }
        if let Some(eq) = &c.equivalence {
            if let Some(m) = eq.max_support.filter(|&m| m < 1) {
                push(
                    "equivalence.max_support",
                    format!("max_support {m} must be at least 1"),
                );
            }
        }
        if let Some(m) = &c.mle {
            if let Some([lo, hi]) = m.x_range.filter(|[lo, hi]| !(lo < hi)) {
                push("mle.x_range", format!("empty range [{lo}, {hi}]"));
            }
            if let Some(s) = m.step_size.filter(|&s| !(s > 0.0 && s.is_finite())) {
                push("mle.step_size", format!("step size {s} must be positive"));
            }
            if m.theta.is_some_and(|t| !t.iter().all(|x| x.is_finite())) {
                push("mle.theta", "parameters must be finite".into());
            }
        }
        if let Some(n) = &c.ngram {
            if n.n_max == Some(0) {
                push("ngram.n_max", "n_max must be at least 1".into());
            }
        }
        v
    }
}

/// The probability a test set is expected to converge to.
fn default_target(process: Option<&ProcessKind>, forecaster: Option<&ForecasterSpec>) -> f64 {
    match forecaster {
        Some(ForecasterSpec::Constant { alpha })
        | Some(ForecasterSpec::BrokenClockReader { alpha }) => *alpha,
        _ => match process {
            Some(ProcessKind::Iid { alpha }) | Some(ProcessKind::RegimeSwitch { alpha, .. }) => {
                *alpha
            }
            Some(ProcessKind::BrokenClock { post, .. }) => *post,
            None => 0.5,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fields(c: &ExperimentConfig) -> Vec<String> {
        c.validate().into_iter().map(|v| v.field).collect()
    }

    #[test]
    fn defaults_validate() {
        for e in Experiment::ALL {
            assert_eq!(ExperimentConfig::new(e, 1).validate(), vec![], "{e}");
        }
    }

    #[test]
    fn probability_out_of_range() {
        let mut c = ExperimentConfig::new(Experiment::Thm3Calibration, 1);
        c.process = Some(ProcessKind::Iid { alpha: 1.2 });
        let v = c.validate();
        assert_eq!(v[0].field, "process.alpha");
        assert!(v[0].message.contains("probability out of range"));
    }

    #[test]
    fn missing_seed() {
        let c =
            ExperimentConfig::from_json(r#"{"schema_version": 1, "experiment": "thm6_regime"}"#)
                .unwrap();
        assert_eq!(fields(&c), vec!["seed"]);
    }

    #[test]
    fn switch_beyond_horizon() {
        let mut c = ExperimentConfig::new(Experiment::Thm45BrokenClock, 1);
        c.horizon = Some(100);
        c.criterion = Some(CriterionConfig {
            burn_in: Some(10),
            ..Default::default()
        });
        assert_eq!(fields(&c), vec!["process.n"]);
    }

    #[test]
    fn json_shape() {
        let text = r#"{
            "schema_version": 1,
            "experiment": "thm4_5_broken_clock",
            "seed": 3,
            "horizon": 500,
            "process": {"kind": "broken_clock", "pre": 0.5, "n": 10, "post": 0.9},
            "forecaster": {"kind": "broken_clock_reader", "alpha": 0.5},
            "criterion": {"epsilon": 0.05, "burn_in": 20, "delta": 0.05}
        }"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(c.experiment, Experiment::Thm45BrokenClock);
        assert_eq!(c.validate(), vec![]);
        let echoed = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json(&echoed).unwrap(), c);
        assert!(ExperimentConfig::from_json(
            r#"{"schema_version": 1, "experiment": "thm3_calibration", "sede": 1}"#
        )
        .is_err());
    }

    #[test]
    fn resolved_targets() {
        let c = ExperimentConfig::new(Experiment::Thm6Regime, 7).resolved();
        assert_eq!(c.horizon, Some(200_000));
        assert_eq!(c.criterion.unwrap().target_alpha, Some(0.2));
        let mut c = ExperimentConfig::new(Experiment::Thm3Calibration, 7);
        c.process = Some(ProcessKind::BrokenClock {
            pre: 0.5,
            n: 10,
            post: 0.9,
        });
        c.forecaster = Some(ForecasterSpec::TruthOracle);
        assert_eq!(c.resolved().criterion.unwrap().target_alpha, Some(0.9));
    }
}
