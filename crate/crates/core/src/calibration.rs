//! Test sets, the running calibration statistic `p_k`, finite-horizon
//! learnability verdicts, and the PAC disagreement error.
//!
//! A test set keeps the records a selection rule picks out and, for every
//! prefix of `k` selected records, the exact count pair behind
//!
//! ```text
//! p_k = (sum_j xi_j * 1{A_j}) / (sum_j xi_j)
//! ```
//!
//! "Correct all but finitely often" cannot be decided from a finite run, so
//! [`success_criterion_check`] works with a declared burn-in, an error budget
//! `delta`, and a family of trailing windows, all of which are echoed back in
//! the verdict.

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forecasters::ForecastRecord;
use crate::prob::{Frequency, RngState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibrationError {
    #[error("no records to select from")]
    NoRecords,
    #[error("selection criterion selected no records; p_k is 0/0")]
    EmptyTestSet,
    #[error("oracle mask has {mask} entries for {records} records")]
    MaskLength { mask: usize, records: usize },
    #[error("invalid parameter: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectionMode {
    /// Forecast within `tolerance` of the target.
    MatchForecast,
    /// Forecast matches and the stored truth equals the target exactly.
    MatchForecastAndTruth,
    /// An externally supplied mask, one entry per record.
    OracleMask(Vec<bool>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionCriterion {
    pub target_alpha: f64,
    pub tolerance: f64,
    pub mode: SelectionMode,
}

impl SelectionCriterion {
    pub fn match_forecast(target_alpha: f64, tolerance: f64) -> Self {
        Self {
            target_alpha,
            tolerance,
            mode: SelectionMode::MatchForecast,
        }
    }

    fn validate(&self) -> Result<(), CalibrationError> {
        if !(0.0..=1.0).contains(&self.target_alpha) {
            return Err(CalibrationError::Domain(format!(
                "target_alpha {} outside [0, 1]",
                self.target_alpha
            )));
        }
        if !(self.tolerance >= 0.0) {
            return Err(CalibrationError::Domain(format!(
                "tolerance {} must be non-negative",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestSet {
    /// Positions of the selected records in the source sequence.
    pub indices: Vec<usize>,
    pub selected: Vec<ForecastRecord>,
    /// Exact `(hits, k)` after each selected record.
    pub p_k_trace: Vec<Frequency>,
}

impl TestSet {
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn final_p_k(&self) -> f64 {
        self.p_k_trace.last().map_or(f64::NAN, Frequency::value)
    }

    /// Writes `k,p_k` with 1-based `k`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "p_k"])?;
        for f in &self.p_k_trace {
            w.write_record([f.trials.to_string(), f.value().to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn build_test_set(
    records: &[ForecastRecord],
    crit: &SelectionCriterion,
) -> Result<TestSet, CalibrationError> {
    if records.is_empty() {
        return Err(CalibrationError::NoRecords);
    }
    crit.validate()?;
    if let SelectionMode::OracleMask(mask) = &crit.mode {
        if mask.len() != records.len() {
            return Err(CalibrationError::MaskLength {
                mask: mask.len(),
                records: records.len(),
            });
        }
    }
    let alpha = crit.target_alpha;
    let forecast_matches = |r: &ForecastRecord| (r.forecast - alpha).abs() <= crit.tolerance;

    let mut indices = Vec::new();
    let mut selected = Vec::new();
    let mut trace = Vec::new();
    let mut hits = 0u64;
    for (i, r) in records.iter().enumerate() {
        let xi = match &crit.mode {
            SelectionMode::MatchForecast => forecast_matches(r),
            SelectionMode::MatchForecastAndTruth => forecast_matches(r) && r.truth == alpha,
            SelectionMode::OracleMask(mask) => mask[i],
        };
        if xi {
            hits += u64::from(r.outcome);
            indices.push(i);
            selected.push(*r);
            trace.push(Frequency::new(hits, selected.len() as u64));
        }
    }
    if selected.is_empty() {
        return Err(CalibrationError::EmptyTestSet);
    }
    Ok(TestSet {
        indices,
        selected,
        p_k_trace: trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationVerdict {
    Converged,
    Diverged,
    Inconclusive,
}

/// Converged when every `p_k` in the trailing `window_fraction` of the trace
/// is within `epsilon` of the target; Diverged when the final `p_K` is more
/// than `2 * epsilon` away.
pub fn calibration_verdict(
    ts: &TestSet,
    target_alpha: f64,
    epsilon: f64,
    window_fraction: f64,
) -> Result<CalibrationVerdict, CalibrationError> {
    if ts.is_empty() {
        return Err(CalibrationError::EmptyTestSet);
    }
    if !(epsilon > 0.0) {
        return Err(CalibrationError::Domain(format!(
            "epsilon {epsilon} must be positive"
        )));
    }
    if !(window_fraction > 0.0 && window_fraction < 1.0) {
        return Err(CalibrationError::Domain(format!(
            "window_fraction {window_fraction} outside (0, 1)"
        )));
    }
    let k = ts.p_k_trace.len();
    let window = ((k as f64 * window_fraction).ceil() as usize).clamp(1, k);
    let dev = |f: &Frequency| (f.value() - target_alpha).abs();
    if ts.p_k_trace[k - window..].iter().all(|f| dev(f) <= epsilon) {
        Ok(CalibrationVerdict::Converged)
    } else if dev(&ts.p_k_trace[k - 1]) > 2.0 * epsilon {
        Ok(CalibrationVerdict::Diverged)
    } else {
        Ok(CalibrationVerdict::Inconclusive)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Learned,
    NotLearned,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnabilityVerdict {
    pub verdict: Verdict,
    pub burn_in: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub tail_error_rate: f64,
    /// Error rates over the trailing half-windows, longest first.
    pub window_error_rates: Vec<f64>,
    /// `p_K` over records whose forecast is within `epsilon` of the target;
    /// absent when none are.
    pub p_k_final: Option<f64>,
    pub notes: String,
}

pub const SELF_ASSURANCE_NOTE: &str = "only the correctness half of the success criterion \
is checked; self-assurance of being correct has no computable definition and is not evaluated";

/// Finite proxy for "correct all but finitely often".
///
/// The first `burn_in` records are discarded. A record is an error when
/// `|forecast - truth| > epsilon`. With tail length `L`, the trailing windows
/// are the last `ceil(L/2)`, `ceil(L/4)`, ... records down to a single one.
///
/// * `Learned`: tail error rate `<= delta`.
/// * `NotLearned`: the tail and every trailing window have error rate `> delta`.
/// * `Inconclusive`: otherwise.
pub fn success_criterion_check(
    records: &[ForecastRecord],
    target_alpha: f64,
    epsilon: f64,
    burn_in: usize,
    delta: f64,
) -> Result<LearnabilityVerdict, CalibrationError> {
    if burn_in >= records.len() {
        return Err(CalibrationError::Domain(format!(
            "burn_in {burn_in} must be below the record count {}",
            records.len()
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CalibrationError::Domain(format!(
            "delta {delta} outside (0, 1)"
        )));
    }
    if !(epsilon >= 0.0) {
        return Err(CalibrationError::Domain(format!(
            "epsilon {epsilon} must be non-negative"
        )));
    }
    let tail = &records[burn_in..];
    let errors: Vec<bool> = tail
        .iter()
        .map(|r| (r.forecast - r.truth).abs() > epsilon)
        .collect();
    let rate = |xs: &[bool]| xs.iter().filter(|&&e| e).count() as f64 / xs.len() as f64;

    let tail_error_rate = rate(&errors);
    let mut window_error_rates = Vec::new();
    let mut len = errors.len();
    while len > 1 {
        len = len.div_ceil(2);
        window_error_rates.push(rate(&errors[errors.len() - len..]));
    }

    let verdict = if tail_error_rate <= delta {
        Verdict::Learned
    } else if window_error_rates.iter().all(|&r| r > delta) {
        Verdict::NotLearned
    } else {
        Verdict::Inconclusive
    };

    let p_k_final = build_test_set(
        records,
        &SelectionCriterion::match_forecast(target_alpha, epsilon),
    )
    .ok()
    .map(|ts| ts.final_p_k());

    Ok(LearnabilityVerdict {
        verdict,
        burn_in,
        delta,
        epsilon,
        tail_error_rate,
        window_error_rates,
        p_k_final,
        notes: SELF_ASSURANCE_NOTE.to_string(),
    })
}

/// A finite instance space with a (not necessarily normalized) weighting.
#[derive(Debug, Clone)]
pub struct FiniteSpace<X> {
    points: Vec<X>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl<X> FiniteSpace<X> {
    pub fn new(points: Vec<X>, weights: Vec<f64>) -> Result<Self, CalibrationError> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(CalibrationError::Domain(
                "instance space needs one weight per point and at least one point".into(),
            ));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(CalibrationError::Domain(
                "weights must be finite and non-negative".into(),
            ));
        }
        let mut acc = 0.0;
        let cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        if !(acc > 0.0) {
            return Err(CalibrationError::Domain(
                "total weight must be positive".into(),
            ));
        }
        Ok(Self {
            points,
            weights,
            cumulative,
        })
    }

    pub fn uniform(points: Vec<X>) -> Result<Self, CalibrationError> {
        let n = points.len();
        Self::new(points, vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[X] {
        &self.points
    }

    pub fn total_weight(&self) -> f64 {
        *self.cumulative.last().expect("non-empty")
    }

    /// Draws a point with probability proportional to its weight.
    pub fn sample(&self, rng: &mut RngState) -> &X {
        let u = rng.next_f64() * self.total_weight();
        let i = self.cumulative.partition_point(|&c| c <= u);
        &self.points[i.min(self.points.len() - 1)]
    }
}

/// Instance spaces up to this size are enumerated rather than sampled.
pub const ENUMERATION_LIMIT: usize = 1 << 20;

pub enum InstanceDistribution<'a, X> {
    Finite(&'a FiniteSpace<X>),
    Sampler(&'a dyn Fn(&mut RngState) -> X),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PacEstimate {
    Exact { error: f64 },
    MonteCarlo { error: f64, samples: usize },
}

impl PacEstimate {
    pub fn error(&self) -> f64 {
        match *self {
            PacEstimate::Exact { error } | PacEstimate::MonteCarlo { error, .. } => error,
        }
    }
}

/// `Pr_{x ~ D}[h(x) != c(x)]` by full enumeration.
pub fn pac_error_exact<X>(
    h: impl Fn(&X) -> bool,
    c: impl Fn(&X) -> bool,
    space: &FiniteSpace<X>,
) -> f64 {
    let disagreement: f64 = space
        .points
        .iter()
        .zip(&space.weights)
        .filter(|(x, _)| h(x) != c(x))
        .map(|(_, w)| w)
        .sum();
    // Normalizing by the same sum makes total disagreement exactly 1; adding
    // zero turns the empty sum's -0.0 into 0.0.
    disagreement / space.total_weight() + 0.0
}

/// Monte Carlo estimate of the disagreement probability from `n` draws.
pub fn pac_error_monte_carlo<X>(
    h: impl Fn(&X) -> bool,
    c: impl Fn(&X) -> bool,
    mut sample: impl FnMut(&mut RngState) -> X,
    n: usize,
    seed: RngState,
) -> Result<f64, CalibrationError> {
    if n == 0 {
        return Err(CalibrationError::Domain(
            "sample count must be at least 1".into(),
        ));
    }
    let mut rng = seed;
    let mut disagree = 0usize;
    for _ in 0..n {
        let x = sample(&mut rng);
        disagree += usize::from(h(&x) != c(&x));
    }
    Ok(disagree as f64 / n as f64)
}

/// Exact when the space is declared finite and at most [`ENUMERATION_LIMIT`]
/// points; Monte Carlo with `n` draws otherwise.
pub fn pac_error_estimate<X: Clone>(
    h: impl Fn(&X) -> bool,
    c: impl Fn(&X) -> bool,
    dist: InstanceDistribution<'_, X>,
    n: usize,
    seed: RngState,
) -> Result<PacEstimate, CalibrationError> {
    if n == 0 {
        return Err(CalibrationError::Domain(
            "sample count must be at least 1".into(),
        ));
    }
    match dist {
        InstanceDistribution::Finite(space) if space.len() <= ENUMERATION_LIMIT => {
            Ok(PacEstimate::Exact {
                error: pac_error_exact(h, c, space),
            })
        }
        InstanceDistribution::Finite(space) => {
            let error = pac_error_monte_carlo(h, c, |rng| space.sample(rng).clone(), n, seed)?;
            Ok(PacEstimate::MonteCarlo { error, samples: n })
        }
        InstanceDistribution::Sampler(sampler) => {
            let error = pac_error_monte_carlo(h, c, sampler, n, seed)?;
            Ok(PacEstimate::MonteCarlo { error, samples: n })
        }
    }
}
