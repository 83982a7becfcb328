//! Simulation and checking tools for probabilistic forecasting and learning.
//!
//! Processes generate Bernoulli paths with a known true probability at each
//! step; forecasters announce probabilities from past outcomes only; the
//! calibration module selects test sets and issues verdicts. The remaining
//! modules cover change of measure and likelihood fitting, exact n-gram
//! counting, and epistemic logic over Kripke models.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod epistemic;
pub mod equivalence;
pub mod forecasters;
pub mod ngram;
pub mod prob;
pub mod processes;
pub mod scalar;

use num_rational::BigRational;

pub use calibration::{
    build_test_set, calibration_verdict, success_criterion_check, CalibrationVerdict,
    LearnabilityVerdict, SelectionCriterion, SelectionMode, TestSet, Verdict,
};
pub use forecasters::{forecast_outcomes, run_forecaster, ForecastRecord, ForecasterSpec};
pub use prob::{Frequency, RngState};
pub use processes::{simulate, Path, ProcessKind, ProcessSpec};
pub use scalar::{Real, Scalar};

pub type Measure = equivalence::DiscreteMeasure<f64>;
pub type Measure32 = equivalence::DiscreteMeasure<f32>;
pub type ExactMeasure = equivalence::DiscreteMeasure<BigRational>;
pub type EquivalenceReport = equivalence::EquivalenceReport<f64>;
pub type ExactEquivalenceReport = equivalence::EquivalenceReport<BigRational>;
pub type Sample = equivalence::Sample<f64>;
pub type FittedModel = equivalence::FittedModel<f64>;
