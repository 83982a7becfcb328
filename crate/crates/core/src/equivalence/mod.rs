//! Change of measure, observational equivalence, and the likelihood escape.
//!
//! * [`measure`]: finite-support measures, Radon-Nikodym densities, and the
//!   two formulations `sum f dnu` and `sum f h dmu` of an expected-gain problem.
//! * [`model`]: a small layered Bernoulli model fitted by maximum likelihood,
//!   with finite-difference gradient verification.
//! * [`distance`]: distances to a true function, which refuse to produce a
//!   number when the truth is not available.

pub mod distance;
pub mod measure;
pub mod model;

use thiserror::Error;

pub use distance::{
    evaluate_distance, likelihood_indistinguishability, DistanceKind, DistanceOutcome, DistanceSpec,
};
pub use measure::{
    argmax_expected_gain, kl_divergence, observational_equivalence_report, radon_nikodym, Argmax,
    Density, DiscreteMeasure, EquivalenceReport, Expectation,
};
pub use model::{
    grad_check, mle_fit, FitOptions, FittedModel, ParametricModel, Sample, ASCENT_TOLERANCE,
    PROBABILITY_FLOOR,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquivalenceError {
    #[error("measure needs at least one point")]
    EmptySupport,
    #[error("support has {support} points but {mass} masses were given")]
    LengthMismatch { support: usize, mass: usize },
    #[error("mass at index {0} is negative or not a number")]
    NegativeMass(usize),
    #[error("total mass is zero")]
    ZeroMass,
    #[error("the two measures are defined on different supports")]
    SupportMismatch,
    #[error(
        "absolute continuity fails at index {0}: reference mass is zero, other mass is positive"
    )]
    AbsoluteContinuityViolation(usize),
    #[error("feasible set is empty")]
    EmptyFeasible,
    #[error("feasible index {0} is outside the support")]
    FeasibleOutOfRange(usize),
    #[error("model has {0} hidden layers; at most 2 are supported")]
    TooDeep(usize),
    #[error("model layer widths must be positive")]
    ZeroWidth,
    #[error("expected {expected} parameters, got {got}")]
    ParameterCount { expected: usize, got: usize },
    #[error("sample has {got} inputs, model expects {expected}")]
    InputDimension { expected: usize, got: usize },
    #[error("no training data")]
    NoData,
    #[error("log-likelihood is not finite")]
    NonFiniteLikelihood,
    #[error("sequences differ in length: {0} vs {1}")]
    SequenceLength(usize, usize),
    #[error("invalid parameter: {0}")]
    Domain(String),
}
