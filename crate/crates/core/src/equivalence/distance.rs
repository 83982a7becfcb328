//! Distances between a learned predictor and the true probability function.
//!
//! When the truth is not available to the machine, no distance is computed:
//! [`evaluate_distance`] returns [`DistanceOutcome::NotEvaluable`] instead of a
//! number.

use serde::{Deserialize, Serialize};

use crate::scalar::{lit, Real};

use super::measure::{kl_divergence, DiscreteMeasure};
use super::model::PROBABILITY_FLOOR;
use super::EquivalenceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    /// Mean Bernoulli `KL(truth || candidate)` over evaluation points.
    KullbackLeibler,
    /// Mean `(candidate - truth)^2`.
    SquaredError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceSpec {
    pub kind: DistanceKind,
    pub truth_available: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DistanceOutcome<F> {
    Value { value: F },
    NotEvaluable { reason: String },
}

impl<F> DistanceOutcome<F> {
    pub fn value(&self) -> Option<&F> {
        match self {
            DistanceOutcome::Value { value } => Some(value),
            DistanceOutcome::NotEvaluable { .. } => None,
        }
    }
}

fn bernoulli<F: Real>(p: F) -> Result<DiscreteMeasure<F>, EquivalenceError> {
    DiscreteMeasure::new(vec![F::zero(), F::one()], vec![F::one() - p, p])
}

/// The distance between per-point predictions and the true probabilities.
///
/// `candidate` and `truth` hold `P(Y = 1)` at the same evaluation points.
pub fn evaluate_distance<F: Real>(
    spec: &DistanceSpec,
    candidate: &[F],
    truth: Option<&[F]>,
) -> DistanceOutcome<F> {
    let truth = match (spec.truth_available, truth) {
        (true, Some(t)) => t,
        (false, _) => {
            return DistanceOutcome::NotEvaluable {
                reason: "the true probability is not directly observable, so the second argument \
                         of the distance cannot be calculated"
                    .into(),
            }
        }
        (true, None) => {
            return DistanceOutcome::NotEvaluable {
                reason: "truth declared available but no true function was supplied".into(),
            }
        }
    };
    if candidate.len() != truth.len() || candidate.is_empty() {
        return DistanceOutcome::NotEvaluable {
            reason: format!(
                "candidate has {} points and truth has {}; need equal, non-zero counts",
                candidate.len(),
                truth.len()
            ),
        };
    }
    let n = lit::<F>(candidate.len() as f64);
    let total = match spec.kind {
        DistanceKind::SquaredError => candidate
            .iter()
            .zip(truth)
            .fold(F::zero(), |acc, (&c, &t)| acc + (c - t) * (c - t)),
        DistanceKind::KullbackLeibler => {
            let mut acc = F::zero();
            for (&c, &t) in candidate.iter().zip(truth) {
                let kl = match (bernoulli(t), bernoulli(c)) {
                    (Ok(p), Ok(q)) => match kl_divergence(&p, &q) {
                        Ok(d) => d,
                        Err(EquivalenceError::AbsoluteContinuityViolation(_)) => F::infinity(),
                        Err(e) => {
                            return DistanceOutcome::NotEvaluable {
                                reason: e.to_string(),
                            }
                        }
                    },
                    _ => {
                        return DistanceOutcome::NotEvaluable {
                            reason: "probabilities must lie in [0, 1]".into(),
                        }
                    }
                };
                acc = acc + kl;
            }
            acc
        }
    };
    DistanceOutcome::Value { value: total / n }
}

fn log_lik<F: Real>(outcome: bool, p: F) -> F {
    let floor = lit::<F>(PROBABILITY_FLOOR);
    let q = if outcome { p } else { F::one() - p };
    q.max(floor).ln()
}

/// `sum_t ln L_A(y_t) - sum_t ln L_B(y_t)` for per-step Bernoulli probabilities.
pub fn likelihood_indistinguishability<F: Real>(
    data: &[bool],
    model_a: &[F],
    model_b: &[F],
) -> Result<F, EquivalenceError> {
    if data.len() != model_a.len() {
        return Err(EquivalenceError::SequenceLength(data.len(), model_a.len()));
    }
    if data.len() != model_b.len() {
        return Err(EquivalenceError::SequenceLength(data.len(), model_b.len()));
    }
    Ok(data
        .iter()
        .zip(model_a.iter().zip(model_b))
        .fold(F::zero(), |acc, (&y, (&a, &b))| {
            acc + log_lik(y, a) - log_lik(y, b)
        }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::RngState;

    const SQ: DistanceSpec = DistanceSpec {
        kind: DistanceKind::SquaredError,
        truth_available: true,
    };

    #[test]
    fn squared_error_of_truth_is_zero() {
        let t = [0.1, 0.5, 0.9];
        assert_eq!(
            evaluate_distance(&SQ, &t, Some(&t)),
            DistanceOutcome::Value { value: 0.0 }
        );
        let out = evaluate_distance(&SQ, &[0.2, 0.5, 0.9], Some(&t));
        assert!((out.value().unwrap() - 0.01 / 3.0f64).abs() < 1e-15);
    }

    #[test]
    fn unavailable_truth_is_not_evaluable() {
        let hidden = DistanceSpec {
            kind: DistanceKind::KullbackLeibler,
            truth_available: false,
        };
        let t = [0.3];
        assert!(matches!(
            evaluate_distance(&hidden, &t, Some(&t)),
            DistanceOutcome::NotEvaluable { .. }
        ));
        assert!(matches!(
            evaluate_distance(&SQ, &t, None),
            DistanceOutcome::NotEvaluable { .. }
        ));
        assert!(matches!(
            evaluate_distance(&SQ, &t, Some(&[0.1, 0.2])),
            DistanceOutcome::NotEvaluable { .. }
        ));
    }

    #[test]
    fn kl_between_identical_models_is_zero() {
        let kl = DistanceSpec {
            kind: DistanceKind::KullbackLeibler,
            truth_available: true,
        };
        let p = [0.2, 0.8, 0.5];
        assert_eq!(
            evaluate_distance(&kl, &p, Some(&p)),
            DistanceOutcome::Value { value: 0.0 }
        );
        let d = evaluate_distance(&kl, &[0.5, 0.5, 0.5], Some(&p));
        assert!(*d.value().unwrap() > 0.0);
        // Candidate rules out an event the truth allows.
        let d = evaluate_distance(&kl, &[0.0], Some(&[0.5]));
        assert_eq!(d.value(), Some(&f64::INFINITY));
    }

    #[test]
    fn indistinguishability_basics() {
        let data = [true, false, true];
        let a = [0.3, 0.6, 0.9];
        assert_eq!(likelihood_indistinguishability(&data, &a, &a).unwrap(), 0.0);
        assert_eq!(
            likelihood_indistinguishability(&data, &a, &a[..2]),
            Err(EquivalenceError::SequenceLength(3, 2))
        );
    }

    #[test]
    fn true_schedule_beats_the_average() {
        let mut rng = RngState::from_seed(17);
        let n = 20_000;
        let truth: Vec<f64> = (0..n).map(|t| if t % 2 == 0 { 0.2 } else { 0.8 }).collect();
        let data: Vec<bool> = truth.iter().map(|&p| rng.bernoulli(p).unwrap()).collect();
        let flat = vec![0.5; n];
        let diff = likelihood_indistinguishability(&data, &flat, &truth).unwrap();
        // Expected per-step gap is the Bernoulli KL(0.2 || 0.5) ~ 0.193.
        let per_step = -diff / n as f64;
        let kl = 0.2 * (0.2f64 / 0.5).ln() + 0.8 * (0.8f64 / 0.5).ln();
        assert!((per_step - kl).abs() < 0.02, "{per_step} vs {kl}");
    }
}
