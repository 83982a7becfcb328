//! A layered Bernoulli probability model and its maximum-likelihood fit.
//!
//! Architecture: inputs of dimension `I`, then up to two hidden `tanh` layers
//! of widths `J_1, J_2`, then a single logistic output unit. With no hidden
//! layers this is logistic regression.
//!
//! Parameters live in one flat vector, layer by layer, each layer stored as
//! its weight matrix (row-major, one row per output unit) followed by its
//! bias vector. For logistic regression on one input that is `(w, b)`.

use crate::prob::RngState;
use crate::scalar::{lit, Real};

use super::EquivalenceError;

/// Probabilities are floored at this value (and capped at one minus it)
/// before taking logs.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Allowed per-step decrease of the log-likelihood before a step is retried.
pub const ASCENT_TOLERANCE: f64 = 1e-9;

pub const MAX_HALVINGS: u32 = 30;

pub const MAX_HIDDEN_LAYERS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParametricModel {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample<F> {
    pub x: Vec<F>,
    pub y: bool,
}

struct LogLik<F> {
    value: F,
    clamped: usize,
}

impl ParametricModel {
    pub fn new(input_dim: usize, hidden: Vec<usize>) -> Result<Self, EquivalenceError> {
        let m = Self { input_dim, hidden };
        m.validate()?;
        Ok(m)
    }

    pub fn logistic(input_dim: usize) -> Self {
        Self {
            input_dim,
            hidden: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), EquivalenceError> {
        if self.hidden.len() > MAX_HIDDEN_LAYERS {
            return Err(EquivalenceError::TooDeep(self.hidden.len()));
        }
        if self.hidden.contains(&0) {
            return Err(EquivalenceError::ZeroWidth);
        }
        Ok(())
    }

    /// `(inputs, outputs)` of every affine layer, the output unit last.
    fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes = Vec::with_capacity(self.hidden.len() + 1);
        let mut fan_in = self.input_dim;
        for &w in &self.hidden {
            shapes.push((fan_in, w));
            fan_in = w;
        }
        shapes.push((fan_in, 1));
        shapes
    }

    pub fn n_params(&self) -> usize {
        self.layer_shapes().iter().map(|(i, o)| (i + 1) * o).sum()
    }

    /// Uniform initialization in `[-scale, scale)`.
    pub fn init_params<F: Real>(&self, seed: RngState, scale: f64) -> Vec<F> {
        let mut rng = seed;
        (0..self.n_params())
            .map(|_| lit(rng.uniform(-scale, scale)))
            .collect()
    }

    fn check<F: Real>(&self, params: &[F], data: &[Sample<F>]) -> Result<(), EquivalenceError> {
        self.validate()?;
        if params.len() != self.n_params() {
            return Err(EquivalenceError::ParameterCount {
                expected: self.n_params(),
                got: params.len(),
            });
        }
        if let Some(s) = data.iter().find(|s| s.x.len() != self.input_dim) {
            return Err(EquivalenceError::InputDimension {
                expected: self.input_dim,
                got: s.x.len(),
            });
        }
        Ok(())
    }

    /// Layer activations, input first, and the output logit.
    fn forward<F: Real>(&self, params: &[F], x: &[F]) -> (Vec<Vec<F>>, F) {
        let shapes = self.layer_shapes();
        let mut acts = vec![x.to_vec()];
        let mut offset = 0;
        let mut logit = F::zero();
        for (k, &(fan_in, fan_out)) in shapes.iter().enumerate() {
            let weights = &params[offset..offset + fan_in * fan_out];
            let bias = &params[offset + fan_in * fan_out..offset + (fan_in + 1) * fan_out];
            offset += (fan_in + 1) * fan_out;
            let input = acts.last().expect("input layer present");
            let z: Vec<F> = (0..fan_out)
                .map(|j| {
                    weights[j * fan_in..(j + 1) * fan_in]
                        .iter()
                        .zip(input)
                        .fold(bias[j], |acc, (&w, &a)| acc + w * a)
                })
                .collect();
            if k + 1 == shapes.len() {
                logit = z[0];
            } else {
                acts.push(z.into_iter().map(F::tanh).collect());
            }
        }
        (acts, logit)
    }

    /// `P_m(Y = 1 | x)`.
    pub fn predict<F: Real>(&self, params: &[F], x: &[F]) -> F {
        sigmoid(self.forward(params, x).1)
    }

    fn log_likelihood_detail<F: Real>(&self, params: &[F], data: &[Sample<F>]) -> LogLik<F> {
        let floor = lit::<F>(PROBABILITY_FLOOR).ln();
        let mut value = F::zero();
        let mut clamped = 0;
        for s in data {
            let z = self.forward(params, &s.x).1;
            // ln sigma(z) = -softplus(-z), ln(1 - sigma(z)) = -softplus(z).
            let ll = if s.y { -softplus(-z) } else { -softplus(z) };
            if ll < floor {
                clamped += 1;
                value = value + floor;
            } else {
                value = value + ll;
            }
        }
        LogLik { value, clamped }
    }

    /// `sum_t ln P_m(y_t | x_t)` with the probability floor applied.
    pub fn log_likelihood<F: Real>(
        &self,
        params: &[F],
        data: &[Sample<F>],
    ) -> Result<F, EquivalenceError> {
        self.check(params, data)?;
        let ll = self.log_likelihood_detail(params, data).value;
        if ll.is_finite() {
            Ok(ll)
        } else {
            Err(EquivalenceError::NonFiniteLikelihood)
        }
    }

    /// Analytic gradient of the (unfloored) log-likelihood by backpropagation.
    pub fn gradient<F: Real>(
        &self,
        params: &[F],
        data: &[Sample<F>],
    ) -> Result<Vec<F>, EquivalenceError> {
        self.check(params, data)?;
        Ok(self.gradient_unchecked(params, data))
    }

    fn gradient_unchecked<F: Real>(&self, params: &[F], data: &[Sample<F>]) -> Vec<F> {
        let shapes = self.layer_shapes();
        let mut offsets = Vec::with_capacity(shapes.len());
        let mut offset = 0;
        for &(i, o) in &shapes {
            offsets.push(offset);
            offset += (i + 1) * o;
        }
        let mut grad = vec![F::zero(); params.len()];
        for s in data {
            let (acts, logit) = self.forward(params, &s.x);
            let y = if s.y { F::one() } else { F::zero() };
            // d ll / d logit for a Bernoulli with logistic link.
            let mut delta = vec![y - sigmoid(logit)];
            for k in (0..shapes.len()).rev() {
                let (fan_in, fan_out) = shapes[k];
                let input = &acts[k];
                let base = offsets[k];
                for j in 0..fan_out {
                    for i in 0..fan_in {
                        grad[base + j * fan_in + i] =
                            grad[base + j * fan_in + i] + delta[j] * input[i];
                    }
                    grad[base + fan_in * fan_out + j] =
                        grad[base + fan_in * fan_out + j] + delta[j];
                }
                if k == 0 {
                    break;
                }
                // Back through the weights, then through tanh' = 1 - a^2.
                delta = (0..fan_in)
                    .map(|i| {
                        let back = (0..fan_out).fold(F::zero(), |acc, j| {
                            acc + params[base + j * fan_in + i] * delta[j]
                        });
                        back * (F::one() - input[i] * input[i])
                    })
                    .collect();
            }
        }
        grad
    }
}

fn sigmoid<F: Real>(z: F) -> F {
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus<F: Real>(z: F) -> F {
    if z > F::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub step_size: f64,
    pub iterations: usize,
    pub init_seed: u64,
    pub init_scale: f64,
    /// Stop once every component of the mean gradient is at most this.
    pub gradient_tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            step_size: 2.0,
            iterations: 2_000,
            init_seed: 0,
            init_scale: 0.5,
            gradient_tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel<F> {
    pub params: Vec<F>,
    /// Log-likelihood at initialization and after every accepted step.
    pub trace: Vec<F>,
    /// Samples whose probability hit the floor at the final parameters.
    pub clamped: usize,
    pub halvings: u32,
    /// Set when a step could not be accepted within the halving budget.
    pub stalled: bool,
}

/// Full-batch gradient ascent on the log-likelihood.
///
/// Runs until the mean gradient falls within `gradient_tolerance` or
/// `iterations` steps have been taken. Each step moves along `step * gradient / n`. A step that lowers the
/// log-likelihood by more than [`ASCENT_TOLERANCE`] is retried at half the
/// step size, at most [`MAX_HALVINGS`] times; the reduced step size is kept.
pub fn mle_fit<F: Real>(
    model: &ParametricModel,
    data: &[Sample<F>],
    opts: &FitOptions,
) -> Result<FittedModel<F>, EquivalenceError> {
    if data.is_empty() {
        return Err(EquivalenceError::NoData);
    }
    if !(opts.step_size > 0.0 && opts.step_size.is_finite()) {
        return Err(EquivalenceError::Domain(format!(
            "step size {} must be positive",
            opts.step_size
        )));
    }
    let mut params: Vec<F> =
        model.init_params(RngState::from_seed(opts.init_seed), opts.init_scale);
    let mut ll = model.log_likelihood(&params, data)?;
    let n = lit::<F>(data.len() as f64);
    let tol = lit::<F>(ASCENT_TOLERANCE);
    let gtol = lit::<F>(opts.gradient_tolerance);
    let mut step = lit::<F>(opts.step_size);
    let mut trace = vec![ll];
    let mut halvings = 0;
    let mut stalled = false;

    for _ in 0..opts.iterations {
        let grad = model.gradient_unchecked(&params, data);
        if grad.iter().all(|&g| (g / n).abs() <= gtol) {
            break;
        }
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let candidate: Vec<F> = params
                .iter()
                .zip(&grad)
                .map(|(&p, &g)| p + step * g / n)
                .collect();
            let cand_ll = model.log_likelihood_detail(&candidate, data).value;
            if cand_ll.is_finite() && cand_ll >= ll - tol {
                params = candidate;
                ll = cand_ll;
                accepted = true;
                break;
            }
            step = step / lit(2.0);
            halvings += 1;
        }
        if !accepted {
            stalled = true;
            break;
        }
        trace.push(ll);
    }
    let clamped = model.log_likelihood_detail(&params, data).clamped;
    Ok(FittedModel {
        params,
        trace,
        clamped,
        halvings,
        stalled,
    })
}

/// Largest relative discrepancy between the analytic gradient and central
/// differences with perturbation `h`, using `|a - n| / max(1, |a|, |n|)`.
pub fn grad_check<F: Real>(
    model: &ParametricModel,
    params: &[F],
    data: &[Sample<F>],
    h: F,
) -> Result<F, EquivalenceError> {
    if !(h > F::zero()) {
        return Err(EquivalenceError::Domain(
            "perturbation must be positive".into(),
        ));
    }
    let analytic = model.gradient(params, data)?;
    let mut worst = F::zero();
    let mut shifted = params.to_vec();
    for (i, &a) in analytic.iter().enumerate() {
        shifted[i] = params[i] + h;
        let up = model.log_likelihood_detail(&shifted, data).value;
        shifted[i] = params[i] - h;
        let down = model.log_likelihood_detail(&shifted, data).value;
        shifted[i] = params[i];
        let numeric = (up - down) / (h + h);
        let scale = F::one().max(a.abs()).max(numeric.abs());
        worst = worst.max((a - numeric).abs() / scale);
    }
    Ok(worst)
}
