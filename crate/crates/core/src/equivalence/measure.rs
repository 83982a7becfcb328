use crate::scalar::{sum, Real, Scalar};

use super::EquivalenceError;

/// A probability measure on finitely many points, normalized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<S> {
    support: Vec<S>,
    mass: Vec<S>,
}

impl<S: Scalar> DiscreteMeasure<S> {
    /// Builds a measure from non-negative weights, dividing by their total.
    pub fn new(support: Vec<S>, weights: Vec<S>) -> Result<Self, EquivalenceError> {
        if support.is_empty() {
            return Err(EquivalenceError::EmptySupport);
        }
        if support.len() != weights.len() {
            return Err(EquivalenceError::LengthMismatch {
                support: support.len(),
                mass: weights.len(),
            });
        }
        if let Some(i) = weights.iter().position(|w| !(*w >= S::zero())) {
            return Err(EquivalenceError::NegativeMass(i));
        }
        let total = sum(&weights);
        if total <= S::zero() {
            return Err(EquivalenceError::ZeroMass);
        }
        let mass = weights.into_iter().map(|w| w / total.clone()).collect();
        Ok(Self { support, mass })
    }

    pub fn uniform(support: Vec<S>) -> Result<Self, EquivalenceError> {
        let n = support.len();
        Self::new(support, vec![S::one(); n])
    }

    pub fn support(&self) -> &[S] {
        &self.support
    }

    pub fn mass(&self) -> &[S] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

/// Pointwise density `h = dnu/dmu` of one finite measure against another.
#[derive(Debug, Clone, PartialEq)]
pub struct Density<S> {
    pub ratio: Vec<S>,
}

/// `h(x) = nu(x) / mu(x)` where `mu(x) > 0`, and `0` where both vanish.
pub fn radon_nikodym<S: Scalar>(
    nu: &DiscreteMeasure<S>,
    mu: &DiscreteMeasure<S>,
) -> Result<Density<S>, EquivalenceError> {
    if nu.support != mu.support {
        return Err(EquivalenceError::SupportMismatch);
    }
    let ratio = nu
        .mass
        .iter()
        .zip(&mu.mass)
        .enumerate()
        .map(|(i, (n, m))| {
            if m.is_zero() {
                if n.is_zero() {
                    Ok(S::zero())
                } else {
                    Err(EquivalenceError::AbsoluteContinuityViolation(i))
                }
            } else {
                Ok(n.clone() / m.clone())
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(Density { ratio })
}

/// The measure an expected gain is taken under.
#[derive(Debug)]
pub enum Expectation<'a, S> {
    /// `sum_w f(x, w) nu(w)`.
    Direct(&'a DiscreteMeasure<S>),
    /// `sum_w f(x, w) h(w) mu(w)`.
    Reweighted {
        mu: &'a DiscreteMeasure<S>,
        density: &'a Density<S>,
    },
}

impl<S> Clone for Expectation<'_, S> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<S> Copy for Expectation<'_, S> {}

impl<S: Scalar> Expectation<'_, S> {
    fn measure(&self) -> &DiscreteMeasure<S> {
        match self {
            Expectation::Direct(m) | Expectation::Reweighted { mu: m, .. } => m,
        }
    }

    /// Expected gain of choosing support point `decision`.
    pub fn expected_gain(&self, f: &impl Fn(&S, &S) -> S, decision: usize) -> S {
        let m = self.measure();
        let x = &m.support[decision];
        match self {
            Expectation::Direct(nu) => nu
                .support
                .iter()
                .zip(&nu.mass)
                .fold(S::zero(), |acc, (w, p)| acc + f(x, w) * p.clone()),
            Expectation::Reweighted { mu, density } => mu
                .support
                .iter()
                .zip(&mu.mass)
                .zip(&density.ratio)
                .fold(S::zero(), |acc, ((w, p), h)| {
                    acc + f(x, w) * h.clone() * p.clone()
                }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Argmax<S> {
    pub index: usize,
    pub point: S,
    pub value: S,
}

fn check_feasible(feasible: &[usize], len: usize) -> Result<(), EquivalenceError> {
    if feasible.is_empty() {
        return Err(EquivalenceError::EmptyFeasible);
    }
    match feasible.iter().find(|&&i| i >= len) {
        Some(&i) => Err(EquivalenceError::FeasibleOutOfRange(i)),
        None => Ok(()),
    }
}

/// Exhaustive maximization of the expected gain over feasible support
/// indices. `f(decision, state)` is the gain; ties go to the smallest index.
pub fn argmax_expected_gain<S: Scalar>(
    f: impl Fn(&S, &S) -> S,
    basis: Expectation<'_, S>,
    feasible: &[usize],
) -> Result<Argmax<S>, EquivalenceError> {
    let m = basis.measure();
    check_feasible(feasible, m.len())?;
    if let Expectation::Reweighted { density, .. } = basis {
        if density.ratio.len() != m.len() {
            return Err(EquivalenceError::SupportMismatch);
        }
    }
    let mut order = feasible.to_vec();
    order.sort_unstable();
    order.dedup();
    let mut best: Option<Argmax<S>> = None;
    for i in order {
        let value = basis.expected_gain(&f, i);
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(Argmax {
                index: i,
                point: m.support[i].clone(),
                value,
            });
        }
    }
    Ok(best.expect("feasible set is non-empty"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport<S> {
    /// `max_x |sum f dnu - sum f h dmu|` over feasible decisions.
    pub objective_gap: S,
    pub same_argmax: bool,
    pub argmax_nu: Argmax<S>,
    pub argmax_mu: Argmax<S>,
    pub density: Density<S>,
}

/// Solves the expected-gain problem under `nu` with gain `f`, and under `mu`
/// with gain `f h`, and compares the two.
pub fn observational_equivalence_report<S: Scalar>(
    f: impl Fn(&S, &S) -> S,
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    feasible: &[usize],
) -> Result<EquivalenceReport<S>, EquivalenceError> {
    let density = radon_nikodym(nu, mu)?;
    let direct = Expectation::Direct(nu);
    let reweighted = Expectation::Reweighted {
        mu,
        density: &density,
    };
    let argmax_nu = argmax_expected_gain(&f, direct, feasible)?;
    let argmax_mu = argmax_expected_gain(&f, reweighted, feasible)?;
    let objective_gap = feasible
        .iter()
        .map(|&i| (direct.expected_gain(&f, i) - reweighted.expected_gain(&f, i)).abs())
        .fold(S::zero(), |acc, g| if g > acc { g } else { acc });
    Ok(EquivalenceReport {
        objective_gap,
        same_argmax: argmax_nu.index == argmax_mu.index,
        argmax_nu,
        argmax_mu,
        density,
    })
}

/// `sum p(x) ln(p(x) / q(x))` in nats, with `0 ln 0 = 0`.
pub fn kl_divergence<F: Real>(
    p: &DiscreteMeasure<F>,
    q: &DiscreteMeasure<F>,
) -> Result<F, EquivalenceError> {
    if p.support != q.support {
        return Err(EquivalenceError::SupportMismatch);
    }
    let mut total = F::zero();
    for (i, (&pi, &qi)) in p.mass.iter().zip(&q.mass).enumerate() {
        if pi.is_zero() {
            continue;
        }
        if qi.is_zero() {
            return Err(EquivalenceError::AbsoluteContinuityViolation(i));
        }
        total = total + pi * (pi / qi).ln();
    }
    // Rounding can leave a tiny negative for p == q.
    Ok(total.max(F::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn grid(n: usize) -> Vec<f64> {
        (0..=n).map(|i| i as f64 / n as f64).collect()
    }

    #[test]
    fn construction_normalizes_and_validates() {
        let m = DiscreteMeasure::new(vec![0.0, 1.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(m.mass(), &[0.25, 0.75]);
        assert_eq!(
            DiscreteMeasure::<f64>::new(vec![], vec![]),
            Err(EquivalenceError::EmptySupport)
        );
        assert_eq!(
            DiscreteMeasure::new(vec![0.0], vec![1.0, 2.0]),
            Err(EquivalenceError::LengthMismatch {
                support: 1,
                mass: 2
            })
        );
        assert_eq!(
            DiscreteMeasure::new(vec![0.0, 1.0], vec![1.0, -1.0]),
            Err(EquivalenceError::NegativeMass(1))
        );
        assert_eq!(
            DiscreteMeasure::new(vec![0.0, 1.0], vec![0.0, f64::NAN]),
            Err(EquivalenceError::NegativeMass(1))
        );
        assert_eq!(
            DiscreteMeasure::new(vec![0.0], vec![0.0]),
            Err(EquivalenceError::ZeroMass)
        );
    }

    #[test]
    fn density_examples() {
        let mu = DiscreteMeasure::uniform(vec![0.0, 1.0]).unwrap();
        assert_eq!(radon_nikodym(&mu, &mu).unwrap().ratio, vec![1.0, 1.0]);
        let nu = DiscreteMeasure::new(vec![0.0, 1.0], vec![0.25, 0.75]).unwrap();
        assert_eq!(radon_nikodym(&nu, &mu).unwrap().ratio, vec![0.5, 1.5]);

        let point = DiscreteMeasure::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        let half = DiscreteMeasure::uniform(vec![0.0, 1.0]).unwrap();
        assert_eq!(
            radon_nikodym(&half, &point),
            Err(EquivalenceError::AbsoluteContinuityViolation(1))
        );
        // Both vanish: density 0, no violation.
        assert_eq!(radon_nikodym(&point, &point).unwrap().ratio, vec![1.0, 0.0]);
        let other = DiscreteMeasure::uniform(vec![0.0, 2.0]).unwrap();
        assert_eq!(
            radon_nikodym(&other, &half),
            Err(EquivalenceError::SupportMismatch)
        );
    }

    #[test]
    fn pointwise_gain_peaks_at_its_vertex() {
        let support = grid(100);
        let nu = DiscreteMeasure::new(support.clone(), (0..=100).map(|i| 1.0 + i as f64).collect())
            .unwrap();
        let mu = DiscreteMeasure::uniform(support).unwrap();
        let feasible: Vec<usize> = (0..=100).collect();
        let f = |x: &f64, _: &f64| -(x - 0.3) * (x - 0.3);
        let best = argmax_expected_gain(f, Expectation::Direct(&nu), &feasible).unwrap();
        assert_eq!(best.point, 0.3);
        let report = observational_equivalence_report(f, &mu, &nu, &feasible).unwrap();
        assert!(report.objective_gap <= 1e-12);
        assert!(report.same_argmax);
        assert_eq!(report.argmax_mu.point, 0.3);
    }

    #[test]
    fn singleton_feasible_set() {
        let m = DiscreteMeasure::uniform(grid(10)).unwrap();
        let best =
            argmax_expected_gain(|x: &f64, w: &f64| x * w, Expectation::Direct(&m), &[5]).unwrap();
        assert_eq!(best.point, 0.5);
        assert_eq!(
            argmax_expected_gain(|x: &f64, _: &f64| *x, Expectation::Direct(&m), &[]),
            Err(EquivalenceError::EmptyFeasible)
        );
        assert_eq!(
            argmax_expected_gain(|x: &f64, _: &f64| *x, Expectation::Direct(&m), &[11]),
            Err(EquivalenceError::FeasibleOutOfRange(11))
        );
    }

    #[test]
    fn ties_go_to_the_smallest_index() {
        let m = DiscreteMeasure::uniform(vec![0.0, 1.0, 2.0]).unwrap();
        let best =
            argmax_expected_gain(|_: &f64, _: &f64| 1.0, Expectation::Direct(&m), &[2, 1, 0])
                .unwrap();
        assert_eq!(best.index, 0);
    }

    #[test]
    fn state_dependent_gain_moves_with_the_measure() {
        // Quadratic loss around the state: the optimum tracks the mean of nu.
        let support = grid(10);
        let nu = DiscreteMeasure::new(
            support.clone(),
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0],
        )
        .unwrap();
        let mu = DiscreteMeasure::uniform(support).unwrap();
        let feasible: Vec<usize> = (0..=10).collect();
        let f = |x: &f64, w: &f64| -(x - w) * (x - w);
        let under_mu = argmax_expected_gain(f, Expectation::Direct(&mu), &feasible).unwrap();
        let report = observational_equivalence_report(f, &mu, &nu, &feasible).unwrap();
        assert_eq!(under_mu.point, 0.5);
        // mean of nu is 0.75; grid tie between 0.7 and 0.8 goes to the former.
        assert_eq!(report.argmax_nu.index, 7);
        assert!(report.same_argmax);
    }

    #[test]
    fn identical_measures_give_exact_zero_gap() {
        let support: Vec<BigRational> = (0..5).map(|i| q(i, 4)).collect();
        let mu = DiscreteMeasure::new(support.clone(), (1..=5).map(|i| q(i, 1)).collect()).unwrap();
        let f = |x: &BigRational, w: &BigRational| x * w - x * x;
        let report = observational_equivalence_report(f, &mu, &mu, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(report.objective_gap, q(0, 1));
        assert!(report.same_argmax);
        let fmu = DiscreteMeasure::new(vec![0.0, 0.5, 1.0], vec![0.2, 0.3, 0.5]).unwrap();
        let r = observational_equivalence_report(|x: &f64, w: &f64| x * w, &fmu, &fmu, &[0, 1, 2])
            .unwrap();
        assert_eq!(r.objective_gap, 0.0);
    }

    #[test]
    fn kl_examples() {
        let p = DiscreteMeasure::uniform(vec![0.0, 1.0]).unwrap();
        let q = DiscreteMeasure::new(vec![0.0, 1.0], vec![0.25, 0.75]).unwrap();
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let expected = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        let got = kl_divergence(&p, &q).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.143_841_036_225_890_3).abs() < 1e-12);
        let point = DiscreteMeasure::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        assert!(kl_divergence(&point, &p).unwrap() > 0.0);
        assert_eq!(
            kl_divergence(&p, &point),
            Err(EquivalenceError::AbsoluteContinuityViolation(1))
        );
    }

    #[test]
    fn works_in_single_precision() {
        let mu = DiscreteMeasure::<f32>::uniform(vec![0.0, 0.5, 1.0]).unwrap();
        let nu = DiscreteMeasure::<f32>::new(vec![0.0, 0.5, 1.0], vec![1.0, 2.0, 5.0]).unwrap();
        let r = observational_equivalence_report(
            |x: &f32, w: &f32| -(x - w).abs(),
            &mu,
            &nu,
            &[0, 1, 2],
        )
        .unwrap();
        assert!(r.same_argmax);
        assert!(r.objective_gap < 1e-6);
        assert!(kl_divergence(&nu, &mu).unwrap() > 0.0);
    }

    fn rational_instance() -> impl Strategy<Value = (Vec<i64>, Vec<i64>, Vec<i64>, Vec<i64>)> {
        (2usize..8).prop_flat_map(|n| {
            (
                proptest::collection::vec(0i64..20, n),
                proptest::collection::vec(1i64..20, n),
                proptest::collection::vec(-50i64..50, n * n),
                proptest::collection::vec(0usize..n, 1..=n)
                    .prop_map(|v| v.into_iter().map(|i| i as i64).collect()),
            )
        })
    }

    proptest! {
        #[test]
        fn change_of_measure_is_exact_in_rationals((nu_w, mu_w, gains, feas) in rational_instance()) {
            prop_assume!(nu_w.iter().any(|&w| w > 0));
            let n = nu_w.len();
            let support: Vec<BigRational> = (0..n as i64).map(|i| q(i, 1)).collect();
            let nu = DiscreteMeasure::new(support.clone(), nu_w.iter().map(|&w| q(w, 1)).collect()).unwrap();
            let mu = DiscreteMeasure::new(support, mu_w.iter().map(|&w| q(w, 1)).collect()).unwrap();
            let f = |x: &BigRational, w: &BigRational| {
                let (i, j) = (x.to_integer(), w.to_integer());
                let (i, j): (usize, usize) = (i.try_into().unwrap(), j.try_into().unwrap());
                q(gains[i * n + j], 7)
            };
            let feasible: Vec<usize> = feas.iter().map(|&i| i as usize).collect();
            let report = observational_equivalence_report(f, &mu, &nu, &feasible).unwrap();
            prop_assert_eq!(report.objective_gap, q(0, 1));
            prop_assert!(report.same_argmax);
            prop_assert_eq!(report.argmax_nu, report.argmax_mu);
        }

        #[test]
        fn kl_is_non_negative_and_zero_only_on_equality(
            p in proptest::collection::vec(0.0f64..1.0, 2..10),
            qv in proptest::collection::vec(0.01f64..1.0, 10),
        ) {
            prop_assume!(p.iter().sum::<f64>() > 0.0);
            let n = p.len();
            let support: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let pm = DiscreteMeasure::new(support.clone(), p).unwrap();
            let qm = DiscreteMeasure::new(support, qv[..n].to_vec()).unwrap();
            let d = kl_divergence(&pm, &qm).unwrap();
            prop_assert!(d >= 0.0);
            prop_assert_eq!(kl_divergence(&pm, &pm).unwrap(), 0.0);
            let max_diff = pm.mass().iter().zip(qm.mass()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if max_diff > 1e-3 {
                prop_assert!(d > 0.0);
            }
        }
    }
}
