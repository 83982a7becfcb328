//! Deterministic randomness, exact frequencies and populations.
//!
//! # Generator
//!
//! [`RngState`] is **xorshift64\*** (Vigna, 2016) over a single `u64` word:
//!
//! ```text
//! x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27;
//! out = x * 0x2545_F491_4F6C_DD1D
//! ```
//!
//! Seeds pass through one round of **splitmix64** (increment
//! `0x9E37_79B9_7F4A_7C15`, multipliers `0xBF58_476D_1CE4_E5B9` and
//! `0x94D0_49BB_1331_11EB`) so that nearby seeds give unrelated streams. A
//! uniform variate in `[0, 1)` takes the top 53 bits of the output. All of
//! this is integer arithmetic, so streams are identical on every platform.
//!
//! There is no global generator; every consumer threads an `RngState`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const XORSHIFT_MULT: u64 = 0x2545_F491_4F6C_DD1D;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbError {
    #[error("probability {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("empirical distribution of an empty population is undefined")]
    EmptyPopulation,
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Checks that `p` is a probability.
pub fn check_probability(p: f64) -> Result<f64, ProbError> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(ProbError::OutOfRange(p))
    }
}

/// Opaque xorshift64* state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngState {
    state: u64,
}

impl RngState {
    pub fn from_seed(seed: u64) -> Self {
        Self::from_mixed(splitmix64(seed))
    }

    /// Independent stream `index` for replication under a master `seed`.
    ///
    /// `seed + (index + 1) * gamma` is injective in `index` and splitmix64 is a
    /// bijection, so distinct indices give distinct states.
    pub fn derive(seed: u64, index: u64) -> Self {
        let offset = index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA);
        Self::from_mixed(splitmix64(seed.wrapping_add(offset)))
    }

    fn from_mixed(state: u64) -> Self {
        // xorshift has a fixed point at zero.
        let state = if state == 0 { GOLDEN_GAMMA } else { state };
        Self { state }
    }

    pub fn raw(&self) -> u64 {
        self.state
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(XORSHIFT_MULT)
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[0, n)`; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        // Lemire's multiply-shift; bias is < n / 2^64, irrelevant here.
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// One Bernoulli(p) draw, advancing the state in place.
    pub fn bernoulli(&mut self, p: f64) -> Result<bool, ProbError> {
        check_probability(p)?;
        Ok(self.next_f64() < p)
    }
}

/// Functional form of [`RngState::bernoulli`]: returns the outcome and the
/// advanced state, leaving the input untouched.
pub fn next_bernoulli(state: RngState, p: f64) -> Result<(bool, RngState), ProbError> {
    let mut next = state;
    let outcome = next.bernoulli(p)?;
    Ok((outcome, next))
}

/// A relative frequency kept as exact counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frequency {
    pub hits: u64,
    pub trials: u64,
}

impl Frequency {
    pub fn new(hits: u64, trials: u64) -> Self {
        debug_assert!(hits <= trials);
        Self { hits, trials }
    }

    /// Exact value; `None` when there were no trials.
    pub fn ratio(&self) -> Option<Ratio<u64>> {
        (self.trials > 0).then(|| Ratio::new(self.hits, self.trials))
    }

    /// The single rounding step from counts to a float; NaN for 0/0.
    pub fn value(&self) -> f64 {
        if self.trials == 0 {
            f64::NAN
        } else {
            self.hits as f64 / self.trials as f64
        }
    }
}

/// A finite population of events tagged with a 0/1 attribute indicator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Population {
    pub indicators: Vec<bool>,
    pub attribute_label: String,
}

impl Population {
    pub fn new(indicators: Vec<bool>, attribute_label: impl Into<String>) -> Self {
        Self {
            indicators,
            attribute_label: attribute_label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.indicators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indicators.is_empty()
    }
}

/// `(1/k) * sum of indicators`, counted exactly.
pub fn empirical_distribution(pop: &Population) -> Result<Frequency, ProbError> {
    if pop.is_empty() {
        return Err(ProbError::EmptyPopulation);
    }
    let hits = pop.indicators.iter().filter(|&&b| b).count() as u64;
    Ok(Frequency::new(hits, pop.len() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_probabilities() {
        let mut rng = RngState::from_seed(1);
        for _ in 0..10_000 {
            assert!(!rng.bernoulli(0.0).unwrap());
            assert!(rng.bernoulli(1.0).unwrap());
        }
    }

    #[test]
    fn out_of_range_probability() {
        let rng = RngState::from_seed(1);
        assert_eq!(next_bernoulli(rng, 1.2), Err(ProbError::OutOfRange(1.2)));
        assert!(next_bernoulli(rng, -0.1).is_err());
        assert!(next_bernoulli(rng, f64::NAN).is_err());
    }

    #[test]
    fn functional_draw_does_not_mutate_input() {
        let rng = RngState::from_seed(9);
        let (a, next) = next_bernoulli(rng, 0.5).unwrap();
        let (b, _) = next_bernoulli(rng, 0.5).unwrap();
        assert_eq!(a, b);
        assert_ne!(rng, next);
    }

    #[test]
    fn fair_coin_golden_mean() {
        let mut rng = RngState::from_seed(42);
        let hits = (0..100_000).filter(|_| rng.bernoulli(0.5).unwrap()).count();
        // CLT band: 3 * sqrt(0.25 / 1e5) ~ 0.0047.
        let mean = hits as f64 / 100_000.0;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
        // Frozen; cross-checked against an independent reimplementation.
        assert_eq!(hits, 49_738);
    }

    #[test]
    fn reference_stream_is_frozen() {
        // Guards the documented algorithm: any change to the seeder or the
        // xorshift constants changes these words.
        let mut rng = RngState::from_seed(0);
        let words: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        let mut manual = splitmix64(0);
        let expected: Vec<u64> = (0..3)
            .map(|_| {
                manual ^= manual >> 12;
                manual ^= manual << 25;
                manual ^= manual >> 27;
                manual.wrapping_mul(XORSHIFT_MULT)
            })
            .collect();
        assert_eq!(words, expected);
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn derived_streams_are_distinct() {
        let states: std::collections::HashSet<u64> =
            (0..10_000).map(|i| RngState::derive(7, i).raw()).collect();
        assert_eq!(states.len(), 10_000);
    }

    #[test]
    fn empirical_distribution_examples() {
        let all = Population::new(vec![true; 4], "x");
        assert_eq!(empirical_distribution(&all).unwrap().value(), 1.0);
        let half = Population::new(vec![true, false, true, false], "x");
        let f = empirical_distribution(&half).unwrap();
        assert_eq!(f.ratio(), Some(Ratio::new(1, 2)));
        assert_eq!(f.value(), 0.5);
        assert_eq!(
            empirical_distribution(&Population::new(vec![], "x")),
            Err(ProbError::EmptyPopulation)
        );
    }

    #[test]
    fn alternating_population_averages_the_two_regimes() {
        let mut rng = RngState::from_seed(3);
        let indicators = (0..200_000)
            .map(|t| rng.bernoulli(if t % 2 == 0 { 0.2 } else { 0.8 }).unwrap())
            .collect();
        let f = empirical_distribution(&Population::new(indicators, "x")).unwrap();
        assert!((f.value() - 0.5).abs() < 0.01);
    }

    #[test]
    fn below_stays_in_range() {
        let mut rng = RngState::from_seed(5);
        for n in 1..50 {
            for _ in 0..100 {
                assert!(rng.below(n) < n);
            }
        }
    }
}
