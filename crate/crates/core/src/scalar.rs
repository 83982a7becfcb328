//! Scalar abstractions shared by the measure and model code.
//!
//! [`Scalar`] is the field the change-of-measure routines run over: `f32`,
//! `f64`, and exact rationals ([`num_rational::BigRational`]) all qualify.
//! Anything that needs logarithms or exponentials additionally asks for
//! [`num_traits::Float`], which only the floating types provide.

use std::fmt::Debug;

use num_traits::{Num, Signed, ToPrimitive};

/// An ordered field element usable as probability mass, density and gain.
pub trait Scalar: Num + Signed + Clone + PartialOrd + ToPrimitive + Debug {
    /// Lossy conversion for reporting.
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where T: Num + Signed + Clone + PartialOrd + ToPrimitive + Debug {}

/// Sum of a sequence of scalars, starting from zero.
pub fn sum<'a, S: Scalar + 'a>(values: impl IntoIterator<Item = &'a S>) -> S {
    values.into_iter().fold(S::zero(), |acc, v| acc + v.clone())
}

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: Scalar + num_traits::Float + num_traits::FromPrimitive + Copy {}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the target float type.
pub(crate) fn lit<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("literal representable in every Real")
}
