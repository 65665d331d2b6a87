use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar used for probabilities, influence values, and the
/// closed-form parameter formulas. Implemented for `f32` and `f64`; everything
/// in this crate defaults to `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Draws a uniform sample from `[0, 1)`.
    fn sample_unit<R: rand::Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossless-enough conversion for counts and sizes.
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize representable as scalar")
    }
}

impl Scalar for f32 {
    fn sample_unit<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random()
    }
}

impl Scalar for f64 {
    fn sample_unit<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random()
    }
}
