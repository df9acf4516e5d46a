//! Floating-point scalar abstraction.
//!
//! All core math is generic over [`SimFloat`] so the same formulas run in
//! f32 or f64. The crate root exports `Scalar = f64`, which is what the
//! simulation harness instantiates.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rand::distr::uniform::SampleUniform;

/// Floating-point scalar usable throughout the simulator: f32 or f64.
pub trait SimFloat:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + SampleUniform
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl SimFloat for f32 {}
impl SimFloat for f64 {}

/// Converts an f64 constant into the working scalar type.
#[inline]
pub fn from_f64<F: SimFloat>(v: f64) -> F {
    F::from_f64(v).expect("f64 constant not representable in scalar type")
}

/// Converts the working scalar into f64 for display and serialization.
#[inline]
pub fn to_f64<F: SimFloat>(v: F) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Finite and strictly positive; rejects NaN.
#[inline]
pub fn positive<F: SimFloat>(v: F) -> bool {
    v.is_finite() && v > F::zero()
}
