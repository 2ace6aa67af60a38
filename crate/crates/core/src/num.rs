//! Scalar abstraction: every numeric kernel in this crate is generic over a
//! floating-point type.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar used for weights, attributes and all derived
/// quantities: `f32` or `f64`.
pub trait Real:
    Float + NumAssign + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + NumAssign + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

/// Converts an `f64` constant into the scalar type.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("constant not representable in scalar type")
}
