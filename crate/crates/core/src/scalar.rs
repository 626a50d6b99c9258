//! The floating-point scalar abstraction shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type the numerical kernels are generic over.
///
/// Implemented for `f32` and `f64`. All tolerances are expressed through
/// [`Scalar::lit`] and [`Scalar::floor_tol`] so that they stay meaningful
/// when the machine epsilon changes.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    /// Converts a count into `Self`.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// `max(v, factor * epsilon)`: a tolerance that is `v` in double precision
    /// but never drops below the rounding floor of narrower types.
    #[inline]
    fn floor_tol(v: f64, factor: f64) -> Self {
        Self::lit(v).max(Self::lit(factor) * Self::epsilon())
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}
