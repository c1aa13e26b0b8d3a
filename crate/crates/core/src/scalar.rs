//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar the physics is written against.
///
/// Implemented for `f32` and `f64`. Everything in the crate is generic over
/// this trait; the `*F64` aliases at the crate root pin the common choice.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + LowerExp
        + Default
        + Sum
        + Send
        + Sync
        + 'static
{
}

/// Shorthand for `T::lit`.
#[inline]
pub(crate) fn c<T: Real>(x: f64) -> T {
    T::lit(x)
}

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn i_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}
