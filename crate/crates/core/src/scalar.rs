//! Real scalar abstraction for the geometric kernel.
//!
//! Everything numeric in the library is written against [`Real`], which is
//! `num_traits::Float` plus the conversions the construction needs. `f64` is
//! what the harness and the acceptance tolerances are calibrated for; `f32`
//! satisfies the same contracts at correspondingly loose tolerances and is
//! exercised only by smoke tests.

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar the library is generic over.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Shorthand for converting an `f64` literal into the scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal converts into any Real")
    }

    /// Lossy view of the scalar as `f64` (exact for f32/f64).
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over the generic real type.
pub type C<R> = Complex<R>;

/// `0 + 0i` in the generic scalar.
#[inline]
pub fn czero<R: Real>() -> C<R> {
    Complex::new(R::zero(), R::zero())
}

/// `1 + 0i` in the generic scalar.
#[inline]
pub fn cone<R: Real>() -> C<R> {
    Complex::new(R::one(), R::zero())
}

/// Complex number from `f64` parts.
#[inline]
pub fn c64<R: Real>(re: f64, im: f64) -> C<R> {
    Complex::new(R::of(re), R::of(im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_conversion_is_exact_for_f64() {
        assert_eq!(f64::of(1.25), 1.25);
        assert_eq!(f64::of(-3.5e-9), -3.5e-9);
    }

    #[test]
    fn complex_helpers() {
        let z: C<f64> = c64(2.0, -1.0);
        assert_eq!(z.re, 2.0);
        assert_eq!(z.im, -1.0);
        assert_eq!(czero::<f32>(), Complex::new(0.0f32, 0.0));
        assert_eq!(cone::<f64>(), Complex::new(1.0, 0.0));
    }
}
