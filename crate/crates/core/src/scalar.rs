//! Scalar abstraction for the numerical core.
//!
//! Every algorithm in this crate is written against [`Real`] so the same code
//! instantiates at `f32` and `f64`. Literal constants go through [`real`],
//! which converts an `f64` literal into the working scalar.

use nalgebra as na;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the numerical core.
///
/// A blanket trait over the [`nalgebra::RealField`] + [`num_traits`]
/// machinery this crate needs; implemented for `f32` and `f64`.
pub trait Real:
    na::RealField + FromPrimitive + ToPrimitive + Copy + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the working scalar type.
///
/// # Example
/// ```
/// use continuum_dynamics::scalar::real;
/// let half: f32 = real(0.5);
/// assert_eq!(half, 0.5f32);
/// ```
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal must convert into the working scalar")
}

/// Converts a working scalar back to `f64` (for diagnostics and errors).
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_roundtrip_both_precisions() {
        assert_eq!(real::<f64>(1.25), 1.25);
        assert_eq!(real::<f32>(1.25), 1.25f32);
        assert_eq!(to_f64(real::<f32>(-3.5)), -3.5);
    }
}
