//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// Complex quantities are always `num_complex::Complex<T>` over one of these.
pub trait Real:
    RealField + crate::linalg::SvdScalar + Copy + FromPrimitive + ToPrimitive + Default + fmt::Display + Send + Sync + 'static
{
    /// Relative singular-value cutoff for rank decisions (null spaces, pseudo-inverses).
    fn rank_tolerance() -> Self;

    /// Absolute tolerance for structural checks such as Hermiticity or a vanishing
    /// imaginary part.
    fn check_tolerance() -> Self;

    /// Unit roundoff, used as the truncation target of series expansions.
    fn unit_roundoff() -> Self;

    /// Converts an `f64` literal. Every value the crate feeds through here is finite
    /// and representable, so this never fails for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Real for f64 {
    fn rank_tolerance() -> Self {
        1e-10
    }

    fn check_tolerance() -> Self {
        1e-10
    }

    fn unit_roundoff() -> Self {
        f64::EPSILON / 2.0
    }
}

impl Real for f32 {
    fn rank_tolerance() -> Self {
        1e-5
    }

    fn check_tolerance() -> Self {
        1e-4
    }

    fn unit_roundoff() -> Self {
        f32::EPSILON / 2.0
    }
}
