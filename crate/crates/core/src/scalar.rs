//! Scalar abstraction: everything in this crate is generic over the real
//! floating-point type through this trait, so the whole pipeline can run in
//! `f32` or `f64` (the reference experiments use `f64`).

use num_complex::Complex;

/// Real scalar type usable throughout the simulator.
///
/// This is a convenience umbrella over the `nalgebra`/`num-traits` machinery
/// we actually rely on: field arithmetic and elementary functions from
/// [`nalgebra::RealField`], IEEE queries (`is_finite`, NaN checks) from
/// [`num_traits::Float`], and literal conversion from
/// [`num_traits::FromPrimitive`]. Implemented for `f32` and `f64` via the
/// blanket impl.
pub trait Real:
    nalgebra::RealField + num_traits::Float + num_traits::FromPrimitive + num_traits::ToPrimitive + Copy
{
    /// Converts an `f64` literal into `Self`.
    ///
    /// Tolerances and reference parameters are written as `f64` literals; they
    /// are all exactly representable (or representable to within rounding) in
    /// `f32` as well, so the unwrap cannot fire for the supported scalars.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in this scalar type")
    }

    /// `Self` as `f64`, for diagnostics and error payloads.
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: nalgebra::RealField
        + num_traits::Float
        + num_traits::FromPrimitive
        + num_traits::ToPrimitive
        + Copy
{
}

/// Absolute value, disambiguated (both `Float` and `RealField` define `abs`).
#[inline]
pub(crate) fn fabs<T: Real>(x: T) -> T {
    num_traits::Float::abs(x)
}

/// Binary maximum, disambiguated for the same reason as [`fabs`].
#[inline]
pub(crate) fn fmax<T: Real>(a: T, b: T) -> T {
    if a > b {
        a
    } else {
        b
    }
}

/// Magnitude of the larger component of a complex number; cheap elementwise
/// residue metric used by the Hermiticity and comparison checks.
#[inline]
pub(crate) fn cabs_inf<T: Real>(z: Complex<T>) -> T {
    fmax(fabs(z.re), fabs(z.im))
}
