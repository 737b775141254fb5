//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra as na;
use num_traits as nt;

/// Floating point scalar the solver is generic over (`f32`, `f64`).
///
/// Elementary functions come from [`na::RealField`]; conversions and
/// constants come from num-traits.
pub trait Real:
    na::RealField
    + Copy
    + nt::FromPrimitive
    + nt::ToPrimitive
    + nt::FloatConst
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as nt::FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as nt::FromPrimitive>::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        <Self as nt::ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// A point or vector in the plane.
pub type Vec2<T> = na::Vector2<T>;
/// A 2x2 matrix (Jacobians and their inverses).
pub type Mat2<T> = na::Matrix2<T>;
