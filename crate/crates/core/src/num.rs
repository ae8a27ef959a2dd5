//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar the phase-integral machinery is generic over.
///
/// Implemented for `f32` and `f64`. Literal constants are written as `f64`
/// and converted through [`Real::lit`].
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion used for diagnostics.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
}

/// Guard below which Q² is treated as a turning point (or forbidden).
pub const TURNING_POINT_GUARD: f64 = 1e-12;

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    /// The whole real line.
    pub fn real_line() -> Self {
        Self::new(T::neg_infinity(), T::infinity())
    }

    /// `(0, ∞)`.
    pub fn positive() -> Self {
        Self::new(T::zero(), T::infinity())
    }

    /// Strict containment.
    pub fn contains(&self, z: T) -> bool {
        z > self.lo && z < self.hi
    }

    /// Containment in the closure `[lo, hi]`.
    pub fn closure_contains(&self, z: T) -> bool {
        z >= self.lo && z <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}
