//! Scalar abstraction shared by every geometric routine.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the geometry is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_f64(n as f64).expect("usize representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Reduces `x` into `[0, 1)`.
pub fn wrap_unit<S: Real>(x: S) -> S {
    let y = x - x.floor();
    // x slightly below an integer can round up to exactly 1
    if y >= S::one() {
        S::zero()
    } else {
        y
    }
}

/// Signed minimal-image offset of `x` in `[-1/2, 1/2)`.
pub fn wrap_signed<S: Real>(x: S) -> S {
    let half = S::lit(0.5);
    wrap_unit(x + half) - half
}
