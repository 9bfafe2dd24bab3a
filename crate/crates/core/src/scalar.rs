//! Scalar abstraction.
//!
//! Exact path algebra (event paths, time changes, rescaling) only needs an
//! ordered field, so it is written against [`Scalar`] and works with
//! rationals. Everything that needs transcendental functions or variates
//! (mechanisms, samplers, metrics) asks for [`Real`].

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Ordered field element: `f32`, `f64` or an exact rational.
pub trait Scalar:
    Num + PartialOrd + Copy + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; panics only if the type cannot represent
    /// small constants such as `0.5`, which no supported type does.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("scalar literal out of range")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn abs_val(self) -> Self {
        if self < Self::zero() {
            Self::zero() - self
        } else {
            self
        }
    }

    fn max_val(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_val(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl<T> Scalar for T where
    T: Num + PartialOrd + Copy + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

/// Floating point scalar (`f32` or `f64`).
pub trait Real: Scalar + Float {}

impl<T: Scalar + Float> Real for T {}
