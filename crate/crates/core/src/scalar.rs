//! Scalar abstraction for the numerical core.
//!
//! All closed-form machinery (special functions, quadrature, rate laws,
//! degree sums) is generic over [`Real`] so it runs in either `f32` or
//! `f64`. The simulator and everything downstream of random sampling is
//! concrete `f64`; re-exported aliases at the crate root pin the common
//! double-precision instantiations.

use core::fmt;
use core::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar with the constants and conversions the numerical
/// core relies on. Implemented for `f32` and `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Sum + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Euler–Mascheroni constant γ = 0.5772…
    fn euler_gamma() -> Self {
        Self::of(0.577_215_664_901_532_860_6)
    }

    /// Lossy conversion from an `f64` literal; panics only if the type
    /// cannot represent any finite approximation (never for f32/f64).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to any Real")
    }

    /// Conversion from a term index or count.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(|| Self::of(n as f64))
    }
}

impl Real for f32 {}
impl Real for f64 {}
