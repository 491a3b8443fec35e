//! Scalar abstraction for the numerical core.
//!
//! Everything in this crate is generic over a real scalar type implementing
//! [`Real`]; `f32` and `f64` both qualify. Concrete `f64` aliases for the
//! main types live at the crate root.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar usable throughout the crate: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, for literals and tolerances.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must convert to scalar type")
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
}
