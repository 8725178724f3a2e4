//! Scalar abstraction for the pure numerical kernels.
//!
//! Samplers, simulators and the surrogate fits work in `f64`; distance
//! functions, smoothing kernels, quantile functions and weight
//! diagnostics are written against [`Real`] so they can also be used
//! with `f32` inputs.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossless-enough conversion of an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count fits scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}
