//! Floating-point scalar abstraction.
//!
//! Every numerical routine in the crate is generic over [`Real`], which is
//! implemented for `f32` and `f64`. The crate root exposes `f64` aliases for
//! the common case.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, NumAssign};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar type backing the complex entries of every operator.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Predicate tolerance appropriate for the precision.
    fn default_tol() -> Self;

    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self;

    fn as_f64(self) -> f64;
}

impl Real for f64 {
    fn default_tol() -> Self {
        1e-9
    }

    fn lit(x: f64) -> Self {
        x
    }

    fn as_f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    fn default_tol() -> Self {
        1e-4
    }

    fn lit(x: f64) -> Self {
        x as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }
}

/// Complex number with real part `re`.
#[inline]
pub fn re<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Complex literal from `f64` parts.
#[inline]
pub fn cplx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}
