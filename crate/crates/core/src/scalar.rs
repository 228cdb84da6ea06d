//! Scalar abstractions for the analytic code.
//!
//! [`Scalar`] is enough for field arithmetic (ruin probabilities, the
//! birth-death linear solve) and is implemented by `f32`, `f64` and
//! [`BigRational`](num_rational::BigRational). [`Real`] adds the transcendental
//! functions needed by moment generating functions and tail bounds.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num};

pub trait Scalar: Num + Clone + PartialOrd + FromPrimitive + Debug {}

impl<T> Scalar for T where T: Num + Clone + PartialOrd + FromPrimitive + Debug {}

pub trait Real: Scalar + Float {}

impl<T> Real for T where T: Scalar + Float {}

/// Small integer literal in any scalar type.
#[inline]
pub fn lit<T: Scalar>(value: i64) -> T {
    T::from_i64(value).expect("integer literal representable in scalar type")
}

/// `numer / denom` in any scalar type, exact for rationals.
#[inline]
pub fn frac<T: Scalar>(numer: i64, denom: i64) -> T {
    lit::<T>(numer) / lit::<T>(denom)
}

/// Integer power by repeated squaring; exact for rationals.
pub fn powi<T: Scalar>(base: T, exp: u32) -> T {
    num_traits::pow(base, exp as usize)
}
