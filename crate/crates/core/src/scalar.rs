//! Scalar abstraction shared by every construction in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
///
/// Tolerances scale with the precision of the type. The `f64` values are the
/// contractual ones (atom matching 1e-12, masses 1e-12, integrals 1e-9).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Two atom locations closer than this are the same atom.
    fn atom_tol() -> Self;
    /// Slack allowed on total probability mass.
    fn mass_tol() -> Self;
    /// Slack allowed on integrals of densities.
    fn integral_tol() -> Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `2^e` for possibly very negative `e` (subnormals allowed, never panics).
    #[inline]
    fn exp2i(e: i32) -> Self {
        Self::lit(2f64.powi(e))
    }
}

impl Real for f64 {
    fn atom_tol() -> Self {
        1e-12
    }
    fn mass_tol() -> Self {
        1e-12
    }
    fn integral_tol() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn atom_tol() -> Self {
        1e-6
    }
    fn mass_tol() -> Self {
        1e-5
    }
    fn integral_tol() -> Self {
        1e-4
    }
}

/// Key used to merge atom locations: the location rounded to the atom tolerance grid.
#[inline]
pub(crate) fn atom_key<T: Real>(x: T) -> i64 {
    (x / T::atom_tol()).round().to_i64().unwrap_or(i64::MAX)
}
