//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the regression, emulation and ingestion code is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances are derived from the type's
/// machine epsilon so the same algorithms run in single precision, only less
/// tightly.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Every `f64` is representable (possibly rounded) in
    /// the supported types, so this never fails.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    /// Tolerance for "probabilities sum to one" checks: `1e-9`, or a small
    /// multiple of epsilon when the type cannot resolve `1e-9`.
    fn normalization_tolerance() -> Self {
        let eps = Self::epsilon() * Self::lit(64.0);
        eps.max(Self::lit(1e-9))
    }

    /// Optimality tolerance used by the simplex pricing step.
    fn optimality_tolerance() -> Self {
        Self::epsilon().sqrt() * Self::lit(0.1)
    }

    /// Minimum magnitude of an admissible pivot element.
    fn pivot_tolerance() -> Self {
        Self::epsilon().powf(Self::lit(2.0 / 3.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
