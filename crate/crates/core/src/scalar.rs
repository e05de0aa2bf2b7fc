//! Numeric scalar abstraction shared by the generic data, embedding and
//! mapping code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the core algorithms are written against.
///
/// Implemented for `f32` and `f64`. Everything downstream of the network
/// substrate works in `f64`; the `f32` instantiation exists for memory-bound
/// callers that only need the transforms.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
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
    /// Converts an `f64` literal. Panics only if the target cannot represent
    /// finite `f64` values, which never happens for the provided impls.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("scalar literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("scalar from usize")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine-scale tolerance used for degenerate-range checks.
    fn tiny() -> Self;
}

impl Scalar for f32 {
    #[inline]
    fn tiny() -> Self {
        1e-12
    }
}

impl Scalar for f64 {
    #[inline]
    fn tiny() -> Self {
        1e-300
    }
}
