//! Scalar abstraction: the metric computations are generic over `f32`/`f64`.

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the library computes with.
///
/// Implemented for `f32` and `f64`. All sums in this crate are sequential in
/// member order, so results for a fixed scalar type are bit-reproducible.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + core::ops::AddAssign
    + core::iter::Sum
    + core::fmt::Debug
    + core::fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Nearest representable value of an `f64` constant.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant")
    }

    /// Conversion of a count (exact for every count this crate produces).
    fn of_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// Stable bit pattern for hashing and deduplication. Widening `f32` to
    /// `f64` is lossless, so equal values map to equal keys on both scalars.
    fn key_bits(self) -> u64 {
        self.to_f64().map_or(u64::MAX, f64::to_bits)
    }
}

impl Real for f32 {}
impl Real for f64 {}
