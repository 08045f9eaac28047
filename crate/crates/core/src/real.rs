//! Scalar abstraction for the approximation pipeline.
//!
//! All fitting and quantization math is generic over [`Real`], so the
//! pipeline runs with `f32` or `f64` coefficients. Concrete aliases for the
//! common instantiations live at the crate root.

use std::fmt;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar usable as the coefficient type of the pipeline.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + fmt::Debug
    + fmt::Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossless conversion from `f64` intermediates (fits accumulate in
    /// `f64` and convert back, which may round for narrower scalars).
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to any Real")
    }

    /// Nearest integer, ties away from zero.
    fn round_half_away(self) -> Self {
        self.round()
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + fmt::Debug
        + fmt::Display
        + Serialize
        + DeserializeOwned
        + Send
        + Sync
        + 'static
{
}

/// `2^bits` as an exact scalar.
pub fn pow2<R: Real>(bits: u8) -> R {
    R::from_u64(1u64 << bits).expect("2^bits fits a Real")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_ties_away_from_zero() {
        assert_eq!(0.5f64.round_half_away(), 1.0);
        assert_eq!((-0.5f64).round_half_away(), -1.0);
        assert_eq!((-2.4f64).round_half_away(), -2.0);
        assert_eq!(2.5f32.round_half_away(), 3.0);
    }

    #[test]
    fn pow2_exact() {
        assert_eq!(pow2::<f64>(24), 16_777_216.0);
        assert_eq!(pow2::<f32>(10), 1024.0);
    }
}
