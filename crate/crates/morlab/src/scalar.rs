//! Floating-point scalar abstraction: the whole library is generic over the
//! value type, with `f64` aliases exported at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar type for probabilities, rewards and values: `f32` or `f64`.
///
/// The built-in environments use probabilities with no exact binary
/// representation (0.9, 0.85, ...), so the documented tolerances only hold
/// for `f64`; `f32` is supported for environments whose constants fit it.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum<Self> + Debug + Display + Default + Send + Sync + 'static
{
    /// Shorthand for lossless-enough conversion from an `f64` literal.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 constant representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Sum<T>
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn implemented_for_both_float_widths() {
        fn takes_scalar<F: Scalar>(x: F) -> f64 {
            x.to_f64_lossy()
        }
        assert_eq!(takes_scalar(1.5f32), 1.5);
        assert_eq!(takes_scalar(1.5f64), 1.5);
    }
}
