use core::fmt::{Debug, Display};
use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the engine is generic over.
///
/// Implemented by `f32` and `f64`. The tolerances promised in the crate docs
/// (1e-10 .. 1e-14) hold for `f64`; iterative kernels stop on criteria scaled
/// by `T::epsilon()`, so `f32` degrades gracefully instead of looping.
pub trait Real: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Lift an `f64` constant into `T`.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("numeric constant not representable in scalar type")
    }

    /// Lift a count into `T`.
    #[inline]
    fn count(v: usize) -> Self {
        Self::from_usize(v).expect("count not representable in scalar type")
    }

    /// `self` as `f64`, for diagnostics and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl<T> Real for T where T: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}
