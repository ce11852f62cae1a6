//! Scalar abstraction for the learned and ranked quantities.
//!
//! Resource ledgers are exact integers; everything derived from them that is
//! fed to the policy or to the multi-criteria ranking goes through [`Scalar`],
//! so the same code runs in `f32` or `f64`.

use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// A real number type usable by the feature, policy and ranking code.
pub trait Scalar: Float + FromPrimitive + ToPrimitive + Sum + Debug + Default + Send + Sync + 'static {
    /// Lossy conversion from `f64` (used for constants and sampled noise).
    fn of(value: f64) -> Self {
        <Self as FromPrimitive>::from_f64(value).expect("finite f64 constant")
    }

    fn of_u64(value: u64) -> Self {
        <Self as FromPrimitive>::from_u64(value).expect("u64 representable as float")
    }

    fn of_usize(value: usize) -> Self {
        <Self as FromPrimitive>::from_usize(value).expect("usize representable as float")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where T: Float + FromPrimitive + ToPrimitive + Sum + Debug + Default + Send + Sync + 'static {}
