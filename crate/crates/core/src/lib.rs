//! Secure, resource-constrained virtual network embedding.
//!
//! Virtual network requests with CPU, storage, security and bandwidth
//! demands arrive over time and are embedded onto a capacitated substrate.
//! Node placement is driven by a small policy network trained with a
//! policy-gradient rule; links are routed over minimum-hop bandwidth
//! feasible paths. Reference heuristics, metrics and a CLI harness for
//! generating scenarios, training, evaluating and comparing are included.
//!
//! Learned and ranked quantities are generic over [`Scalar`]; the aliases
//! below fix them to `f64`.

pub mod baselines;
pub mod embedding;
pub mod error;
pub mod features;
pub mod harness;
pub mod metrics;
pub mod network;
pub mod policy;
pub mod scalar;
pub mod scenario;
pub mod simulation;

pub use error::{Result, VneError};
pub use scalar::Scalar;

pub type PolicyParams = policy::PolicyParams<f64>;
pub type Decision = policy::Decision<f64>;
pub type GradientAccumulator = policy::GradientAccumulator<f64>;
pub type FeatureMatrix = features::FeatureMatrix<f64>;
pub type RankingCriteria = baselines::RankingCriteria<f64>;
pub type TopsisMapper = baselines::TopsisMapper<f64>;

pub type PolicyParams32 = policy::PolicyParams<f32>;
pub type FeatureMatrix32 = features::FeatureMatrix<f32>;
