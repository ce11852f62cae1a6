//! Configuration, persistence and the command implementations behind the CLI.

pub mod commands;
pub mod config;
pub mod persist;

pub use commands::{
    cmd_compare, cmd_evaluate, cmd_generate, cmd_train, evaluate, generate, train_model, AlgorithmSummary, Comparison,
    RunSummary,
};
pub use config::{Algorithm, RunConfig, TrainingConfig};
pub use persist::{ModelArtifact, Scenario};
