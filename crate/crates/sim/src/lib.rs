//! Simulated users for the chair search protocol, the experiment runner that
//! drives them, and the nonparametric tests used to compare conditions.

pub mod error;
pub mod experiment;
pub mod silhouette;
pub mod stats;
pub mod user;

pub use error::{Result, SimError};
pub use experiment::{run_experiment, run_trial, Experiment, ExperimentConfig, MetricsRow, MetricsTable, TrialRecord, TrialRun};
pub use silhouette::{Silhouette, SilhouetteLibrary};
pub use stats::{friedman_test, FriedmanOutcome, PairwiseOutcome};
pub use user::{Noise, Strategy, TimeModel};
