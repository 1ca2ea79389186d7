//! Scenario layer for the driven junction: presets, configuration files,
//! run/sweep/analyze pipelines and their on-disk outputs.

pub mod config;
pub mod error;
pub mod output;
pub mod preset;
pub mod report;
pub mod run;
pub mod sweep;

pub use config::ScenarioConfig;
pub use error::{LabError, Result};
pub use report::{Comparison, RunReport};
