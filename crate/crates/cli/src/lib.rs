//! Config parsing and the scenario runner behind the `backflow` binary.

pub mod config;
pub mod scenario;

pub use config::{parse_config, ConfigError, EigenMode, Kind, ScenarioConfig};
pub use scenario::{run_scenario, Manifest, RunError};
