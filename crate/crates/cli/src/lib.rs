//! Library side of the `aon` command-line tool: configuration, grids,
//! command implementations and report emission.

pub mod commands;
pub mod config;
pub mod grid;
pub mod output;
pub mod verify;

pub use config::{parse_config, ConfigError, ExperimentConfig, Format};
pub use grid::parse_rational_grid;
