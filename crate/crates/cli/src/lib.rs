//! Scenario files, command implementations and result writers behind the
//! `tecsim` binary.

pub mod commands;
pub mod config;
pub mod convergence;
pub mod error;
pub mod expr;
pub mod output;

pub use config::{load_config, parse_config, ScenarioConfig};
pub use error::{CliError, Result};
