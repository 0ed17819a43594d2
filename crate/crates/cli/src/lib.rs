//! Command-line layer for shocklab: run configuration, figure presets,
//! the five subcommands and their file output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;

pub use commands::{execute, Command};
pub use config::{parse_config, parse_coupling_key, RunConfig};
pub use error::{CliError, CliResult};
pub use output::{write_outcome, Outcome, ResultBundle, Table};
pub use presets::Preset;
