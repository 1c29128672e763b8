//! Command-line driver for the two-photon interference imaging simulator:
//! configuration files, experiment presets and file-level workflows.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod presets;

pub use cli::{run, Cli};
pub use config::RunConfig;
pub use error::{CliError, CliResult};
