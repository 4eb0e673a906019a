//! Experiment manifests and the commands behind the `acma` binary.

pub mod commands;
pub mod manifest;

pub use commands::{execute, Overrides, Summary};
pub use manifest::{parse_config, parse_str, Command, CliError, RunManifest};
