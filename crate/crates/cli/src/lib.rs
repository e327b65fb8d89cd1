//! File formats, checkpoints, configuration and the batch front end for
//! `morphlab-core`.

pub mod app;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod files;
pub mod pipeline;
pub mod saved;

pub use app::{run, Cli, Command};
pub use error::CliError;
