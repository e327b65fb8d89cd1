use std::path::PathBuf;

use morphlab_core::dataset::DatasetError;
use morphlab_core::ed_model::EdError;
use morphlab_core::experiments::ExperimentError;
use morphlab_core::phonology::PhonologyError;
use morphlab_core::rm_model::RmError;

use crate::checkpoint::CheckpointError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Dataset { path: PathBuf, source: DatasetError },
    #[error("{}: {source}", path.display())]
    Phonology { path: PathBuf, source: PhonologyError },
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Checkpoint { path: PathBuf, source: CheckpointError },
    #[error(transparent)]
    Ed(#[from] EdError),
    #[error(transparent)]
    Rm(#[from] RmError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Split(#[from] DatasetError),
}

impl CliError {
    /// 2 for usage, configuration and file problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_)
            | CliError::Io { .. }
            | CliError::Dataset { .. }
            | CliError::Phonology { .. }
            | CliError::Config(_)
            | CliError::Checkpoint { .. } => 2,
            CliError::Ed(_) | CliError::Rm(_) | CliError::Experiment(_) | CliError::Split(_) => 1,
        }
    }
}
