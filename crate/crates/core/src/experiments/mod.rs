//! Runners for the tower, mover and benchmark studies.

pub mod bench;
pub mod blueprint;
pub mod config;
pub mod mover;
pub mod runlog;
pub mod tower;

pub use config::{BackendSpec, ExperimentConfig, Task};
pub use runlog::{GenerationRecord, RunLog};

use thiserror::Error;

use crate::backend::BackendError;
use crate::evolution::{EsError, GaError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Es(#[from] EsError),
    #[error(transparent)]
    Ga(#[from] GaError),
}
