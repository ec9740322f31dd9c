//! Benchmark harness for the birkhoff solver: benchmark matrices, data
//! profiles, heatmap and error-scan files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod files;
pub mod matrix;
pub mod profile;

use thiserror::Error;

/// Version stamped into every emitted file.
pub const SCHEMA_VERSION: u32 = 1;

/// Default seed when neither the command line nor `BDFO_SEED` gives one.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] birkhoff::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

/// `BDFO_SEED` when set and parseable, otherwise [`DEFAULT_SEED`].
pub fn env_seed() -> Result<u64> {
    match std::env::var("BDFO_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| {
            BenchError::Usage(format!("BDFO_SEED must be an unsigned integer, got `{s}`"))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}
