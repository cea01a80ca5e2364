//! Declarative sweeps over qubit-network reservoirs: memory capacity, resonant
//! absorption, their rank correlation and Fig.-2-style readout traces.

pub mod config;
pub mod correlate;
pub mod emit;
pub mod simulate;
pub mod stats;
pub mod sweep;
pub mod timetrace;

use std::path::PathBuf;

/// Environment variable that sets the worker count when `--workers` is absent.
pub const WORKERS_ENV: &str = "QRC_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qrc_core::Error),
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
    #[error("{0}: {1}")]
    Csv(PathBuf, String),
    #[error("{0}")]
    Analysis(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl HarnessError {
    /// 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Worker count from the flag, else from [`WORKERS_ENV`], else rayon's default.
pub fn resolve_workers(flag: Option<usize>) -> Result<Option<usize>, HarnessError> {
    if let Some(n) = flag {
        return if n == 0 { Err(HarnessError::Config("--workers must be at least 1".into())) } else { Ok(Some(n)) };
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(HarnessError::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs `f` on a dedicated pool with `workers` threads (rayon's default if `None`).
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, HarnessError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| HarnessError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}
