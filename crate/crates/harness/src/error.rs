use std::path::PathBuf;

use gafzeros_core::ensembles::SeedRecord;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    /// A trial failed; `seed` replays it with `gafzeros sample`.
    #[error("trial {} (master seed {}) failed: {source}", seed.trial_index, seed.master_seed)]
    Trial { seed: SeedRecord, source: gafzeros_core::Error },
    #[error(transparent)]
    Numerical(#[from] gafzeros_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// `2` for usage errors, `3` for everything that went wrong while computing
    /// or writing results.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 2,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| HarnessError::Io { path, source }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn usage(msg: impl Into<String>) -> HarnessError {
    HarnessError::Usage(msg.into())
}
