use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] cluster_mbqc::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad config: {0}")]
    Config(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("bad file format: {0}")]
    Format(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const INVARIANT: i32 = 2;
    pub const CONVERGENCE: i32 = 3;
    pub const BAD_CONFIG: i32 = 4;
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> LabError {
        let path = path.into();
        move |source| LabError::Io { path, source }
    }

    pub fn exit_code(&self) -> i32 {
        use cluster_mbqc::Error as E;
        match self {
            LabError::Invariant(_) => exit::INVARIANT,
            LabError::Config(_) => exit::BAD_CONFIG,
            LabError::Core(E::Convergence { .. } | E::NotConverged) => exit::CONVERGENCE,
            LabError::Core(
                E::InvalidChain(_)
                | E::InvalidParams(_)
                | E::PhaseRange(_)
                | E::Schedule(_)
                | E::Parity(_)
                | E::Divisibility { .. }
                | E::Parse(_),
            ) => exit::BAD_CONFIG,
            _ => exit::FAILURE,
        }
    }
}
