use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the clustering library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("spherical mode requires unit-norm input (got norm {0})")]
    NotUnitNorm(f64),

    #[error("degenerate spherical update: pre-normalization norm {0} below 1e-12")]
    DegenerateNorm(f64),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("silhouette undefined: all points share one cluster")]
    SingleCluster,

    #[error("label vectors differ in length: {0} vs {1}")]
    LabelLengthMismatch(usize, usize),

    #[error("requested {k} clusters from {n} points")]
    TooManyClusters { k: usize, n: usize },

    #[error("all restarts diverged to non-finite loss")]
    AllRestartsFailed,

    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("model file schema version {got} unsupported (expected {expected})")]
    SchemaMismatch { expected: u32, got: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
