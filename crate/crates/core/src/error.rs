use thiserror::Error;

/// Errors produced anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("dimension mismatch: {left} vs {right} samples")]
    Dimension { left: usize, right: usize },

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("cutoff {cutoff} aliases on a grid of {n} samples (need cutoff < n/2)")]
    Aliasing { cutoff: usize, n: usize },

    #[error("ratio undefined for an identically zero input")]
    UndefinedRatio,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("winding number ill-conditioned: min |gamma| = {min_modulus:.3e}, max |gamma| = {max_modulus:.3e}")]
    IllConditionedWinding { min_modulus: f64, max_modulus: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("unsupported domain kind for {0}")]
    UnsupportedKind(&'static str),

    #[error("boundary data has no mode above tolerance")]
    ZeroFunction,

    #[error("need m < K: requested {requested} derivatives from a band of {cutoff} modes")]
    InsufficientBand { requested: usize, cutoff: usize },

    #[error("linear solver failed after {iterations} iterations (relative residual {residual:.3e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("experiment `{experiment}` failed: {source}")]
    Experiment {
        experiment: String,
        #[source]
        source: Box<LabError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
