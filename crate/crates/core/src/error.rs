use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{source_name}: row {row}: {message}")]
    Schema {
        source_name: String,
        row: u64,
        message: String,
    },

    #[error("{source_name}: row {row}: unknown {kind} {id:?}")]
    DanglingReference {
        source_name: String,
        row: u64,
        kind: &'static str,
        id: String,
    },

    #[error("{source_name}: row {row}: duplicate {kind} {id:?}")]
    DuplicateId {
        source_name: String,
        row: u64,
        kind: &'static str,
        id: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("too few observations: {0}")]
    TooFewObservations(String),

    #[error("optimizer did not converge after {iterations} iterations (best log-likelihood {best_log_likelihood}, parameters {parameters:?})")]
    NonConvergence {
        iterations: usize,
        best_log_likelihood: f64,
        parameters: Vec<f64>,
    },

    #[error("quadrature did not converge on [{lower}, {upper}] (error estimate {error_estimate:e})")]
    Quadrature {
        lower: f64,
        upper: f64,
        error_estimate: f64,
    },

    #[error("no detections left after filtering and truncation")]
    NoDetections,

    #[error("bootstrap: {0}")]
    Bootstrap(String),

    #[error("cannot compare estimates: {0}")]
    Comparison(String),

    #[error("average precision undefined: {0}")]
    NoPositives(String),

    #[error("insufficient views: need {required}, got {available}")]
    InsufficientViews { required: usize, available: usize },

    #[error("degenerate triangulation geometry: {0}")]
    DegenerateGeometry(String),

    #[error("degenerate head frame: {0}")]
    DegenerateFrame(String),

    #[error("nothing to evaluate: {0}")]
    Empty(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
