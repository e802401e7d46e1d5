use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{primitive}: shape mismatch between {lhs:?} and {rhs:?}")]
    ShapeMismatch {
        primitive: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },
    #[error("{primitive}: expected {expected} input(s), got {got}")]
    Arity {
        primitive: &'static str,
        expected: String,
        got: usize,
    },
    #[error("{primitive}: {msg}")]
    InvalidArgument {
        primitive: &'static str,
        msg: String,
    },
    #[error("unknown primitive tag `{0}`")]
    UnknownPrimitive(String),
    #[error("backward requires a scalar loss, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),
    #[error("shape {shape:?} implies {expected} elements, data has {len}")]
    ShapeData {
        shape: Vec<usize>,
        expected: usize,
        len: usize,
    },
    #[error("graph builder is not deterministic: {0} vs {1}")]
    NonDeterministic(f64, f64),
    #[error("parameter `{0}` has no gradient")]
    MissingGrad(String),
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("{path}:{line}: {msg}")]
    CsvRow {
        path: String,
        line: u64,
        msg: String,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("infeasible target rates: {0}")]
    InfeasibleRates(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("loss became non-finite at epoch {epoch}, batch {batch}; parameter norms: {norms}")]
    NonFiniteLoss {
        epoch: usize,
        batch: usize,
        norms: String,
    },
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
