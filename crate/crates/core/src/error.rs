use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index set {0} is empty")]
    EmptySet(&'static str),
    #[error("index sets overlap at column {0}")]
    Overlap(usize),
    #[error("column index {index} is outside 1..={d}")]
    OutOfRange { index: usize, d: usize },
    #[error("column index {0} appears twice in one index set")]
    DuplicateIndex(usize),
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("scale argument must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("invalid shape: {0}")]
    Shape(String),
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("correlation matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("pair ({0}) is not supported by this model")]
    UnsupportedPair(String),
    #[error("argument outside the model domain: {0}")]
    OutOfDomain(String),
    #[error("eta table has no entry for cross pair ({0}, {1})")]
    MissingPair(usize, usize),
    #[error("sample mean {0} is too close to 1; the ratio m/(1-m) is unbounded")]
    DegenerateMean(f64),
    #[error("expected a non-negative input, got {0}")]
    NegativeInput(f64),
    #[error("no exact truth available: {0}")]
    NoTruthAvailable(String),
    #[error("unsupported target: {0}")]
    UnsupportedTarget(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: missing value in column {column}")]
    MissingValue { line: usize, column: String },
    #[error("line {line}: non-positive price in column {column}")]
    NonPositivePrice { line: usize, column: String },
    #[error("line {0}: dates are not strictly increasing")]
    NonMonotoneDates(usize),
    #[error("unknown column {0}")]
    UnknownColumn(String),
    #[error("groups overlap: {0}")]
    OverlappingGroups(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures caused by numerically degenerate data rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::DegenerateMean(_) | Error::NotPositiveDefinite | Error::NoTruthAvailable(_)
        )
    }

    /// Process exit code used by the CLI: 3 for numeric degeneracy, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.is_numeric() {
            3
        } else {
            2
        }
    }
}
