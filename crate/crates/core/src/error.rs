use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures reported by an external or synthetic scoring adapter.
#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("count_mismatch: adapter returned {got} scores for {expected} items")]
    CountMismatch { expected: usize, got: usize },
    #[error("non_finite_score: item {index} ({pair_id}/{variant}) scored {value}")]
    NonFiniteScore {
        index: usize,
        pair_id: String,
        variant: String,
        value: f64,
    },
    #[error("missing score for item {pair_id}/{variant}")]
    MissingScore { pair_id: String, variant: String },
    #[error("unexpected score for {pair_id}/{variant}")]
    UnexpectedScore { pair_id: String, variant: String },
    #[error("malformed adapter line {line:?}: {reason}")]
    Protocol { line: String, reason: String },
    #[error("adapter process exited with {status}")]
    ExitStatus { status: String },
    #[error("adapter i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("adapter timed out waiting for {path}")]
    Timeout { path: PathBuf },
    #[error("empty scoring batch")]
    EmptyBatch,
    #[error("no prior registered for {pair_id}")]
    UnknownRecord { pair_id: String },
}

#[derive(Debug, Error)]
pub enum Error {
    // metrics / input validation
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },
    #[error("quantile level {0} is outside (0, 1)")]
    InvalidLevel(f64),
    #[error("invalid quantile grid: {0}")]
    InvalidGrid(String),
    #[error("length mismatch: {what} has {left} vs {right}")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
    #[error("profile too large for permutation enumeration: n = {n} > {max}")]
    TooLargeForOracle { n: usize, max: usize },
    #[error("metric kind mismatch: {left} vs {right}")]
    MetricKindMismatch { left: String, right: String },

    // intervention
    #[error("empty_prior: record {record}")]
    EmptyPrior { record: String },
    #[error("full_prior: record {record} prior covers all {len} components")]
    FullPrior { record: String, len: usize },
    #[error("prior index {index} out of range for record {record} of length {len}")]
    PriorIndexOutOfRange {
        record: String,
        index: usize,
        len: usize,
    },
    #[error("prior for {prior} applied to record {record}")]
    PriorRecordMismatch { prior: String, record: String },
    #[error("complement_too_small: record {record} has {complement} free positions, needs {needed}")]
    NotRealizable {
        record: String,
        complement: usize,
        needed: usize,
    },
    #[error("scope index {index} out of range for sequence of length {len}")]
    ScopeOutOfRange { index: usize, len: usize },
    #[error("symbol {symbol:?} at position {position} is not in the class table")]
    UnknownSymbol { symbol: char, position: usize },
    #[error("invalid class table: {0}")]
    InvalidClassTable(String),
    #[error("invalid record: {0}")]
    InvalidRecord(String),

    // ingestion
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("duplicate pair_id {pair_id:?} on lines {first} and {second}")]
    DuplicatePairId {
        pair_id: String,
        first: usize,
        second: usize,
    },
    #[error("empty_audit_set: {0}")]
    EmptyAuditSet(PathBuf),
    #[error("negative_index: {path}:{line}: index {value}")]
    NegativeIndex {
        path: PathBuf,
        line: usize,
        value: i64,
    },
    #[error("invalid config: {0}")]
    Config(String),

    // stats
    #[error("single-class input: AUROC needs both labels")]
    SingleClass,
    #[error("label must be 0 or 1, got {0}")]
    InvalidLabel(i64),
    #[error("invalid bootstrap config: {0}")]
    BootstrapConfig(String),
    #[error("bootstrap replicate {replicate}: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("misaligned pair_id sets across seeds")]
    MisalignedSeeds,

    #[error("adapter: {0}")]
    Adapter(#[from] AdapterError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("[model {model}, seed {seed}, operator {operator}] {source}")]
    Provenance {
        model: String,
        seed: String,
        operator: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 validation, 3 adapter, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Adapter(_) => 3,
            Error::Io { .. } => 4,
            Error::Replicate { source, .. } | Error::Provenance { source, .. } => {
                source.exit_code()
            }
            _ => 2,
        }
    }
}
