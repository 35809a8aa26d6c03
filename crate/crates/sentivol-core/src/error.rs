use chrono::NaiveDate;
use thiserror::Error;

/// Crate-wide error type. Variants carry enough context (dates, row numbers,
/// required lengths) for a batch run to report which input broke and where.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series requires at least {required} observations, got {actual}")]
    TooShort { required: usize, actual: usize },

    #[error("window must satisfy {requirement}, got {window}")]
    BadWindow {
        window: usize,
        requirement: &'static str,
    },

    #[error("window {window} exceeds series length {len}")]
    WindowExceedsLength { window: usize, len: usize },

    #[error("non-positive price {value} on {date}")]
    NonPositivePrice { date: NaiveDate, value: f64 },

    #[error("negative value {value} on {date} ({context})")]
    NegativeValue {
        date: NaiveDate,
        value: f64,
        context: &'static str,
    },

    #[error("non-finite value on {date} ({context})")]
    NonFiniteValue {
        date: NaiveDate,
        context: &'static str,
    },

    #[error("dates not strictly increasing at {date}")]
    UnsortedDates { date: NaiveDate },

    #[error("dates ({dates}) and values ({values}) have different lengths")]
    LengthMismatch { dates: usize, values: usize },

    #[error("aligned overlap has {overlap} observations, need at least {required}")]
    InsufficientOverlap { overlap: usize, required: usize },

    #[error("regressor '{name}' has {actual} values but the response has {expected}")]
    RegressorLengthMismatch {
        name: String,
        expected: usize,
        actual: usize,
    },

    #[error("design matrix is rank deficient (column '{column}' is collinear)")]
    SingularDesign { column: String },

    #[error("{kind:?} cannot be built by this constructor")]
    KindMismatch { kind: crate::sentiment::SentimentKind },

    #[error("{kind:?} value {value} on {date} violates {constraint}")]
    IndicatorRange {
        kind: crate::sentiment::SentimentKind,
        date: NaiveDate,
        value: f64,
        constraint: &'static str,
    },

    #[error("total market value is zero on {date}")]
    ZeroTotalMarketValue { date: NaiveDate },

    #[error("duplicate bond id '{bond_id}' on {date}")]
    DuplicateBondId { date: NaiveDate, bond_id: String },

    #[error("variance recursion diverged on {date} (log-variance {log_variance})")]
    DivergedRecursion {
        date: NaiveDate,
        log_variance: f64,
    },

    #[error("returns are constant; variance model is degenerate")]
    DegenerateVariance,

    #[error("parameter '{name}' is invalid: {reason}")]
    BadParameter { name: &'static str, reason: String },

    #[error("estimation failed: {diagnostics}")]
    EstimationFailed { diagnostics: String },

    #[error("information criteria need n > k, got n = {n}, k = {k}")]
    CriteriaDegreesOfFreedom { n: usize, k: usize },

    #[error("{path}:{row}: {problem}")]
    Table {
        path: String,
        row: usize,
        problem: String,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
