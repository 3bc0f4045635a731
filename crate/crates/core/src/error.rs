use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("dimension mismatch in record {record}: expected {expected} values, found {found}")]
    DimensionMismatch {
        record: usize,
        expected: usize,
        found: usize,
    },

    #[error("unknown label `{label}` in record {record}")]
    UnknownLabel { record: usize, label: String },

    #[error("cannot parse `{value}` in record {record}, feature {feature}")]
    Parse {
        record: usize,
        feature: usize,
        value: String,
    },

    #[error("non-finite value in record {record}, feature {feature}")]
    NonFiniteValue { record: usize, feature: usize },

    #[error("class {class} has no samples")]
    EmptyClass { class: usize },

    #[error("column {column} has zero norm and cannot be normalized")]
    DegenerateSample { column: usize },

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("class {class} needs at least {needed} samples, has {available}")]
    InsufficientSamples {
        class: usize,
        needed: usize,
        available: usize,
    },

    #[error("{what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("class {class} out of range 1..={classes}")]
    ClassOutOfRange { class: usize, classes: usize },

    #[error("atom {atom} is invalid: {reason}")]
    InvalidAtom { atom: usize, reason: String },

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),

    #[error("symmetric positive-definite factorization failed ({context})")]
    Factorization { context: String },

    #[error("non-finite {0}")]
    NonFinite(&'static str),

    #[error("objective became non-finite at iteration {iteration}: {detail}")]
    NonFiniteObjective { iteration: usize, detail: String },

    #[error("query is unclassifiable: its code has zero mass on every class block")]
    Unclassifiable,

    #[error("label mismatch: {0}")]
    LabelMismatch(String),

    #[error("invalid model file: {0}")]
    InvalidModel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
