use thiserror::Error;

#[derive(Debug, Error)]
pub enum CraftError {
    #[error("row {row}, column '{column}': unknown category '{value}'")]
    UnknownCategory {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column '{column}': non-finite numeric value")]
    NonFiniteNumeric { row: usize, column: String },
    #[error("row {row}: expected {expected} fields, got {got}")]
    RowArity {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("invalid schema: {0}")]
    SchemaInvalid(String),
    #[error("rho = {rho} outside (0, {limit}) for m = {m}")]
    RhoOutOfRange { rho: f64, m: f64, limit: f64 },
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("k = {k} exceeds number of points {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("column '{0}' is not binary categorical")]
    NonBinaryFeature(String),
    #[error("column '{0}' is not numeric; one-hot encode categorical data first")]
    NonNumericFeature(String),
    #[error("invalid generator spec: {0}")]
    SpecInvalid(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, CraftError>;

impl CraftError {
    /// Stable identifier for the error JSON emitted by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            CraftError::UnknownCategory { .. } => "unknown_category",
            CraftError::NonFiniteNumeric { .. } => "non_finite_numeric",
            CraftError::RowArity { .. } => "row_arity",
            CraftError::SchemaInvalid(_) => "schema_invalid",
            CraftError::RhoOutOfRange { .. } => "rho_out_of_range",
            CraftError::EmptyCluster(_) => "empty_cluster",
            CraftError::LengthMismatch { .. } => "length_mismatch",
            CraftError::KTooLarge { .. } => "k_too_large",
            CraftError::NonBinaryFeature(_) => "non_binary_feature",
            CraftError::NonNumericFeature(_) => "non_numeric_feature",
            CraftError::SpecInvalid(_) => "spec_invalid",
            CraftError::ConfigInvalid(_) => "config_invalid",
            CraftError::Io { .. } => "io",
            CraftError::Csv { .. } => "csv",
            CraftError::Json { .. } => "json",
        }
    }
}
