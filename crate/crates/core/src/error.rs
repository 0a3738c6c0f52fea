use thiserror::Error;

/// Errors raised anywhere in the selection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("empty cell: factor `{factor}` level `{level}` has no observations")]
    EmptyCell { factor: String, level: String },

    #[error("insufficient data: n = {n} but at least {required} observations are needed")]
    InsufficientData { n: usize, required: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("io error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-parsable code used on the CLI error line.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Schema(_) => "schema",
            Error::EmptyCell { .. } => "empty_cell",
            Error::InsufficientData { .. } => "insufficient_data",
            Error::DegenerateData(_) => "degenerate_data",
            Error::Usage(_) => "usage",
            Error::Domain(_) => "domain",
            Error::Numeric(_) => "numeric",
            Error::Capacity(_) => "capacity",
            Error::Construction(_) => "construction",
            Error::Validation(_) => "validation",
            Error::Io { .. } => "io",
        }
    }

    /// Process exit code: 2 config, 3 data/schema, 4 capacity, 5 validation,
    /// 1 for internal numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io { .. } | Error::Usage(_) => 2,
            Error::Schema(_)
            | Error::EmptyCell { .. }
            | Error::InsufficientData { .. }
            | Error::DegenerateData(_) => 3,
            Error::Capacity(_) => 4,
            Error::Validation(_) => 5,
            Error::Domain(_) | Error::Numeric(_) | Error::Construction(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
