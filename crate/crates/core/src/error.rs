use thiserror::Error;

/// Errors surfaced by graph loading, search drivers and index I/O.
#[derive(Debug, Error)]
pub enum FirmError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// No connected structure with the requested parameters contains the query.
    #[error("no community satisfies the query")]
    NoCommunity,

    /// The query vertices fall into two or more connected components.
    #[error("query vertices span multiple components")]
    QuerySplit,

    /// A persisted index does not match the graph it is applied to.
    #[error("index mismatch: {0}")]
    IndexMismatch(String),

    /// A persisted index file is malformed or fails its integrity hash.
    #[error("corrupt index: {0}")]
    CorruptIndex(String),

    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FirmError>;
