//! Crate-wide error type.

/// Errors surfaced by the simulator, oracles and harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A sequence file did not conform to the format.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A run or experiment was configured inconsistently (unsatisfiable
    /// knowledge requirement, non-tree underlying graph, bad parameters...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A decision rule violated an engine contract (named a receiver outside
    /// the interaction, ordered the sink to transmit).
    #[error("contract violation: {0}")]
    Contract(String),

    /// An exhaustive oracle refused an instance beyond its guard rails.
    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
