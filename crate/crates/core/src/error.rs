use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A diagonal entry of R fell below the rank threshold.
    #[error("singular channel: |r[{column}][{column}]| = {value:e} below threshold {threshold:e}")]
    SingularChannel {
        column: usize,
        value: f64,
        threshold: f64,
    },

    #[error("no channel with condition number > {min_cond} after {attempts} draws")]
    GenerationExhausted { min_cond: f64, attempts: u64 },

    #[error("brute-force search space of {size} vectors exceeds the oracle guard of {limit}")]
    OracleTooLarge { size: u128, limit: u64 },

    /// The candidate list lacks one of the two hypotheses for a bit.
    #[error("no competitor for layer {layer} bit {bit} in candidate list")]
    MissingCompetitor { layer: usize, bit: usize },

    /// `line` is 1-based; `None` for whole-file problems such as a missing key.
    #[error("config{}: {message}", line.map(|l| format!(" line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::ContractViolation(msg.into())
    }

    pub(crate) fn config(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: msg.into(),
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::OracleTooLarge { .. } => 3,
            Error::Io { .. } | Error::Csv { .. } => 4,
            _ => 1,
        }
    }
}
