use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },

    #[error("line {line}: vertex {vertex} out of range for n = {n}")]
    VertexRange {
        line: usize,
        vertex: usize,
        n: usize,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("graph is not connected")]
    Disconnected,

    #[error("target {target} is not adjacent to center {center}")]
    NotAdjacent { center: usize, target: usize },

    #[error("domain of size {size} exceeds the enumeration limit of {max}")]
    DomainTooLarge { size: usize, max: usize },

    #[error("no placement for vertex {0}")]
    Incomplete(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("training diverged at epoch {0} (non-finite loss)")]
    Divergence(usize),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
