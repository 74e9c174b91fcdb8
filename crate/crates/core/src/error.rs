//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("edge {edge}: nonpositive length {length}")]
    NonpositiveLength { edge: u64, length: f64 },

    #[error("network is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: u64 },

    #[error("edge {edge} references unknown vertex {vertex}")]
    UnknownVertex { edge: u64, vertex: u64 },

    #[error("network is not a tree")]
    NotATree,

    #[error("unsupported units {0:?}, only \"um\" is accepted")]
    Units(String),

    #[error("point not on network: {0}")]
    PointOffNetwork(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("branch {0} has zero measure")]
    ZeroMeasureBranch(&'static str),

    #[error("covariance matrix not positive definite after jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },

    #[error("no defined cells: {0}")]
    NoDefinedCells(String),

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad input rather than failing numerics.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::NonConvergence(_)
                | Error::Numerical(_)
                | Error::NoDefinedCells(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
