use thiserror::Error;

use crate::graph::Edge;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numerical,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("matrix is not positive definite ({0})")]
    NotPositiveDefinite(String),

    #[error("matrix is numerically singular (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("model is not stationary (largest companion eigenvalue modulus {max_modulus:.6})")]
    NonStationary { max_modulus: f64 },

    #[error("constrained fit did not converge after {cycles} cycles (residual {residual:.3e})")]
    NotConverged { cycles: usize, residual: f64 },

    #[error("random model reconstruction failed: {0}")]
    Reconstruction(String),

    #[error("at frequency index {index}: {source}")]
    AtFrequency {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("for edge {edge}: {source}")]
    ForEdge {
        edge: Edge,
        #[source]
        source: Box<Error>,
    },

    #[error("at stepwise step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn at_frequency(self, index: usize) -> Self {
        Error::AtFrequency {
            index,
            source: Box::new(self),
        }
    }

    pub fn for_edge(self, edge: Edge) -> Self {
        Error::ForEdge {
            edge,
            source: Box::new(self),
        }
    }

    pub fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Domain(_) | Error::Config(_) | Error::NonStationary { .. } => ErrorKind::Config,
            Error::NotPositiveDefinite(_)
            | Error::IllConditioned { .. }
            | Error::NotConverged { .. }
            | Error::Reconstruction(_) => ErrorKind::Numerical,
            Error::AtFrequency { source, .. } | Error::ForEdge { source, .. } | Error::AtStep { source, .. } => {
                source.kind()
            }
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => ErrorKind::Io,
        }
    }
}
