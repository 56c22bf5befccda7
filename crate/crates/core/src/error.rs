use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("arcs {first} and {second} intersect or touch (distance {distance:.3e})")]
    IntersectingArcs { first: usize, second: usize, distance: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular system (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("k = {k} is within tolerance of the disk Dirichlet eigen-wavenumber {eigen} (order {order})")]
    NearEigenvalue { k: f64, eigen: f64, order: usize },

    #[error("sampling point lies outside the artificial disk (distance {distance} >= radius {radius})")]
    OutsideDisk { distance: f64, radius: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Configuration-type errors as opposed to numerical ones.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Parse { .. } | Error::Config(_) | Error::IntersectingArcs { .. })
    }
}
