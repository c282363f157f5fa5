use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A discrete base graph offered no strictly closer neighbor.
    #[error("topology violation: no neighbor of vertex {vertex} is closer to {dest}")]
    TopologyViolation { vertex: usize, dest: usize },

    /// A Delaunay graph offered no strictly closer neighbor.
    #[error("geometry violation: no neighbor of point {vertex} is closer to {dest}")]
    GeometryViolation { vertex: usize, dest: usize },

    /// An iterative solver stopped before reaching its tolerance.
    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
