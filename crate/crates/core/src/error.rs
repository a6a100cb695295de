use thiserror::Error;

/// Failures raised by the simulation pipeline.
#[derive(Debug, Error)]
pub enum VflError {
    #[error("degenerate sites: {0}")]
    DegenerateSites(String),
    #[error("particle collision: sites {a} and {b} are {distance:e} apart")]
    Collision { a: usize, b: usize, distance: f64 },
    #[error("delaunay edge ({a}, {b}) of length {length:e} exceeds ghost cutoff {cutoff:e}")]
    GhostCutoffExceeded { a: usize, b: usize, length: f64, cutoff: f64 },
    #[error("cell {0} has non-positive area {1:e}")]
    ZeroAreaCell(usize, f64),
    #[error("inverted triangle with area {0:e}")]
    InvertedTriangle(f64),
    #[error("linear solver failed to converge: relative residual {residual:e} after {iterations} iterations")]
    SolverDivergence { residual: f64, iterations: usize },
    #[error("non-positive thickness {1:e} in cell {0}")]
    NonpositiveThickness(usize, f64),
    #[error("site {0} reached a non-finite state")]
    NonFinite(usize),
    #[error("operation unsupported in {0}D")]
    Unsupported(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl VflError {
    /// True for errors that mean the simulation itself broke down (as opposed
    /// to bad input).
    pub fn is_simulation_abort(&self) -> bool {
        !matches!(self, VflError::Config(_) | VflError::Parse(_) | VflError::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, VflError>;
