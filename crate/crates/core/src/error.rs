use thiserror::Error;

/// Errors raised by the lipfree operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("distance matrix is malformed: {0}")]
    Structure(String),

    #[error("point index {index} out of range for a space of {n} points")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("subset does not contain the base point")]
    BaseMissing,

    #[error("operands live on different metric spaces")]
    SpaceMismatch,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("space is not ultrametric: d({x},{z}) = {dxz} exceeds max(d({x},{y}), d({y},{z})) by {slack}")]
    NotUltrametric {
        x: usize,
        y: usize,
        z: usize,
        dxz: f64,
        slack: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("certificate check failed: {0}")]
    Certificate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
