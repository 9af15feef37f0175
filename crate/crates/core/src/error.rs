use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("meridian reached the rotation axis (x2 = {x2:e}) at s = {s}")]
    AxisContact { s: f64, x2: f64 },

    #[error("construction error: {0}")]
    Construction(String),

    #[error("containment error: {0}")]
    Containment(String),

    #[error("not capillary: contact angles {left} and {right} differ")]
    NotCapillary { left: f64, right: f64 },

    #[error("degenerate contact angle {0}")]
    DegenerateAngle(f64),

    #[error("orientation error: {0}")]
    Orientation(String),

    #[error("arc length {s} outside [{lo}, {hi}]")]
    OutOfRange { s: f64, lo: f64, hi: f64 },

    #[error("quadrature did not converge: relative change {0:e} on grid halving")]
    Precision(f64),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("flow error: {0}")]
    Flow(String),
}
