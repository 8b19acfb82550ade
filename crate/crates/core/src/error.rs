use thiserror::Error;

pub type Result<T> = std::result::Result<T, GeomError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    /// The finite-difference stencil left the chart domain even after shrinking the step.
    #[error("stencil leaves the domain at axis {axis} (point {point:?}) after maximal step shrink")]
    Boundary { axis: usize, point: Vec<f64> },

    #[error("point {point:?} is outside the chart domain")]
    OutOfDomain { point: Vec<f64> },

    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    #[error("linearly dependent input vector at position {index}")]
    DependentInput { index: usize },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("vectors span a degenerate plane")]
    DegeneratePlane,

    #[error("frame is not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("vector does not lie in the claimed sector (residual {0:e})")]
    SectorMismatch(f64),

    #[error("vector is not unit length (norm {0})")]
    NotUnit(f64),

    #[error("unknown check id `{0}`")]
    UnknownCheck(String),
}
