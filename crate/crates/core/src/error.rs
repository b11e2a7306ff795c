use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GwvError {
    #[error("integrand not finite on support")]
    NonFiniteIntegrand,
    #[error("exponent must exceed 1")]
    BadExponent,
    #[error("point on trace")]
    PointOnTrace,
    #[error("no curvature available")]
    NoCurvature,
    #[error("only GY(0)-shaped addends supported")]
    NotGyZero,
    #[error("boundary contact: support meets the boundary band of the domain")]
    BoundaryContact,
    #[error("no scenes compiled")]
    EmptyRegistry,
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("missing recession function with positive concentration mass")]
    MissingRecession,
    #[error("jump polyline leaves the grid")]
    JumpOutsideGrid,
    #[error("open contour at level {0}")]
    OpenContour(f64),
    #[error("underdetermined battery: {equations} equations for {clusters} clusters")]
    Underdetermined { equations: usize, clusters: usize },
    #[error("unknown scene: {0}")]
    UnknownScene(String),
    #[error("grid mismatch")]
    GridMismatch,
}

pub type Result<T> = std::result::Result<T, GwvError>;
