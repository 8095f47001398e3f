use crate::solver::SolveReport;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("edge parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),

    #[error("degenerate curve on edge {edge}: {reason}")]
    DegenerateCurve { edge: usize, reason: String },

    #[error("unknown curve `{0}`")]
    UnknownCurve(String),

    #[error("dangling reference: {0}")]
    DanglingReference(String),

    #[error("edge {edge} is not part of element {element}")]
    EdgeNotInElement { edge: usize, element: usize },

    #[error("mesh validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("gauss rule size {0} outside 1..=32")]
    RuleSize(usize),

    #[error("element {element} is not star-shaped with respect to its centroid")]
    NotStarShaped { element: usize },

    #[error("local matrix on element {element} is not SPD (condition estimate {condition:e})")]
    Conditioning { element: usize, condition: f64 },

    #[error("matrix is not SPD: {0}")]
    NotSpd(String),

    #[error("conjugate gradients did not converge after {} iterations (relative residual {:e})", .0.iterations, .0.residual)]
    NotConverged(SolveReport),

    #[error("DOF layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
