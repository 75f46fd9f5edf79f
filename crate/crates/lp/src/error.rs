use thiserror::Error;

/// Errors raised while building or solving a [`LinearProgram`](crate::LinearProgram).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("variable `{name}` has inverted bounds [{lower}, {upper}]")]
    InvertedBounds { name: String, lower: f64, upper: f64 },

    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),

    #[error("duplicate constraint name `{0}`")]
    DuplicateConstraint(String),

    #[error("variable index {0} does not exist")]
    UnknownVariable(usize),

    #[error("constraint index {0} does not exist")]
    UnknownConstraint(usize),

    #[error("non-finite number in {0}")]
    NonFinite(String),

    #[error("binary variable `{0}` must have bounds within [0, 1]")]
    BinaryBounds(String),

    #[error("numerical breakdown after {iterations} iterations: {detail}")]
    NumericalBreakdown { iterations: usize, detail: String },

    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),

    #[error(
        "branch-and-bound node limit of {nodes} reached (incumbent {incumbent:?}, best bound {bound})"
    )]
    NodeLimit {
        nodes: usize,
        incumbent: Option<f64>,
        bound: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error("solution is not optimal")]
    NotOptimal,
}

pub type Result<T, E = LpError> = std::result::Result<T, E>;
