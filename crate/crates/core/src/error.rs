use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("expression error: {0}")]
    Expression(String),

    #[error("field does not live on this grid")]
    GridMismatch,

    #[error("field is not in the positive cone: {0}")]
    NotPositiveCone(String),

    #[error("field has a non-positive interior value {value:e} at node {node}")]
    NonPositiveField { node: usize, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fiber map has no {0} critical point at this lambda")]
    MissingRoot(&'static str),

    #[error("inflection undefined: integral of b|u|^(p+1) is {0:e} <= 0")]
    InflectionUndefined(f64),

    #[error("fiber second derivative {0:e} too close to zero (near the fold)")]
    NearFold(f64),

    #[error("singular matrix (pivot {pivot:e} at row {row})")]
    SingularMatrix { row: usize, pivot: f64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("positivity lost at node {node}")]
    PositivityLost { node: usize },

    #[error("weight must be positive on the subdomain; found {value:e} at node {node}")]
    NonPositiveWeight { node: usize, value: f64 },

    #[error("{0}")]
    Table(String),
}

pub type Result<T> = std::result::Result<T, Error>;
