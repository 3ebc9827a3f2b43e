use thiserror::Error;

/// Errors raised by domain construction, solvers and the experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("boundary radius R({theta}) = {value} is not positive")]
    NonPositiveRadius { theta: f64, value: f64 },

    #[error("semi-axis a_{index} = {value} is not positive")]
    NonPositiveAxis { index: usize, value: f64 },

    #[error("invalid domain description: {0}")]
    InvalidSpec(String),

    #[error("unsupported dimension {dim} for {what}")]
    UnsupportedDimension { what: &'static str, dim: usize },

    #[error("quadrature order {order} is below the minimum {min}")]
    OrderTooSmall { order: usize, min: usize },

    #[error("boundary projection of {point:?} did not converge")]
    ProjectionDiverged { point: Vec<f64> },

    #[error("center {0:?} is not inside the domain")]
    CenterOutsideDomain(Vec<f64>),

    #[error("point {0:?} lies outside the closed domain")]
    OutsideDomain(Vec<f64>),

    #[error("least-squares system is ill-conditioned (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("center strategy produced {0:?}, which left the domain")]
    CenterLeftDomain(Vec<f64>),

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("exponent triple (r={r}, p={p}, alpha={alpha}) violates both admissibility conditions in dimension {dim}")]
    ConditionViolated { r: f64, p: f64, alpha: f64, dim: usize },

    #[error("mean curvature is not positive at boundary node {node} (H = {value})")]
    NonPositiveCurvature { node: usize, value: f64 },

    #[error("invalid dimension {0}; need N >= 2")]
    InvalidDimension(usize),

    #[error("theta = {0} must lie in (0, 1)")]
    InvalidTheta(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("only {usable} usable rows; a fit needs at least {needed}")]
    TooFewPoints { usable: usize, needed: usize },

    #[error("solver failure: {0}")]
    SolverFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
