use thiserror::Error;

/// Everything that can go wrong while building measures, tilting them,
/// simulating the flow or running the verification checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("measure is not centered: mean = {mean:e}")]
    NotCentered { mean: f64 },

    #[error("total mass is {mass}, expected 1")]
    MassNotOne { mass: f64 },

    #[error("measure has infinite or undefined variance")]
    InfiniteVariance,

    #[error("malformed measure spec: {0}")]
    MalformedSpec(String),

    #[error("tilt (b = {b}, c = {c}) is not integrable against this measure")]
    TiltNotIntegrable { b: f64, c: f64 },

    #[error("quadrature missed relative accuracy {target:e} (estimate {achieved:e})")]
    QuadratureFailure { target: f64, achieved: f64 },

    #[error("target mean {target} is not strictly inside the support hull [{lo}, {hi}]")]
    TargetOutsideHull { target: f64, lo: f64, hi: f64 },

    #[error("root finder gave up after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("tilted variance {var:e} is not positive")]
    DegenerateTilt { var: f64 },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("all {n} paths failed")]
    AllPathsFailed { n: usize },

    #[error("need at least {needed} completed paths, got {got}")]
    InsufficientPaths { needed: usize, got: usize },

    #[error("checkpoint data missing: {0}")]
    MissingCheckpoints(String),

    #[error("hypothesis not asserted: {0}")]
    HypothesisNotAsserted(String),

    #[error("pilot path stopped before s = {s} in {attempts} attempts")]
    PilotStoppedEarly { s: f64, attempts: usize },

    #[error("tail is degenerate: {distinct} distinct survival points in the fit window")]
    DegenerateTail { distinct: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
