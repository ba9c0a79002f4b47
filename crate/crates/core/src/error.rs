use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("attacker hashrate q must lie in [0, 1/2), got {0}")]
    QOutOfRange(f64),
    #[error("connectivity gamma must lie in [0, 1], got {0}")]
    GammaOutOfRange(f64),
    #[error("scale parameters must be positive, got tau0 = {tau0}, reward = {reward}")]
    NonPositiveScale { tau0: f64, reward: f64 },
    #[error("trail threshold A must be at least 1")]
    TrailThresholdOutOfRange,
    #[error("unknown strategy {0:?}; expected honest, sm, lsm or tsm:A")]
    UnknownStrategy(String),
    #[error("hiker problem invalid: {0}")]
    InvalidHikerProblem(&'static str),
    #[error("conditioning is degenerate at m = {m} with M = {big_m}")]
    DegenerateConditioning { m: u32, big_m: u32 },
    #[error("tridiagonal system is singular")]
    SingularSystem,
    #[error("random walk exceeded the {0}-step safety cap")]
    StepCapExceeded(u64),
    #[error("attack cycle exceeded the {0}-event safety cap")]
    EventCapExceeded(u64),
    #[error("strategy pattern is empty")]
    EmptyPattern,
    #[error("{name} must be positive, got {value}")]
    NonPositiveInput { name: &'static str, value: f64 },
    #[error("the analytic backend cannot evaluate selfish mining at gamma > 0; use the simulation backend")]
    BackendMismatch,
    #[error("grid configuration: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed table: {0}")]
    Parse(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
