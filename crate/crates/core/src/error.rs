use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RspError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("equality matrix is rank deficient (sigma_min = {sigma_min:e})")]
    RankDeficient { sigma_min: f64 },
    #[error("uncertainty set of constraint {0} does not contain the origin")]
    OriginNotInZ(usize),
    #[error("invalid set: {0}")]
    InvalidSet(String),
    #[error("unsupported set: {0}")]
    UnsupportedSet(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("Slater certificate is not strictly feasible (max f = {0:e})")]
    NotStrictlyFeasible(f64),
    #[error("oracle failure: {0}")]
    OracleFailure(String),
    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("constraint {0} has no pessimization routine")]
    RequiresPessimizer(usize),
    #[error("constraint {0} is not biaffine")]
    NotBiaffine(usize),
    #[error("invalid step sizes: {0}")]
    InvalidSteps(String),
    #[error("epsilon must be positive (got {0:e})")]
    NonpositiveEps(f64),
    #[error("problem appears unbounded: {0}")]
    Unbounded(String),
    #[error("master problem failed: {0}")]
    MasterFailure(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, RspError>;

impl From<std::io::Error> for RspError {
    fn from(e: std::io::Error) -> Self {
        RspError::Io(e.to_string())
    }
}
