use thiserror::Error;

/// Errors raised by the solvers, reports and experiment runner.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("transition product is not positive at index {index} within {n0} steps")]
    NonPrimitive { index: i64, n0: usize },

    #[error("residual {residual:.3e} above tolerance {tol:.3e} at horizon {horizon}")]
    NotConverged { residual: f64, tol: f64, horizon: usize },

    #[error("eigenvalue too close to zero at index {index} (|lambda| = {modulus:.3e})")]
    BranchLoss { index: i64, modulus: f64 },

    #[error("z = {z} lies outside the trust disk of radius {radius}")]
    OutsideTrustDisk { z: String, radius: f64 },

    #[error("coboundary series did not reach tolerance within horizon {0}")]
    HorizonInsufficient(usize),

    #[error("variance {var:.3e} below {bound:.3e} at n = {n}")]
    VarianceTooSmall { var: f64, bound: f64, n: usize },

    #[error("observable is not lattice valued")]
    NotLattice,

    #[error("state count {needed} exceeds cap {cap}")]
    StateCapExceeded { needed: usize, cap: usize },

    #[error("invalid driver: {0}")]
    InvalidDriver(String),

    #[error("fit is degenerate: {0}")]
    FitDegenerate(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
