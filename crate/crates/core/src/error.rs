use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot parse nonlinearity spec `{spec}`: {reason}")]
    Parse { spec: String, reason: String },

    #[error("invalid parameter: {0}")]
    Constraint(String),

    #[error("quadrature did not converge (reached T = {reached:e}, residual {residual:e})")]
    Quadrature { reached: f64, residual: f64 },

    #[error("could not bracket F^-1({target:e}): value outside the range of F")]
    Bracketing { target: f64 },

    #[error("{0} is outside the domain of the nonlinearity")]
    Domain(f64),

    #[error("limit q not detected: tail values {tail:?}; the growth limit probably does not exist")]
    LimitDetection { tail: Vec<f64> },

    #[error("estimated q = {0} < 1 contradicts q >= 1")]
    QBelowOne(f64),

    #[error("regime violation: {0}")]
    Regime(String),

    #[error("step size underflow at r = {r:e}")]
    StepFailure { r: f64 },

    #[error("solution left the domain of f at r = {r:e}")]
    DomainExit { r: f64 },

    #[error("correction (x, y) left the box |.| <= {eps} at t = {t}")]
    BoxExit { t: f64, eps: f64 },

    #[error("no zero found before r = {r_max:e}")]
    NoZero { r_max: f64 },

    #[error("r = {r:e} is outside the computed range [{lo:e}, {hi:e}]")]
    OutOfRange { r: f64, lo: f64, hi: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Constraint(_) | Error::Io(_) => 1,
            Error::Regime(_) => 3,
            Error::Precondition(_) => 4,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
