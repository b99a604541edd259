use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Distribution parameters violate a validity constraint.
    #[error("invalid parameters: {0}")]
    Parameter(String),

    /// Adaptive quadrature did not reach its tolerance within the evaluation budget.
    #[error("quadrature did not converge: estimated relative error {achieved:.3e} exceeds {requested:.3e} after {evaluations} evaluations")]
    Convergence {
        achieved: f64,
        requested: f64,
        evaluations: usize,
    },

    /// An integral over (0, inf) diverges or the integrand is not integrable numerically.
    #[error("integral diverges: {0}")]
    Divergent(String),

    /// A closed-form alternating sum would lose too many significant digits.
    #[error("closed form is numerically unstable: cancellation ratio {ratio:.3e} exceeds budget {budget:.3e}")]
    Instability { ratio: f64, budget: f64 },

    /// A rejection sampler exceeded its consecutive-rejection budget.
    #[error("rejection budget of {0} consecutive rejections exhausted")]
    RejectionBudget(u64),

    /// A conjugate update was requested where conjugacy does not hold.
    #[error("conjugate update requires m = n, got m = {m}, n = {n}")]
    Conjugacy { m: u64, n: u64 },

    /// A size exceeds a configured table cap.
    #[error("size {requested} exceeds configured cap {cap}")]
    CapExceeded { requested: usize, cap: usize },

    /// A numerical invariant failed (for example a lost positive definiteness).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Two objects that must share a size do not.
    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    /// Malformed input data.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by bad user input rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Parameter(_)
                | Error::Conjugacy { .. }
                | Error::CapExceeded { .. }
                | Error::SizeMismatch(_)
                | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
