use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Evaluation outside the half-line.
    #[error("argument t = {0} lies outside the half-line (-inf, 0]")]
    Domain(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// The norm triple violates the three-norm inequality; carries the signed slack.
    #[error("infeasible norm triple: inequality slack {slack:e} < 0")]
    InfeasibleTriple { slack: f64 },

    /// The four-norm problem has no solution.
    #[error("infeasible problem: inner slack {slack_inner:e}, outer slack {slack_outer:?}")]
    InfeasibleProblem {
        slack_inner: f64,
        slack_outer: Option<f64>,
    },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// A construction produced something that breaks an invariant it guarantees.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence(_) | Error::Internal(_))
    }
}
