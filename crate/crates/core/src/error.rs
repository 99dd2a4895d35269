use thiserror::Error;

/// Errors produced by the library.
///
/// Variants fall in two families: input problems (bad files, violated
/// preconditions, budgets) and computational outcomes (non-convergence,
/// identity mismatches, violated bounds). [`Error::is_input_error`] tells
/// them apart; the CLI maps the first family to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("undefined for this input: {0}")]
    UndefinedInput(String),

    #[error("variable z{var} would reach degree {degree}; at most 2 is supported")]
    UnsupportedDegree { var: usize, degree: usize },

    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),

    #[error("index {index} out of range for ground set of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("conditioning on element {element} = {bit} leaves an empty support")]
    EmptyCondition { element: usize, bit: u8 },

    #[error("{what}: {needed} exceeds budget {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("no basis: {0}")]
    NoBasis(String),

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("target is on the boundary of or outside the basis polytope (|gamma| reached {max_abs_gamma:.3} after {iterations} iterations)")]
    BoundaryOrInfeasible {
        iterations: usize,
        max_abs_gamma: f64,
    },

    #[error("solver did not converge in {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("bound violated: {0}")]
    BoundViolated(String),

    #[error("polynomial vanishes at the evaluation point")]
    AtRoot,

    #[error("shift hypothesis not met: (2/delta)*phi + phi^2 = {lhs} > 1")]
    HypothesisNotMet { lhs: f64 },

    #[error("degenerate direction: partial derivative of the barrier vanishes")]
    DegenerateDirection,

    #[error("vertices {u} and {v} lie in different components")]
    InfiniteResistance { u: usize, v: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the caller's input rather than by the
    /// computation itself.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidDistribution(_)
                | Error::InvalidInput(_)
                | Error::Precondition(_)
                | Error::UndefinedInput(_)
                | Error::UnsupportedDegree { .. }
                | Error::DegreeMismatch(_)
                | Error::IndexOutOfRange { .. }
                | Error::EmptyCondition { .. }
                | Error::BudgetExceeded { .. }
                | Error::NoBasis(_)
                | Error::BoundaryOrInfeasible { .. }
                | Error::Parse { .. }
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
