use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Constructor parameters violate a family's constraints.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A structural condition failed; `witness` names the offending atom when there is one.
    #[error("validation failed: {condition}{}", witness.map(|k| format!(" (witness atom {k})")).unwrap_or_default())]
    Validation { condition: String, witness: Option<i64> },

    /// An orbit step left the finite index window.
    #[error("orbit left the index window at n = {n}")]
    OutOfWindow { n: i64 },

    /// Bisection exhausted its iteration budget.
    #[error("bisection did not converge after {iterations} iterations; bracket [{lo}, {hi}]")]
    NonConvergence { lo: f64, hi: f64, iterations: usize },

    /// The requested notion needs a property the system lacks (e.g. an invertible transformation).
    #[error("not admissible: {0}")]
    Admissibility(String),
}

impl Error {
    pub(crate) fn validation(condition: impl Into<String>, witness: Option<i64>) -> Self {
        Error::Validation { condition: condition.into(), witness }
    }
}
