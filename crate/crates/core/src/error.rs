use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain of a function, e.g. `log_gamma(-1.0)`.
    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    /// Parameters that are individually valid but jointly unsupported
    /// (pole collisions, zero denominators inside a finite sum, ...).
    #[error("invalid parameters: {0}")]
    Parameter(String),

    /// An iterative routine failed to reach its tolerance.
    #[error("no convergence in {routine}: {detail}")]
    NonConvergence {
        routine: &'static str,
        detail: String,
    },

    /// Statistic requested on the wrong kind of sample set.
    #[error("statistic {statistic} cannot be computed from {samples} samples")]
    SampleKind {
        statistic: &'static str,
        samples: &'static str,
    },
}

impl Error {
    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            function,
            detail: detail.into(),
        }
    }

    pub(crate) fn no_convergence(routine: &'static str, detail: impl Into<String>) -> Self {
        Error::NonConvergence {
            routine,
            detail: detail.into(),
        }
    }

    /// True for failures of an iterative method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
