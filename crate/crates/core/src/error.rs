use thiserror::Error;

/// Errors raised by the arithmetic, field and evaluation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violates an operation's precondition.
    #[error("DomainError: {0}")]
    Domain(String),

    /// The fundamental unit has norm +1, outside the supported class of fields.
    #[error("UNSUPPORTED: N(eps) = +1 for D = {d}")]
    UnsupportedField { d: i64 },

    /// Gamma evaluated at (or numerically at) a nonpositive integer.
    #[error("PoleError: Gamma has a pole at z = {n}")]
    Pole { n: i64 },

    /// The evaluation point sits on (or too close to) the pole lattice.
    #[error("NearPoleError: s is near pole (k={k},m={m}), distance {distance:.3e}")]
    NearPole { k: u64, m: i64, distance: f64 },

    /// A series hit its term cap before reaching the requested tolerance.
    #[error("NoConvergence: {method} reached {terms} terms with tail bound {tail_bound:.3e}")]
    NoConvergence {
        method: &'static str,
        terms: usize,
        tail_bound: f64,
    },

    /// Two independent computations of the same quantity disagree.
    #[error("ConsistencyError: {0}")]
    Consistency(String),

    /// Malformed command-line value.
    #[error("ParseError: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
