use thiserror::Error;

/// Errors raised by the solvers and certificate checkers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "equality constraint q1(x) = 1 is infeasible (largest eigenvalue of A1 is not positive)"
    )]
    InfeasibleConstraint,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("pencil is not definite at the supplied direction")]
    PencilNotDefinite,

    #[error("point is infeasible: {0}")]
    InfeasiblePoint(String),

    #[error("interior point: boundary KKT analysis does not apply (q2(x) = {q2})")]
    InteriorPoint { q2: f64 },

    #[error("TLS solution at infinity: every minimizing eigenvector has zero last component")]
    TlsAtInfinity,

    #[error("dual problem is unbounded; the primal feasible set is empty")]
    UnboundedDual,

    #[error("dual problem is infeasible; no positive semidefinite multiplier combination exists")]
    InfeasibleDual,

    #[error("primal recovery failed: null-space dimension {dim}, q2 range over the null space [{q2_lo}, {q2_hi}]")]
    RecoveryFailed { dim: usize, q2_lo: f64, q2_hi: f64 },

    #[error("no hard case exists: {0}")]
    NoHardCase(String),

    #[error("existence assumption fails: {0}")]
    ExistenceAssumption(String),

    #[error("contradiction: {0}")]
    Contradiction(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error after peeling off stage context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
