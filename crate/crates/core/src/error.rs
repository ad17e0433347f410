use thiserror::Error;

/// Errors raised by the model and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two UAVs are closer than the free-space reference distance.
    #[error("degenerate geometry: link distance {distance:.3e} m is below the 1 m reference distance")]
    DegenerateGeometry { distance: f64 },

    #[error("infeasible scenario: {0}")]
    InfeasibleScenario(String),

    /// A subproblem has no feasible point; the message names the binding constraint.
    #[error("infeasible subproblem: {0}")]
    InfeasibleSubproblem(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid decision: {0}")]
    InvalidDecision(String),

    #[error("enumeration cap exceeded: {size} exceeds the limit of {cap}")]
    CapExceeded { size: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
