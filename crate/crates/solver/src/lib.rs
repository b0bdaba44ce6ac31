//! Polar AC optimal power flow: problem assembly, a primal-dual interior
//! point solver with a monotone barrier schedule, and KKT-level analysis
//! (violations, residuals, nodal prices).

pub mod analysis;
pub mod ipm;
pub mod linalg;
pub mod problem;
pub mod solution;

pub use analysis::{kkt_residuals, lmp, KktResiduals};
pub use ipm::{solve, SolveOptions};
pub use problem::{assemble, IneqKind, OPFProblem};
pub use solution::{OPFSolution, SolveStatus, TraceRow};

use thiserror::Error;

/// Violation tolerance shared by `violated`, the iterative feasibility
/// test and the binding-set checks.
pub const EPS_VIOLATION: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("case is not a single connected component")]
    Disconnected,
    #[error("case has no generators")]
    NoGenerators,
    #[error("starting point has dimension {got}, problem has {want}")]
    BadStartDimension { got: usize, want: usize },
    #[error("mask index {0} out of range ({1} inequalities)")]
    BadMaskIndex(usize, usize),
    #[error("solution is not optimal (status {0:?})")]
    NotOptimal(solution::SolveStatus),
    #[error("vector has dimension {got}, problem has {want}")]
    BadDimension { got: usize, want: usize },
}

pub type Result<T> = std::result::Result<T, SolverError>;
