//! Solver output types and their structured-text export.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIter,
    Numerical,
}

/// One line of the optional per-iteration solver trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub barrier: f64,
    pub stationarity: f64,
    pub feasibility: f64,
    pub complementarity: f64,
    pub objective: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

impl std::fmt::Display for TraceRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "iter {:3}  mu {:9.3e}  stat {:9.3e}  feas {:9.3e}  comp {:9.3e}  obj {:14.6e}  ap {:5.3}  ad {:5.3}",
            self.iteration,
            self.barrier,
            self.stationarity,
            self.feasibility,
            self.complementarity,
            self.objective,
            self.step_primal,
            self.step_dual,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OPFSolution {
    pub status: SolveStatus,
    /// Primal point in the problem's variable layout, per-unit.
    pub y_star: Vec<f64>,
    /// Equality duals (2 n_bus balances + angle pin).
    pub lambda: Vec<f64>,
    /// Inequality duals over the full global enumeration; entries for
    /// masked-out constraints are zero.
    pub mu: Vec<f64>,
    /// $/h.
    pub objective: f64,
    /// Binding inequalities, global indices, ascending.
    pub active_set: Vec<usize>,
    pub iterations: usize,
    /// Seconds; excluded from serialized comparisons of artifacts.
    #[serde(skip)]
    pub wall_time: f64,
    /// Per-iteration log, populated when tracing was requested.
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

impl OPFSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Structured-text record of the solution.
    pub fn to_record(&self) -> String {
        serde_json::to_string(self).expect("solution serialization cannot fail")
    }

    pub fn from_record(text: &str) -> serde_json::Result<OPFSolution> {
        serde_json::from_str(text)
    }
}
