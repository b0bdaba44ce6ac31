//! Power grid data layer: MATPOWER case parsing, the generator/load node
//! graph used by the graph neural models, and line-outage contingencies.
//!
//! Everything is stored per-unit on the case `base_mva`; conversion from
//! physical units happens once, inside the parser.

pub mod case;
pub mod graph;
pub mod mat;
pub mod matpower;

pub use case::{Branch, Bus, BusType, CostCurve, Gen, GridCase, LineRemoval, Load};
pub use graph::{edge_weight, scaled_laplacian, transform_graph, transform_graph_weighted};
pub use graph::{GraphNode, NodeKind, TransformedGraph};
pub use mat::Mat;
pub use matpower::parse_matpower;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("missing required matrix `{0}`")]
    MissingMatrix(&'static str),
    #[error("non-numeric entry `{token}` at line {line}, column {col}")]
    NonNumeric { line: usize, col: usize, token: String },
    #[error("duplicate bus id {0}")]
    DuplicateBusId(usize),
    #[error("no slack bus")]
    NoSlackBus,
    #[error("multiple slack buses ({0} found)")]
    MultipleSlackBuses(usize),
    #[error("unresolved bus reference {0}")]
    UnresolvedBus(usize),
    #[error("in-service branch {0} has zero reactance")]
    ZeroReactance(usize),
    #[error("generator {0} has inverted limits")]
    InvertedGenLimits(usize),
    #[error("branch index {0} out of range")]
    BranchOutOfRange(usize),
    #[error("branch {0} is already out of service")]
    BranchAlreadyOff(usize),
    #[error("edge weight requires |Z| > 0, got {0}")]
    NonPositiveImpedance(f64),
    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),
    #[error("canonical case format: {0}")]
    Canonical(String),
    #[error("unsupported cost model: {0}")]
    UnsupportedCost(String),
}

pub type Result<T> = std::result::Result<T, GridError>;
