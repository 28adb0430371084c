//! The search: heuristic gate selection, justification choice and limited
//! forward propagation.

mod propagate;
mod select;
mod solver;

pub use propagate::{count_unjust_after, lbcp_forward, PropagationStats};
pub use select::{select_gate, Heuristic};
pub use solver::{crsat_solve, SolveResult, Solver, SolverConfig, Status};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("noise probability {0} is outside [0, 1]")]
    InvalidNoise(f64),
    #[error("the unjust set is empty")]
    EmptyUnjustSet,
}
