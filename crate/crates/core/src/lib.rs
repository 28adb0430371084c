//! Justification-based stochastic local search for constrained
//! And-Inverter circuits, with structure-based gate selection heuristics and
//! an experiment harness.

pub mod circuit;
pub mod engine;
pub mod harness;
pub mod io;
pub mod metrics;

pub use circuit::{
    is_justified, Assignment, Circuit, CircuitBuilder, CircuitError, ConstrainedCircuit, GateDef,
    Justification, Literal,
};
pub use engine::{crsat_solve, Heuristic, SolveResult, Solver, SolverConfig, Status};
pub use metrics::{build_profile, Measure, StructuralProfile};
