//! Formula representation, SMT-LIB output and solver interaction.

pub mod emit;
pub mod model;
pub mod sexp;
pub mod solver;
pub mod term;

pub use emit::{emit_problem, emit_script, EmitError, Problem};
pub use model::{Model, ModelValue};
pub use solver::{Capabilities, CheckResult, Outcome, Session, SolverConfig, SolverError};
pub use term::{Sort, Term};
