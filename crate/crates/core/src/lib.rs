//! A DPLL SAT solver built around a layered assignment trail.
//!
//! * [`cnf`]: formulas, literals, three-valued assignments and evaluation.
//! * [`dimacs`]: reading and writing DIMACS CNF.
//! * [`state`]: the trail, per-clause counters, occurrence lists and the
//!   runtime validator for their invariants.
//! * [`dpll`]: the recursive search and the branching heuristics.
//! * [`oracle`]: brute-force satisfiability for differential testing.
//! * [`bench`]: per-instance measurement and suite statistics.

pub mod bench;
pub mod cnf;
pub mod dimacs;
pub mod dpll;
pub mod oracle;
pub mod state;

pub use cnf::{Clause, Cnf, Lit, PartialAssignment, TruthValue, Var};
pub use dpll::{Heuristic, SatResult, Solver};
pub use state::SolverState;
