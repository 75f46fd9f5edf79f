//! Self-contained linear and binary-mixed-integer programming.
//!
//! [`LinearProgram`] is built incrementally and solved with a sparse
//! bounded-variable primal simplex ([`solve_lp`]) or by best-bound
//! branch-and-bound over its declared binaries ([`solve_milp`]).

mod error;
mod lu;
mod milp;
mod problem;
mod simplex;

pub use error::{LpError, Result};
pub use milp::{solve_milp, solve_milp_with, MilpOptions};
pub use problem::{Constraint, LinearProgram, Row, Sense, Var, VariableDef};
pub use simplex::{
    dual_objective, dual_values, solve_lp, solve_lp_with, Basis, LpSolution, SimplexOptions,
    SolveStatus,
};
