//! A small exact MILP solver for desk-scale models.
//!
//! * [`LinearModel`] describes `min c·x + offset` over linear rows, column
//!   bounds and integrality marks.
//! * [`solve_lp`] solves the continuous relaxation with a dense bounded
//!   simplex.
//! * [`branch_and_bound`] runs branch-and-bound, branching on the most
//!   fractional column of the highest priority class, until the relative
//!   gap target is met.
//! * [`brute_force_enumerate`] tries every integer assignment and serves as
//!   an oracle for the other two.
//!
//! Everything is single-threaded and deterministic: the same model and
//! configuration always produce the same pivots, nodes and answer.

mod bnb;
mod enumerate;
mod error;
mod lp_format;
mod model;
mod simplex;
mod solution;

use std::time::Instant;

pub use bnb::{branch_and_bound, branch_and_bound_observed, NodeEvent, SolverConfig};
pub use enumerate::{brute_force_enumerate, DEFAULT_MAX_INTEGERS};
pub use error::{ModelError, SolveError};
pub use lp_format::write_lp;
pub use model::{Column, ColumnId, ColumnKind, Infeasibility, LinearModel, Relation, Row};
pub use solution::{relative_gap, Solution, Status};

/// Feasibility tolerance used by [`LinearModel::check_solution`] callers.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Solves the LP relaxation of `model` (integrality marks are ignored).
pub fn solve_lp(model: &LinearModel) -> Result<Solution, SolveError> {
    model.validate()?;
    let start = Instant::now();
    let lp = simplex::Lp::new(model, true);
    let mut state = simplex::Simplex::slack(&lp);
    let status = state.solve()?;
    Ok(match status {
        simplex::LpStatus::Optimal => {
            let objective = state.objective() + model.objective_offset();
            Solution {
                status: Status::Optimal,
                values: state.values().to_vec(),
                objective,
                best_bound: objective,
                gap: 0.0,
                nodes: 1,
                elapsed: start.elapsed(),
            }
        }
        simplex::LpStatus::Infeasible => Solution::without_point(Status::Infeasible, 1, start.elapsed()),
        simplex::LpStatus::Unbounded => Solution::without_point(Status::Unbounded, 1, start.elapsed()),
    })
}

