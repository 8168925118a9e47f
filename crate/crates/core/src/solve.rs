//! Build, solve, decode and verify in one call.

use std::io::Write;
use std::time::Duration;

use chargeplan_milp::{branch_and_bound, write_lp, SolverConfig, Status};
use serde::Serialize;

use crate::domain::ValidatedScenario;
use crate::error::Result;
use crate::model::{build_problem, BuildDiagnostic};
use crate::plan::{decode, CostBreakdown, PlanReport};
use crate::validator::{recompute_costs, replay, Replay};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub gap: f64,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            gap: 1e-2,
            node_limit: None,
            time_limit: None,
        }
    }
}

impl SolveOptions {
    pub fn with_gap(gap: f64) -> Self {
        SolveOptions {
            gap,
            ..Self::default()
        }
    }

    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            rel_gap: self.gap,
            node_limit: self.node_limit,
            time_limit: self.time_limit,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutcome {
    pub status: Status,
    pub diagnostics: Vec<BuildDiagnostic>,
    /// Present when the solver returned a point.
    pub report: Option<PlanReport>,
    pub replay: Option<Replay>,
    /// Costs recomputed by the validator.
    pub costs: Option<CostBreakdown>,
}

impl SolveOutcome {
    pub fn is_feasible(&self) -> bool {
        self.report.is_some()
    }

    /// True when a plan exists and replays clean.
    pub fn verified(&self) -> bool {
        self.replay.as_ref().is_some_and(Replay::is_clean)
    }
}

/// Solves `vs`, then decodes and replays the plan. Models the builder can
/// already prove infeasible are not handed to the solver.
pub fn solve_scenario(vs: &ValidatedScenario, options: &SolveOptions) -> Result<SolveOutcome> {
    let built = build_problem(vs);
    if built.guaranteed_infeasible() {
        return Ok(SolveOutcome {
            status: Status::Infeasible,
            diagnostics: built.diagnostics,
            report: None,
            replay: None,
            costs: None,
        });
    }
    log::info!(
        "solving {} columns ({} integer), {} rows",
        built.model.num_columns(),
        built.model.num_integer(),
        built.model.num_rows()
    );
    let solution = branch_and_bound(&built.model, &options.solver_config())?;
    log::info!(
        "status {:?} objective {} bound {} nodes {} in {:?}",
        solution.status,
        solution.objective,
        solution.best_bound,
        solution.nodes,
        solution.elapsed
    );
    if !solution.status.has_solution() {
        return Ok(SolveOutcome {
            status: solution.status,
            diagnostics: built.diagnostics,
            report: None,
            replay: None,
            costs: None,
        });
    }
    let report = decode(vs, &built, &solution);
    let verdict = replay(vs, &report);
    let costs = recompute_costs(vs, &report);
    Ok(SolveOutcome {
        status: solution.status,
        diagnostics: built.diagnostics,
        report: Some(report),
        replay: Some(verdict),
        costs: Some(costs),
    })
}

/// Writes the model for `vs` in LP text format.
pub fn dump_lp(vs: &ValidatedScenario, out: impl Write) -> std::io::Result<()> {
    write_lp(&build_problem(vs).model, out)
}
