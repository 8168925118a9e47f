use serde::{Deserialize, Serialize};
use std::time::Duration;

/// Outcome class of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Status {
    /// Incumbent proven within the configured relative gap.
    Optimal,
    /// A limit stopped the search with an incumbent of the given relative gap.
    Feasible { gap: f64 },
    Infeasible,
    Unbounded,
    /// A limit stopped the search before any integer-feasible point was found.
    LimitReached,
}

impl Status {
    pub fn has_solution(&self) -> bool {
        matches!(self, Status::Optimal | Status::Feasible { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: Status,
    /// Column values; empty unless [`Status::has_solution`].
    pub values: Vec<f64>,
    pub objective: f64,
    pub best_bound: f64,
    pub gap: f64,
    pub nodes: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Relative gap between an incumbent and a lower bound.
pub fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    ((incumbent - bound) / incumbent.abs().max(1e-9)).max(0.0)
}

impl Solution {
    pub(crate) fn without_point(status: Status, nodes: u64, elapsed: Duration) -> Self {
        let objective = match status {
            Status::Unbounded => f64::NEG_INFINITY,
            _ => f64::INFINITY,
        };
        Solution {
            status,
            values: Vec::new(),
            objective,
            best_bound: objective,
            gap: f64::INFINITY,
            nodes,
            elapsed,
        }
    }

    pub fn value(&self, column: usize) -> f64 {
        self.values[column]
    }
}
