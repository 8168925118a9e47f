//! Branch-and-bound: depth first until the first incumbent, best first
//! after that.
//!
//! Children are evaluated eagerly when their parent is branched, warm-started
//! from the parent's optimal basis with the dual simplex. Open nodes keep only
//! their basis and the bound changes along their path, so the queue stays
//! small even when it grows to many thousands of nodes. The queue is ordered
//! by (LP bound, newest first), which makes the node sequence a pure
//! function of the model and the configuration.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::time::{Duration, Instant};

use crate::error::SolveError;
use crate::model::LinearModel;
use crate::simplex::{Basis, Lp, LpStatus, Simplex};
use crate::solution::{relative_gap, Solution, Status};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Stop once `(incumbent - bound) / |incumbent|` drops to this value.
    pub rel_gap: f64,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    pub integrality_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rel_gap: 1e-2,
            node_limit: None,
            time_limit: None,
            integrality_tol: 1e-6,
        }
    }
}

impl SolverConfig {
    pub fn with_gap(rel_gap: f64) -> Self {
        SolverConfig {
            rel_gap,
            ..Self::default()
        }
    }
}

/// One line of the search trace, reported when a node is taken off the queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeEvent {
    pub id: u64,
    pub depth: u32,
    /// Proven lower bound over the whole tree at this point.
    pub bound: f64,
    pub incumbent: Option<f64>,
}

const KEY_RESOLUTION: f64 = 1e-9;

struct Node {
    depth: u32,
    bound: f64,
    changes: Vec<(usize, f64, f64)>,
    basis: Basis,
    branch_column: usize,
    branch_value: f64,
}

#[derive(Debug, Clone, Copy)]
struct QueueKey {
    bound: f64,
    seq: u64,
}

impl PartialEq for QueueKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for QueueKey {}
impl PartialOrd for QueueKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueueKey {
    // BinaryHeap pops the smallest bound; among equal bounds the newest
    // node, so that children which keep their parent's bound are explored
    // depth first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

/// Most fractional integer column among those of the highest branch
/// priority; ties go to the lowest column index.
pub(crate) fn most_fractional(lp: &Lp, values: &[f64], tol: f64) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64, i32, f64)> = None;
    for (j, &v) in values.iter().enumerate() {
        if !lp.integer[j] {
            continue;
        }
        let frac = v - v.floor();
        let score = frac.min(1.0 - frac);
        if score <= tol {
            continue;
        }
        let pr = lp.priority[j];
        let better = match best {
            None => true,
            Some((_, _, bp, bs)) => pr > bp || (pr == bp && score > bs),
        };
        if better {
            best = Some((j, v, pr, score));
        }
    }
    best.map(|(j, v, _, _)| (j, v))
}

struct Incumbent {
    values: Vec<f64>,
    objective: f64,
}

fn pop_live(heap: &mut BinaryHeap<QueueKey>, open: &HashMap<u64, Node>) -> Option<QueueKey> {
    while let Some(k) = heap.pop() {
        if open.contains_key(&k.seq) {
            return Some(k);
        }
    }
    None
}

fn peek_live(heap: &mut BinaryHeap<QueueKey>, open: &HashMap<u64, Node>) -> Option<QueueKey> {
    while let Some(&k) = heap.peek() {
        if open.contains_key(&k.seq) {
            return Some(k);
        }
        heap.pop();
    }
    None
}

/// Fixes every integer column at its rounded value and re-solves, so the
/// continuous columns agree exactly with the integer ones.
fn polish(lp: &Lp, state: &Simplex<'_>) -> Result<(Vec<f64>, f64), SolveError> {
    let mut fixed = state.clone();
    for j in 0..lp.n {
        if lp.integer[j] {
            let v = state.values()[j].round();
            fixed.set_bounds(j, v, v);
        }
    }
    fixed.sync();
    if fixed.solve()? == LpStatus::Optimal {
        let mut values = fixed.values().to_vec();
        for j in 0..lp.n {
            if lp.integer[j] {
                values[j] = values[j].round();
            }
        }
        let objective = (0..lp.n).map(|j| lp.cost[j] * values[j]).sum();
        return Ok((values, objective));
    }
    let mut values = state.values().to_vec();
    for j in 0..lp.n {
        if lp.integer[j] {
            values[j] = values[j].round();
        }
    }
    let objective = (0..lp.n).map(|j| lp.cost[j] * values[j]).sum();
    Ok((values, objective))
}

/// Solves `model` to the configured relative gap.
pub fn branch_and_bound(model: &LinearModel, config: &SolverConfig) -> Result<Solution, SolveError> {
    branch_and_bound_observed(model, config, &mut |e: NodeEvent| {
        log::debug!(
            target: "chargeplan_milp::bnb",
            "node {} depth {} bound {:.9} incumbent {}",
            e.id,
            e.depth,
            e.bound,
            e.incumbent.map_or_else(|| "-".to_string(), |v| format!("{v:.9}"))
        );
    })
}

/// [`branch_and_bound`] with a callback invoked for every node taken off the
/// queue, in processing order.
pub fn branch_and_bound_observed(
    model: &LinearModel,
    config: &SolverConfig,
    observer: &mut dyn FnMut(NodeEvent),
) -> Result<Solution, SolveError> {
    model.validate()?;
    let start = Instant::now();
    let offset = model.objective_offset();
    let lp = Lp::new(model, false);
    for j in 0..lp.n {
        if lp.lb[j] > lp.ub[j] {
            return Ok(Solution::without_point(Status::Infeasible, 0, start.elapsed()));
        }
    }

    let mut root = Simplex::slack(&lp);
    match root.solve()? {
        LpStatus::Infeasible => {
            return Ok(Solution::without_point(Status::Infeasible, 1, start.elapsed()))
        }
        LpStatus::Unbounded => {
            return Ok(Solution::without_point(Status::Unbounded, 1, start.elapsed()))
        }
        LpStatus::Optimal => {}
    }
    let tol = config.integrality_tol;
    let mut nodes: u64 = 1;
    let mut incumbent: Option<Incumbent> = None;

    let finish = |inc: Option<Incumbent>, status: Status, bound: f64, nodes: u64| -> Solution {
        match inc {
            Some(inc) => {
                let objective = inc.objective + offset;
                let best_bound = (bound + offset).min(objective);
                Solution {
                    status,
                    values: inc.values,
                    objective,
                    best_bound,
                    gap: relative_gap(objective, best_bound),
                    nodes,
                    elapsed: start.elapsed(),
                }
            }
            None => Solution::without_point(status, nodes, start.elapsed()),
        }
    };

    let root_bound = root.objective();
    let Some((col, val)) = most_fractional(&lp, root.values(), tol) else {
        let (values, objective) = polish(&lp, &root)?;
        let inc = Incumbent { values, objective };
        return Ok(finish(Some(inc), Status::Optimal, root_bound, nodes));
    };

    // Queue keys are bounds snapped to a grid a tenth of the gap target, so
    // nearly equal bounds tie and the newest node wins. Everything still
    // queued has a bound of at least the popped key minus half a step.
    let key_step = (config.rel_gap / 10.0).max(KEY_RESOLUTION) * (root_bound + offset).abs().max(1.0);
    let mut heap = BinaryHeap::new();
    let mut open: HashMap<u64, Node> = HashMap::new();
    let mut seq: u64 = 0;
    heap.push(QueueKey {
        bound: root_bound,
        seq,
    });
    open.insert(
        seq,
        Node {
            depth: 0,
            bound: root_bound,
            changes: Vec::new(),
            basis: root.basis(),
            branch_column: col,
            branch_value: val,
        },
    );

    drop(root);

    // Depth first (better child first) until an incumbent exists, best bound
    // afterwards. The heap holds every open node throughout and gives the
    // proven bound; entries of nodes already taken are dropped lazily.
    let mut stack: Vec<u64> = vec![0];
    let mut best_bound = root_bound;
    loop {
        let taken = if incumbent.is_none() {
            stack.pop()
        } else {
            pop_live(&mut heap, &open).map(|k| k.seq)
        };
        let Some(id) = taken else { break };
        let node = open.remove(&id).expect("queued node is stored");
        let rest = peek_live(&mut heap, &open).map_or(f64::INFINITY, |k| k.bound - key_step / 2.0);
        best_bound = best_bound.max(node.bound.min(rest));

        if let Some(inc) = &incumbent {
            let scaled = inc.objective + offset;
            if node.bound >= inc.objective - 1e-9 * scaled.abs().max(1.0) {
                continue;
            }
            if relative_gap(scaled, best_bound + offset) <= config.rel_gap {
                return Ok(finish(incumbent, Status::Optimal, best_bound, nodes));
            }
        }
        observer(NodeEvent {
            id,
            depth: node.depth,
            bound: best_bound + offset,
            incumbent: incumbent.as_ref().map(|i| i.objective + offset),
        });
        let out_of_nodes = config.node_limit.is_some_and(|l| nodes >= l);
        let out_of_time = config.time_limit.is_some_and(|l| start.elapsed() >= l);
        if out_of_nodes || out_of_time {
            let status = match &incumbent {
                Some(inc) => Status::Feasible {
                    gap: relative_gap(inc.objective + offset, best_bound + offset),
                },
                None => Status::LimitReached,
            };
            return Ok(finish(incumbent, status, best_bound, nodes));
        }

        let mut lb = lp.lb.clone();
        let mut ub = lp.ub.clone();
        for &(j, lo, hi) in &node.changes {
            lb[j] = lo;
            ub[j] = hi;
        }
        let parent = Simplex::from_basis(&lp, &node.basis, lb.clone(), ub.clone())?;
        let j = node.branch_column;
        let children = [
            (lb[j], node.branch_value.floor()),
            (node.branch_value.ceil(), ub[j]),
        ];
        let mut dive: Vec<(f64, u64)> = Vec::new();
        for (lo, hi) in children {
            if lo > hi {
                continue;
            }
            let mut child = parent.clone();
            child.set_bounds(j, lo, hi);
            child.sync();
            nodes += 1;
            match child.solve()? {
                LpStatus::Infeasible => continue,
                LpStatus::Unbounded => {
                    return Err(SolveError::NumericalFailure(
                        "bounded relaxation became unbounded after branching".into(),
                    ))
                }
                LpStatus::Optimal => {}
            }
            let bound = child.objective().max(node.bound);
            if let Some(inc) = &incumbent {
                if bound >= inc.objective - 1e-9 * (inc.objective + offset).abs().max(1.0) {
                    continue;
                }
            }
            match most_fractional(&lp, child.values(), tol) {
                None => {
                    let (values, objective) = polish(&lp, &child)?;
                    if incumbent.as_ref().map_or(true, |i| objective < i.objective) {
                        incumbent = Some(Incumbent { values, objective });
                    }
                }
                Some((col, val)) => {
                    seq += 1;
                    let mut changes = node.changes.clone();
                    changes.push((j, lo, hi));
                    heap.push(QueueKey {
                        bound: (bound / key_step).round() * key_step,
                        seq,
                    });
                    if incumbent.is_none() {
                        dive.push((bound, seq));
                    }
                    open.insert(
                        seq,
                        Node {
                            depth: node.depth + 1,
                            bound,
                            changes,
                            basis: child.basis(),
                            branch_column: col,
                            branch_value: val,
                        },
                    );
                }
            }
        }
        // The child with the lower bound is explored next.
        dive.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        stack.extend(dive.into_iter().map(|(_, s)| s));
    }

    Ok(match incumbent {
        Some(inc) => {
            let bound = inc.objective;
            finish(Some(inc), Status::Optimal, bound, nodes)
        }
        None => Solution::without_point(Status::Infeasible, nodes, start.elapsed()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ColumnKind, Relation};

    #[test]
    fn queue_pops_lowest_bound_then_newest() {
        let mut h = BinaryHeap::new();
        h.push(QueueKey { bound: 2.0, seq: 0 });
        h.push(QueueKey { bound: 1.0, seq: 2 });
        h.push(QueueKey { bound: 1.0, seq: 1 });
        let order: Vec<u64> = std::iter::from_fn(|| h.pop().map(|k| k.seq)).collect();
        assert_eq!(order, vec![2, 1, 0]);
    }

    #[test]
    fn branching_prefers_lowest_index_on_ties() {
        let mut m = LinearModel::new();
        m.integer("a", 0.0, 5.0);
        m.integer("b", 0.0, 5.0);
        m.integer("c", 0.0, 5.0);
        let lp = Lp::new(&m, false);
        assert_eq!(most_fractional(&lp, &[1.5, 2.5, 0.2], 1e-6), Some((0, 1.5)));
        assert_eq!(most_fractional(&lp, &[1.0, 2.0, 3.0], 1e-6), None);
    }

    #[test]
    fn branching_respects_priority() {
        let mut m = LinearModel::new();
        m.integer("a", 0.0, 5.0);
        let b = m.integer("b", 0.0, 5.0);
        m.set_branch_priority(b, 1);
        let lp = Lp::new(&m, false);
        assert_eq!(most_fractional(&lp, &[1.5, 2.1], 1e-6), Some((1, 2.1)));
        assert_eq!(most_fractional(&lp, &[1.5, 2.0], 1e-6), Some((0, 1.5)));
    }

    #[test]
    fn small_integer_program() {
        // max 5x + 4y s.t. 6x + 4y <= 24, x + 2y <= 6, integer -> (4, 0) obj 20
        let mut m = LinearModel::new();
        let x = m.add_column("x", 0.0, f64::INFINITY, ColumnKind::Integer, -5.0);
        let y = m.add_column("y", 0.0, f64::INFINITY, ColumnKind::Integer, -4.0);
        m.add_row("a", [(x, 6.0), (y, 4.0)], Relation::Le, 24.0);
        m.add_row("b", [(x, 1.0), (y, 2.0)], Relation::Le, 6.0);
        let s = branch_and_bound(&m, &SolverConfig::with_gap(0.0)).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective + 20.0).abs() < 1e-9);
        assert!(s.gap <= 1e-12);
    }

    #[test]
    fn node_limit_reports_partial_result() {
        let mut m = LinearModel::new();
        let cols: Vec<_> = (0..12)
            .map(|i| m.add_column(format!("b{i}"), 0.0, 1.0, ColumnKind::Binary, -((i % 5) as f64 + 1.5)))
            .collect();
        m.add_row("w", cols.iter().map(|&c| (c, 2.0 + (c % 3) as f64)), Relation::Le, 9.5);
        let cfg = SolverConfig {
            rel_gap: 0.0,
            node_limit: Some(2),
            ..SolverConfig::default()
        };
        let s = branch_and_bound(&m, &cfg).unwrap();
        assert!(matches!(s.status, Status::Feasible { .. } | Status::LimitReached));
    }
}
