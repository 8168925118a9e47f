//! Exhaustive enumeration over integer assignments, used as a ground-truth
//! oracle for small models.

use std::time::Instant;

use crate::error::SolveError;
use crate::model::LinearModel;
use crate::simplex::{Lp, LpStatus, Simplex};
use crate::solution::{Solution, Status};

/// Default cap on the number of integer columns.
pub const DEFAULT_MAX_INTEGERS: usize = 20;

/// Fixes every integer column to every value in its range, solves the
/// remaining LP for each assignment and returns the global best.
///
/// Assignments are visited in reflected mixed-radix Gray order so that
/// consecutive LPs differ in one fixed column and can be warm-started. The
/// total number of assignments is capped at `2^max_integers`.
pub fn brute_force_enumerate(model: &LinearModel, max_integers: usize) -> Result<Solution, SolveError> {
    model.validate()?;
    let start = Instant::now();
    let ints: Vec<usize> = model.integer_columns().collect();
    let cap = 1usize << max_integers.min(40);
    let lp = Lp::new(model, false);

    let mut radix = Vec::with_capacity(ints.len());
    let mut combinations = 1.0f64;
    for &j in &ints {
        let (lo, hi) = (lp.lb[j], lp.ub[j]);
        if !lo.is_finite() || !hi.is_finite() {
            return Err(SolveError::TooLarge {
                integers: ints.len(),
                combinations: f64::INFINITY,
                cap,
            });
        }
        if lo > hi {
            return Ok(Solution::without_point(Status::Infeasible, 0, start.elapsed()));
        }
        let r = (hi - lo) as usize + 1;
        radix.push(r);
        combinations *= r as f64;
    }
    if ints.len() > max_integers || combinations > cap as f64 {
        return Err(SolveError::TooLarge {
            integers: ints.len(),
            combinations,
            cap,
        });
    }

    let mut state = Simplex::slack(&lp);
    let mut digits = vec![0usize; ints.len()];
    let mut dirs = vec![1isize; ints.len()];
    for &j in &ints {
        let v = lp.lb[j];
        state.set_bounds(j, v, v);
    }
    state.sync();

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut count: u64 = 0;
    loop {
        count += 1;
        match state.solve()? {
            LpStatus::Unbounded => {
                return Ok(Solution::without_point(Status::Unbounded, count, start.elapsed()))
            }
            LpStatus::Infeasible => {}
            LpStatus::Optimal => {
                let obj = state.objective();
                if best.as_ref().map_or(true, |(_, b)| obj < *b - 1e-12) {
                    let mut values = state.values().to_vec();
                    for &j in &ints {
                        values[j] = values[j].round();
                    }
                    best = Some((values, obj));
                }
            }
        }

        // Advance the lowest digit that can still move in its direction.
        let mut moved = false;
        for k in 0..digits.len() {
            let next = digits[k] as isize + dirs[k];
            if next >= 0 && (next as usize) < radix[k] {
                digits[k] = next as usize;
                let v = lp.lb[ints[k]] + digits[k] as f64;
                state.set_bounds(ints[k], v, v);
                state.sync();
                moved = true;
                break;
            }
            dirs[k] = -dirs[k];
        }
        if !moved {
            break;
        }
    }

    Ok(match best {
        Some((values, obj)) => {
            let objective = obj + model.objective_offset();
            Solution {
                status: Status::Optimal,
                values,
                objective,
                best_bound: objective,
                gap: 0.0,
                nodes: count,
                elapsed: start.elapsed(),
            }
        }
        None => Solution::without_point(Status::Infeasible, count, start.elapsed()),
    })
}
