//! Bounded revised simplex with a dense explicit basis inverse.
//!
//! Every row `i` gets a logical column `r_i` equal to the row activity, so the
//! constraint system becomes `[A | -I] z = 0` with all relations moved into
//! bounds on `r_i`. Nonbasic columns sit at one of their bounds (or at zero
//! when free). The primal method minimizes the sum of bound violations until
//! the basis is feasible, then the true objective. The dual method is used
//! whenever the starting basis is dual feasible, which is the common case
//! after a bound change in branch-and-bound.
//!
//! Pricing is Dantzig's rule with a switch to Bland's rule after a run of
//! degenerate pivots. The inverse is rebuilt from scratch every
//! [`REFACTOR_EVERY`] pivots.

use crate::error::SolveError;
use crate::model::{LinearModel, Relation};

pub(crate) const PRIMAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;
const REFACTOR_EVERY: usize = 100;
const DEGENERATE_RUN: usize = 50;
const MAX_RECOVERIES: usize = 3;
const SINGULAR_TOL: f64 = 1e-11;

/// Computational form of a [`LinearModel`]: column-major structural matrix
/// plus bounds and costs over structural and logical columns.
#[derive(Debug, Clone)]
pub(crate) struct Lp {
    pub m: usize,
    pub n: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    pub cost: Vec<f64>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    pub integer: Vec<bool>,
    pub priority: Vec<i32>,
    dual_tol: f64,
}

impl Lp {
    /// Builds the computational form. Integer column bounds are rounded
    /// inward unless `relax` is set.
    pub fn new(model: &LinearModel, relax: bool) -> Self {
        let n = model.num_columns();
        let m = model.num_rows();
        let mut counts = vec![0usize; n + 1];
        for row in model.rows() {
            for &(j, _) in &row.terms {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let mut fill = counts;
        let nnz = col_start[n];
        let mut col_row = vec![0; nnz];
        let mut col_val = vec![0.0; nnz];
        for (i, row) in model.rows().iter().enumerate() {
            for &(j, a) in &row.terms {
                col_row[fill[j]] = i;
                col_val[fill[j]] = a;
                fill[j] += 1;
            }
        }

        let mut cost = vec![0.0; n + m];
        let mut lb = vec![0.0; n + m];
        let mut ub = vec![0.0; n + m];
        let mut integer = vec![false; n];
        for (j, c) in model.columns().iter().enumerate() {
            cost[j] = c.objective;
            integer[j] = c.kind.is_integer() && !relax;
            if integer[j] {
                lb[j] = (c.lower - 1e-9).ceil();
                ub[j] = (c.upper + 1e-9).floor();
            } else {
                lb[j] = c.lower;
                ub[j] = c.upper;
            }
        }
        for (i, row) in model.rows().iter().enumerate() {
            let (lo, hi) = match row.relation {
                Relation::Le => (f64::NEG_INFINITY, row.rhs),
                Relation::Ge => (row.rhs, f64::INFINITY),
                Relation::Eq => (row.rhs, row.rhs),
            };
            lb[n + i] = lo;
            ub[n + i] = hi;
        }
        let cmax = cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        Lp {
            m,
            n,
            col_start,
            col_row,
            col_val,
            cost,
            lb,
            ub,
            integer,
            priority: model.columns().iter().map(|c| c.branch_priority).collect(),
            dual_tol: 1e-9 * cmax.max(1.0),
        }
    }

    pub fn total(&self) -> usize {
        self.n + self.m
    }

    #[inline]
    fn dot_col(&self, y: &[f64], j: usize) -> f64 {
        if j < self.n {
            let (s, e) = (self.col_start[j], self.col_start[j + 1]);
            let mut acc = 0.0;
            for k in s..e {
                acc += self.col_val[k] * y[self.col_row[k]];
            }
            acc
        } else {
            -y[j - self.n]
        }
    }

    #[inline]
    fn for_each_in_col(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for k in self.col_start[j]..self.col_start[j + 1] {
                f(self.col_row[k], self.col_val[k]);
            }
        } else {
            f(j - self.n, -1.0);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarState {
    Basic,
    Lower,
    Upper,
    Free,
}

/// Compact restart information: which columns are basic and where the
/// nonbasic ones sit.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Basis {
    pub basic: Vec<usize>,
    pub state: Vec<VarState>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub(crate) struct Simplex<'a> {
    lp: &'a Lp,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    basic: Vec<usize>,
    state: Vec<VarState>,
    x: Vec<f64>,
    binv: Vec<f64>,
    updates: usize,
    degenerate: usize,
    bland: bool,
    pub iterations: u64,
}

fn nonbasic_state(lo: f64, hi: f64, preferred: VarState) -> (VarState, f64) {
    match preferred {
        VarState::Upper if hi.is_finite() => (VarState::Upper, hi),
        _ if lo.is_finite() => (VarState::Lower, lo),
        _ if hi.is_finite() => (VarState::Upper, hi),
        _ => (VarState::Free, 0.0),
    }
}

impl<'a> Simplex<'a> {
    /// All-logical starting basis.
    pub fn slack(lp: &'a Lp) -> Self {
        let (m, n) = (lp.m, lp.n);
        let mut state = vec![VarState::Basic; n + m];
        let mut x = vec![0.0; n + m];
        for j in 0..n {
            let (s, v) = nonbasic_state(lp.lb[j], lp.ub[j], VarState::Lower);
            state[j] = s;
            x[j] = v;
        }
        let mut binv = vec![0.0; m * m];
        for p in 0..m {
            binv[p * m + p] = -1.0;
        }
        let mut s = Simplex {
            lp,
            lb: lp.lb.clone(),
            ub: lp.ub.clone(),
            basic: (n..n + m).collect(),
            state,
            x,
            binv,
            updates: 0,
            degenerate: 0,
            bland: false,
            iterations: 0,
        };
        s.recompute_basic();
        s
    }

    /// Restarts from a stored basis under the given bounds.
    pub fn from_basis(
        lp: &'a Lp,
        basis: &Basis,
        lb: Vec<f64>,
        ub: Vec<f64>,
    ) -> Result<Self, SolveError> {
        let m = lp.m;
        let mut s = Simplex {
            lp,
            lb,
            ub,
            basic: basis.basic.clone(),
            state: basis.state.clone(),
            x: vec![0.0; lp.total()],
            binv: vec![0.0; m * m],
            updates: 0,
            degenerate: 0,
            bland: false,
            iterations: 0,
        };
        s.refactor()?;
        s.reset_nonbasic();
        s.recompute_basic();
        Ok(s)
    }

    pub fn basis(&self) -> Basis {
        Basis {
            basic: self.basic.clone(),
            state: self.state.clone(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.x[..self.lp.n]
    }

    pub fn objective(&self) -> f64 {
        (0..self.lp.n).map(|j| self.lp.cost[j] * self.x[j]).sum()
    }

    /// Replaces bounds of one column; call [`Simplex::sync`] afterwards.
    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lb[j] = lo;
        self.ub[j] = hi;
    }

    /// Moves nonbasic columns onto their (possibly changed) bounds and
    /// recomputes the basic values.
    pub fn sync(&mut self) {
        self.reset_nonbasic();
        self.recompute_basic();
    }

    fn reset_nonbasic(&mut self) {
        for j in 0..self.lp.total() {
            if self.state[j] != VarState::Basic {
                let (s, v) = nonbasic_state(self.lb[j], self.ub[j], self.state[j]);
                self.state[j] = s;
                self.x[j] = v;
            }
        }
    }

    fn recompute_basic(&mut self) {
        let (m, n) = (self.lp.m, self.lp.n);
        let mut v = vec![0.0; m];
        for j in 0..n + m {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                self.lp.for_each_in_col(j, |i, a| v[i] -= a * xj);
            }
        }
        for p in 0..m {
            let row = &self.binv[p * m..(p + 1) * m];
            let val: f64 = row.iter().zip(&v).map(|(b, vi)| b * vi).sum();
            self.x[self.basic[p]] = val;
        }
    }

    /// Gauss-Jordan inversion of the current basis matrix. Columns that
    /// turn out linearly dependent are replaced by logicals.
    fn refactor(&mut self) -> Result<(), SolveError> {
        self.factor(1)
    }

    /// With the basis split into structural columns S and logical columns
    /// (each `-e_i`), only the square block of S on the rows without a basic
    /// logical needs a real inversion:
    /// `B = [[S1, 0], [S2, -I]]`, `B^-1 = [[S1^-1, 0], [S2 S1^-1, -I]]`.
    fn factor(&mut self, repairs_left: u32) -> Result<(), SolveError> {
        let (m, n) = (self.lp.m, self.lp.n);
        let mut logical_row = vec![false; m];
        let mut structural = Vec::new();
        for (p, &j) in self.basic.iter().enumerate() {
            if j >= n {
                logical_row[j - n] = true;
            } else {
                structural.push(p);
            }
        }
        // Rows of the structural block, and their index within it.
        let rows: Vec<usize> = (0..m).filter(|&i| !logical_row[i]).collect();
        let k = rows.len();
        debug_assert_eq!(k, structural.len());
        let mut local = vec![usize::MAX; m];
        for (a, &i) in rows.iter().enumerate() {
            local[i] = a;
        }
        // S1 row-major [local row][structural index]; S2 as sparse rows.
        let mut s1 = vec![0.0; k * k];
        let mut s2: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for (c, &p) in structural.iter().enumerate() {
            self.lp.for_each_in_col(self.basic[p], |i, v| {
                if logical_row[i] {
                    s2[i].push((c, v));
                } else {
                    s1[local[i] * k + c] = v;
                }
            });
        }

        // Gauss-Jordan on S1 with partial pivoting; `inv` is row-major
        // [local row][local row] and ends up holding S1^-1 with rows
        // permuted by `row_of`.
        let mut inv = vec![0.0; k * k];
        for a in 0..k {
            inv[a * k + a] = 1.0;
        }
        let mut row_of = vec![usize::MAX; k];
        let mut used = vec![false; k];
        let mut deficient = Vec::new();
        let mut nz_b = Vec::with_capacity(k);
        let mut nz_i = Vec::with_capacity(k);
        for c in 0..k {
            let mut best = usize::MAX;
            let mut best_abs = 0.0;
            for r in 0..k {
                if !used[r] {
                    let v = s1[r * k + c].abs();
                    if v > best_abs {
                        best_abs = v;
                        best = r;
                    }
                }
            }
            if best == usize::MAX || best_abs < SINGULAR_TOL {
                deficient.push(c);
                continue;
            }
            used[best] = true;
            row_of[c] = best;
            let inv_piv = 1.0 / s1[best * k + c];
            nz_b.clear();
            nz_i.clear();
            for t in 0..k {
                let v = &mut s1[best * k + t];
                if *v != 0.0 {
                    *v *= inv_piv;
                    nz_b.push((t, *v));
                }
                let w = &mut inv[best * k + t];
                if *w != 0.0 {
                    *w *= inv_piv;
                    nz_i.push((t, *w));
                }
            }
            for r in 0..k {
                if r == best {
                    continue;
                }
                let f = s1[r * k + c];
                if f == 0.0 {
                    continue;
                }
                for &(t, v) in &nz_b {
                    s1[r * k + t] -= f * v;
                }
                s1[r * k + c] = 0.0;
                for &(t, v) in &nz_i {
                    inv[r * k + t] -= f * v;
                }
            }
        }

        if !deficient.is_empty() {
            // Swap dependent columns for the logicals of the uncovered rows.
            if repairs_left == 0 {
                return Err(SolveError::NumericalFailure(
                    "singular basis during refactorization".into(),
                ));
            }
            let free_rows = (0..k).filter(|&r| !used[r]);
            for (c, r) in deficient.into_iter().zip(free_rows) {
                let p = structural[c];
                let old = self.basic[p];
                let (st, v) = nonbasic_state(self.lb[old], self.ub[old], VarState::Lower);
                self.state[old] = st;
                self.x[old] = v;
                self.basic[p] = n + rows[r];
                self.state[n + rows[r]] = VarState::Basic;
            }
            log::debug!("repaired singular basis");
            return self.factor(repairs_left - 1);
        }

        self.binv.iter_mut().for_each(|v| *v = 0.0);
        for (c, &p) in structural.iter().enumerate() {
            let src = &inv[row_of[c] * k..(row_of[c] + 1) * k];
            let dst = &mut self.binv[p * m..(p + 1) * m];
            for (b, &v) in src.iter().enumerate() {
                dst[rows[b]] = v;
            }
        }
        for (p, &j) in self.basic.iter().enumerate() {
            if j < n {
                continue;
            }
            let i = j - n;
            let mut acc = vec![0.0; k];
            for &(c, v) in &s2[i] {
                let src = &inv[row_of[c] * k..(row_of[c] + 1) * k];
                for (a, &w) in acc.iter_mut().zip(src) {
                    *a += v * w;
                }
            }
            let dst = &mut self.binv[p * m..(p + 1) * m];
            for (b, &v) in acc.iter().enumerate() {
                dst[rows[b]] = v;
            }
            dst[i] = -1.0;
        }
        self.updates = 0;
        Ok(())
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.lp.m;
        let mut alpha = vec![0.0; m];
        self.lp.for_each_in_col(j, |i, a| {
            for (p, out) in alpha.iter_mut().enumerate() {
                *out += self.binv[p * m + i] * a;
            }
        });
        alpha
    }

    fn duals(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.lp.m;
        let mut y = vec![0.0; m];
        for (p, &c) in cb.iter().enumerate() {
            if c != 0.0 {
                let row = &self.binv[p * m..(p + 1) * m];
                for (yi, b) in y.iter_mut().zip(row) {
                    *yi += c * b;
                }
            }
        }
        y
    }

    fn pivot(&mut self, p: usize, q: usize, alpha: &[f64]) {
        let m = self.lp.m;
        let inv_piv = 1.0 / alpha[p];
        for k in 0..m {
            self.binv[p * m + k] *= inv_piv;
        }
        let prow = self.binv[p * m..(p + 1) * m].to_vec();
        for (i, &ai) in alpha.iter().enumerate() {
            if i == p || ai == 0.0 {
                continue;
            }
            let row = &mut self.binv[i * m..(i + 1) * m];
            for (r, pr) in row.iter_mut().zip(&prow) {
                *r -= ai * pr;
            }
        }
        let leaving = self.basic[p];
        self.basic[p] = q;
        self.state[q] = VarState::Basic;
        debug_assert_ne!(self.state[leaving], VarState::Basic);
        self.updates += 1;
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.lb[j] == self.ub[j]
    }

    fn reduced_cost(&self, y: &[f64], j: usize) -> f64 {
        self.lp.cost[j] - self.lp.dot_col(y, j)
    }

    fn basic_costs(&self) -> Vec<f64> {
        self.basic.iter().map(|&j| self.lp.cost[j]).collect()
    }

    fn max_primal_infeasibility(&self) -> f64 {
        self.basic
            .iter()
            .map(|&j| (self.lb[j] - self.x[j]).max(self.x[j] - self.ub[j]).max(0.0))
            .fold(0.0, f64::max)
    }

    pub fn is_dual_feasible(&self) -> bool {
        let y = self.duals(&self.basic_costs());
        let tol = self.lp.dual_tol;
        (0..self.lp.total()).all(|j| {
            if self.is_fixed(j) {
                return true;
            }
            let d = self.reduced_cost(&y, j);
            match self.state[j] {
                VarState::Basic => true,
                VarState::Lower => d >= -tol,
                VarState::Upper => d <= tol,
                VarState::Free => d.abs() <= tol,
            }
        })
    }

    fn max_iterations(&self) -> u64 {
        (50 * self.lp.total() + 10_000) as u64
    }

    fn note_step(&mut self, step: f64) {
        if step.abs() <= 1e-12 {
            self.degenerate += 1;
            if self.degenerate > DEGENERATE_RUN {
                self.bland = true;
            }
        } else {
            self.degenerate = 0;
            self.bland = false;
        }
    }

    /// Solves from the current basis, picking the dual method when the basis
    /// allows it. A final refactorization confirms the answer.
    pub fn solve(&mut self) -> Result<LpStatus, SolveError> {
        for _ in 0..MAX_RECOVERIES {
            let status = if self.is_dual_feasible() {
                match self.dual()? {
                    LpStatus::Optimal => self.primal()?,
                    other => other,
                }
            } else {
                self.primal()?
            };
            if status != LpStatus::Optimal {
                return Ok(status);
            }
            if self.updates == 0 {
                return Ok(status);
            }
            self.refactor()?;
            self.recompute_basic();
            if self.max_primal_infeasibility() <= PRIMAL_TOL && self.is_dual_feasible() {
                return Ok(status);
            }
        }
        Err(SolveError::NumericalFailure(
            "optimality could not be confirmed after refactorization".into(),
        ))
    }

    /// Primal simplex; phase one minimizes the total bound violation.
    pub fn primal(&mut self) -> Result<LpStatus, SolveError> {
        let lp = self.lp;
        let (m, total) = (lp.m, lp.total());
        let mut cb = vec![0.0; m];
        self.bland = false;
        self.degenerate = 0;
        loop {
            self.iterations += 1;
            if self.iterations > self.max_iterations() {
                return Err(SolveError::NumericalFailure("iteration limit".into()));
            }
            if self.updates >= REFACTOR_EVERY {
                self.refactor()?;
                self.recompute_basic();
            }

            let mut phase1 = false;
            for p in 0..m {
                let j = self.basic[p];
                let v = self.x[j];
                cb[p] = if v < self.lb[j] - PRIMAL_TOL {
                    phase1 = true;
                    -1.0
                } else if v > self.ub[j] + PRIMAL_TOL {
                    phase1 = true;
                    1.0
                } else {
                    0.0
                };
            }
            if !phase1 {
                for p in 0..m {
                    cb[p] = lp.cost[self.basic[p]];
                }
            }
            let y = self.duals(&cb);
            let dtol = if phase1 { 1e-9 } else { lp.dual_tol };

            let mut entering: Option<(usize, f64)> = None;
            for j in 0..total {
                let st = self.state[j];
                if st == VarState::Basic || self.is_fixed(j) {
                    continue;
                }
                let c = if phase1 { 0.0 } else { lp.cost[j] };
                let d = c - lp.dot_col(&y, j);
                let attractive = match st {
                    VarState::Lower => d < -dtol,
                    VarState::Upper => d > dtol,
                    VarState::Free => d.abs() > dtol,
                    VarState::Basic => false,
                };
                if !attractive {
                    continue;
                }
                if self.bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.map_or(true, |(_, bd)| d.abs() > bd.abs()) {
                    entering = Some((j, d));
                }
            }
            let Some((q, dq)) = entering else {
                return Ok(if phase1 {
                    LpStatus::Infeasible
                } else {
                    LpStatus::Optimal
                });
            };
            let dir = if dq < 0.0 { 1.0 } else { -1.0 };
            let alpha = self.ftran(q);

            // (position, step, |alpha|, leaves at upper)
            let mut best: Option<(usize, f64, f64, bool)> = None;
            for p in 0..m {
                let a = alpha[p];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let j = self.basic[p];
                let delta = -dir * a;
                let v = self.x[j];
                let (lo, hi) = (self.lb[j], self.ub[j]);
                let limit = if phase1 && v < lo - PRIMAL_TOL {
                    if delta > 0.0 {
                        Some(((lo - v) / delta, false))
                    } else {
                        None
                    }
                } else if phase1 && v > hi + PRIMAL_TOL {
                    if delta < 0.0 {
                        Some(((v - hi) / -delta, true))
                    } else {
                        None
                    }
                } else if delta < 0.0 {
                    lo.is_finite().then(|| ((v - lo).max(0.0) / -delta, false))
                } else {
                    hi.is_finite().then(|| ((hi - v).max(0.0) / delta, true))
                };
                let Some((step, up)) = limit else { continue };
                let better = match best {
                    None => true,
                    Some((bp, bs, ba, _)) => {
                        if step < bs - RATIO_TIE {
                            true
                        } else if step <= bs + RATIO_TIE {
                            if self.bland {
                                j < self.basic[bp]
                            } else {
                                a.abs() > ba
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    best = Some((p, step, a.abs(), up));
                }
            }

            let flip = self.ub[q] - self.lb[q];
            let flips = flip.is_finite() && best.map_or(true, |(_, s, _, _)| flip <= s);
            if flips {
                for p in 0..m {
                    let j = self.basic[p];
                    self.x[j] -= dir * flip * alpha[p];
                }
                if dir > 0.0 {
                    self.state[q] = VarState::Upper;
                    self.x[q] = self.ub[q];
                } else {
                    self.state[q] = VarState::Lower;
                    self.x[q] = self.lb[q];
                }
                self.note_step(flip);
                continue;
            }
            let Some((p, step, _, up)) = best else {
                if phase1 {
                    return Err(SolveError::NumericalFailure(
                        "phase one ratio test found no blocking row".into(),
                    ));
                }
                return Ok(LpStatus::Unbounded);
            };
            for r in 0..m {
                let j = self.basic[r];
                self.x[j] -= dir * step * alpha[r];
            }
            self.x[q] += dir * step;
            let leaving = self.basic[p];
            if up {
                self.state[leaving] = VarState::Upper;
                self.x[leaving] = self.ub[leaving];
            } else {
                self.state[leaving] = VarState::Lower;
                self.x[leaving] = self.lb[leaving];
            }
            self.pivot(p, q, &alpha);
            self.note_step(step);
        }
    }

    /// Dual simplex; requires a dual feasible basis.
    pub fn dual(&mut self) -> Result<LpStatus, SolveError> {
        let lp = self.lp;
        let (m, total) = (lp.m, lp.total());
        self.bland = false;
        self.degenerate = 0;
        loop {
            self.iterations += 1;
            if self.iterations > self.max_iterations() {
                return Err(SolveError::NumericalFailure("iteration limit".into()));
            }
            if self.updates >= REFACTOR_EVERY {
                self.refactor()?;
                self.recompute_basic();
            }

            let mut leave: Option<(usize, f64)> = None;
            for p in 0..m {
                let j = self.basic[p];
                let v = self.x[j];
                let infeas = (self.lb[j] - v).max(v - self.ub[j]);
                if infeas <= PRIMAL_TOL {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some((bp, bi)) => {
                        if self.bland {
                            j < self.basic[bp]
                        } else {
                            infeas > bi
                        }
                    }
                };
                if better {
                    leave = Some((p, infeas));
                }
            }
            let Some((p, _)) = leave else {
                return Ok(LpStatus::Optimal);
            };
            let jl = self.basic[p];
            let below = self.x[jl] < self.lb[jl];

            let y = self.duals(&self.basic_costs());
            let rho = self.binv[p * m..(p + 1) * m].to_vec();
            // (column, ratio, |alpha|)
            let mut best: Option<(usize, f64, f64)> = None;
            for k in 0..total {
                let st = self.state[k];
                if st == VarState::Basic || self.is_fixed(k) {
                    continue;
                }
                let a = lp.dot_col(&rho, k);
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let eligible = match (st, below) {
                    (VarState::Lower, true) => a < 0.0,
                    (VarState::Upper, true) => a > 0.0,
                    (VarState::Lower, false) => a > 0.0,
                    (VarState::Upper, false) => a < 0.0,
                    (VarState::Free, _) => true,
                    (VarState::Basic, _) => false,
                };
                if !eligible {
                    continue;
                }
                let d = self.reduced_cost(&y, k);
                let slack = match st {
                    VarState::Lower => d.max(0.0),
                    VarState::Upper => (-d).max(0.0),
                    _ => d.abs(),
                };
                let ratio = slack / a.abs();
                let better = match best {
                    None => true,
                    Some((bk, br, ba)) => {
                        if ratio < br - RATIO_TIE {
                            true
                        } else if ratio <= br + RATIO_TIE {
                            if self.bland {
                                k < bk
                            } else {
                                a.abs() > ba
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    best = Some((k, ratio, a.abs()));
                }
            }
            let Some((q, ratio, _)) = best else {
                return Ok(LpStatus::Infeasible);
            };
            let alpha = self.ftran(q);
            if alpha[p].abs() <= PIVOT_TOL {
                // Row and column disagree; the inverse has drifted.
                self.refactor()?;
                self.recompute_basic();
                continue;
            }
            let target = if below { self.lb[jl] } else { self.ub[jl] };
            let delta = (self.x[jl] - target) / alpha[p];
            for r in 0..m {
                let j = self.basic[r];
                self.x[j] -= delta * alpha[r];
            }
            self.x[q] += delta;
            self.state[jl] = if below {
                VarState::Lower
            } else {
                VarState::Upper
            };
            self.x[jl] = target;
            self.pivot(p, q, &alpha);
            self.note_step(ratio);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ColumnKind, LinearModel, Relation};

    fn solve(model: &LinearModel) -> (LpStatus, Vec<f64>, f64) {
        let lp = Lp::new(model, true);
        let mut s = Simplex::slack(&lp);
        let st = s.solve().unwrap();
        (st, s.values().to_vec(), s.objective())
    }

    #[test]
    fn single_lower_bound_row() {
        let mut m = LinearModel::new();
        let x = m.add_column("x", f64::NEG_INFINITY, f64::INFINITY, ColumnKind::Continuous, 1.0);
        m.add_row("r", [(x, 1.0)], Relation::Ge, 3.0);
        let (st, v, obj) = solve(&m);
        assert_eq!(st, LpStatus::Optimal);
        assert!((v[0] - 3.0).abs() < 1e-9 && (obj - 3.0).abs() < 1e-9);
    }

    #[test]
    fn textbook_maximization() {
        let mut m = LinearModel::new();
        let x = m.add_column("x", 0.0, f64::INFINITY, ColumnKind::Continuous, -1.0);
        let y = m.add_column("y", 0.0, f64::INFINITY, ColumnKind::Continuous, -1.0);
        m.add_row("r", [(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
        let (st, _, obj) = solve(&m);
        assert_eq!(st, LpStatus::Optimal);
        assert!((obj + 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut m = LinearModel::new();
        let x = m.continuous("x", 0.0, 10.0);
        m.add_row("a", [(x, 1.0)], Relation::Ge, 4.0);
        m.add_row("b", [(x, 1.0)], Relation::Le, 3.0);
        assert_eq!(solve(&m).0, LpStatus::Infeasible);

        let mut m = LinearModel::new();
        let x = m.add_column("x", 0.0, f64::INFINITY, ColumnKind::Continuous, -1.0);
        let y = m.add_column("y", 0.0, f64::INFINITY, ColumnKind::Continuous, 0.0);
        m.add_row("a", [(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
        assert_eq!(solve(&m).0, LpStatus::Unbounded);
    }

    #[test]
    fn equality_rows_and_free_columns() {
        // min x + 2y, x - y = 1, x + y >= 3, y free
        let mut m = LinearModel::new();
        let x = m.add_column("x", 0.0, f64::INFINITY, ColumnKind::Continuous, 1.0);
        let y = m.add_column("y", f64::NEG_INFINITY, f64::INFINITY, ColumnKind::Continuous, 2.0);
        m.add_row("e", [(x, 1.0), (y, -1.0)], Relation::Eq, 1.0);
        m.add_row("g", [(x, 1.0), (y, 1.0)], Relation::Ge, 3.0);
        let (st, v, obj) = solve(&m);
        assert_eq!(st, LpStatus::Optimal);
        assert!((v[0] - 2.0).abs() < 1e-9 && (v[1] - 1.0).abs() < 1e-9);
        assert!((obj - 4.0).abs() < 1e-9);
    }

    #[test]
    fn warm_restart_after_bound_change_uses_dual() {
        // max x + y s.t. 2x + y <= 4, x + 2y <= 4 ; optimum (4/3, 4/3)
        let mut m = LinearModel::new();
        let x = m.add_column("x", 0.0, 10.0, ColumnKind::Continuous, -1.0);
        let y = m.add_column("y", 0.0, 10.0, ColumnKind::Continuous, -1.0);
        m.add_row("a", [(x, 2.0), (y, 1.0)], Relation::Le, 4.0);
        m.add_row("b", [(x, 1.0), (y, 2.0)], Relation::Le, 4.0);
        let lp = Lp::new(&m, true);
        let mut s = Simplex::slack(&lp);
        assert_eq!(s.solve().unwrap(), LpStatus::Optimal);
        assert!((s.objective() + 8.0 / 3.0).abs() < 1e-9);
        s.set_bounds(x, 0.0, 1.0);
        s.sync();
        assert!(s.is_dual_feasible());
        assert_eq!(s.solve().unwrap(), LpStatus::Optimal);
        // x = 1, y = 1.5
        assert!((s.objective() + 2.5).abs() < 1e-9);

        let restarted = Simplex::from_basis(&lp, &s.basis(), s.lb.clone(), s.ub.clone()).unwrap();
        assert!((restarted.objective() + 2.5).abs() < 1e-9);
    }
}
