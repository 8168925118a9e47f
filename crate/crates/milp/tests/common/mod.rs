#![allow(dead_code)]

use chargeplan_milp::{ColumnKind, LinearModel, Relation};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense model data with dyadic coefficients (multiples of 1/64), so it
/// converts exactly to rationals.
#[derive(Debug, Clone)]
pub struct Dense {
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub kinds: Vec<ColumnKind>,
    pub rows: Vec<(Vec<f64>, Relation, f64)>,
}

impl Dense {
    pub fn to_model(&self) -> LinearModel {
        let mut m = LinearModel::new();
        for j in 0..self.cost.len() {
            m.add_column(format!("x{j}"), self.lower[j], self.upper[j], self.kinds[j], self.cost[j]);
        }
        for (i, (a, rel, b)) in self.rows.iter().enumerate() {
            m.add_row(format!("r{i}"), a.iter().copied().enumerate(), *rel, *b);
        }
        m
    }
}

fn half(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> f64 {
    rng.gen_range(2 * lo..=2 * hi) as f64 / 2.0
}

fn relation(rng: &mut ChaCha8Rng) -> Relation {
    match rng.gen_range(0..5) {
        0 | 1 => Relation::Le,
        2 | 3 => Relation::Ge,
        _ => Relation::Eq,
    }
}

/// Random bounded LP. Most instances are made feasible around a hidden
/// point; with `feasible = false` the right-hand sides are arbitrary.
pub fn random_lp(seed: u64, n: usize, m: usize, feasible: bool) -> Dense {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = Dense {
        cost: Vec::new(),
        lower: Vec::new(),
        upper: Vec::new(),
        kinds: vec![ColumnKind::Continuous; n],
        rows: Vec::new(),
    };
    let mut point = Vec::new();
    for _ in 0..n {
        d.cost.push(half(&mut rng, -6, 6));
        let lo = if rng.gen_bool(0.25) { half(&mut rng, -3, 0) } else { 0.0 };
        let hi = lo + half(&mut rng, 1, 8);
        d.lower.push(lo);
        d.upper.push(hi);
        point.push(half(&mut rng, (2.0 * lo) as i32, (2.0 * hi) as i32) / 2.0);
    }
    for _ in 0..m {
        let a: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.3) { 0.0 } else { half(&mut rng, -5, 5) })
            .collect();
        let rel = relation(&mut rng);
        let b = if feasible {
            let act: f64 = a.iter().zip(&point).map(|(a, x)| a * x).sum();
            match rel {
                Relation::Le => act + half(&mut rng, 0, 4),
                Relation::Ge => act - half(&mut rng, 0, 4),
                Relation::Eq => act,
            }
        } else {
            half(&mut rng, -10, 10)
        };
        d.rows.push((a, rel, b));
    }
    d
}

/// Random MILP with `bin` binaries followed by `cont` continuous columns in
/// [0, 4]. Feasible by construction around a hidden point.
pub fn random_milp(seed: u64, bin: usize, cont: usize, rows: usize) -> Dense {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = bin + cont;
    let mut d = Dense {
        cost: (0..n).map(|_| half(&mut rng, -8, 8)).collect(),
        lower: vec![0.0; n],
        upper: (0..n).map(|j| if j < bin { 1.0 } else { 4.0 }).collect(),
        kinds: (0..n)
            .map(|j| if j < bin { ColumnKind::Binary } else { ColumnKind::Continuous })
            .collect(),
        rows: Vec::new(),
    };
    let point: Vec<f64> = (0..n)
        .map(|j| if j < bin { rng.gen_range(0..=1) as f64 } else { half(&mut rng, 0, 4) })
        .collect();
    for _ in 0..rows {
        let a: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.4) { 0.0 } else { half(&mut rng, -6, 6) })
            .collect();
        let act: f64 = a.iter().zip(&point).map(|(a, x)| a * x).sum();
        let rel = relation(&mut rng);
        let b = match rel {
            Relation::Le => act + half(&mut rng, 0, 3),
            Relation::Ge => act - half(&mut rng, 0, 3),
            Relation::Eq => act,
        };
        d.rows.push((a, rel, b));
    }
    d
}

fn q(v: f64) -> BigRational {
    let scaled = (v * 64.0).round();
    assert_eq!(scaled, v * 64.0, "value {v} is not a multiple of 1/64");
    BigRational::new(BigInt::from(scaled as i64), BigInt::from(64))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Exact {
    Optimal(f64),
    Infeasible,
}

/// Exact two-phase tableau simplex with Bland's rule over rationals.
/// Integrality marks are ignored and all columns must be bounded.
pub fn rational_lp(d: &Dense) -> Exact {
    let n = d.cost.len();
    let zero = BigRational::zero();
    // Shift to x' = x - l in [0, u - l].
    let lower: Vec<BigRational> = d.lower.iter().map(|&v| q(v)).collect();
    let width: Vec<BigRational> = d.upper.iter().zip(&d.lower).map(|(&u, &l)| q(u) - q(l)).collect();

    let m_gen = d.rows.len();
    let n_slack = d.rows.iter().filter(|r| r.1 != Relation::Eq).count();
    // Columns: x' (n), bound slacks (n), row slacks (n_slack), artificials (m_gen).
    let total = 2 * n + n_slack + m_gen;
    let rhs = total;
    let mut t: Vec<Vec<BigRational>> = Vec::new();
    let mut basis: Vec<usize> = Vec::new();
    for j in 0..n {
        let mut row = vec![zero.clone(); total + 1];
        row[j] = BigRational::one();
        row[n + j] = BigRational::one();
        row[rhs] = width[j].clone();
        t.push(row);
        basis.push(n + j);
    }
    let mut slack = 2 * n;
    for (i, (a, rel, b)) in d.rows.iter().enumerate() {
        let mut row = vec![zero.clone(); total + 1];
        let mut shift = zero.clone();
        for j in 0..n {
            let aj = q(a[j]);
            shift += &aj * &lower[j];
            row[j] = aj;
        }
        row[rhs] = q(*b) - shift;
        match rel {
            Relation::Le => {
                row[slack] = BigRational::one();
                slack += 1;
            }
            Relation::Ge => {
                row[slack] = -BigRational::one();
                slack += 1;
            }
            Relation::Eq => {}
        }
        if row[rhs].is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
        }
        let art = 2 * n + n_slack + i;
        row[art] = BigRational::one();
        t.push(row);
        basis.push(art);
    }
    let first_art = 2 * n + n_slack;

    let mut phase1 = vec![zero.clone(); total];
    for c in phase1.iter_mut().skip(first_art) {
        *c = BigRational::one();
    }
    run(&mut t, &mut basis, &phase1, total);
    let infeas: BigRational = basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= first_art)
        .map(|(i, _)| t[i][rhs].clone())
        .sum();
    if infeas.is_positive() {
        return Exact::Infeasible;
    }
    // Drive zero-level artificials out of the basis or drop redundant rows.
    let mut i = 0;
    while i < t.len() {
        if basis[i] >= first_art {
            if let Some(j) = (0..first_art).find(|&j| !t[i][j].is_zero()) {
                pivot(&mut t, &mut basis, i, j);
            } else {
                t.remove(i);
                basis.remove(i);
                continue;
            }
        }
        i += 1;
    }

    let mut phase2 = vec![zero.clone(); total];
    for j in 0..n {
        phase2[j] = q(d.cost[j]);
    }
    run(&mut t, &mut basis, &phase2, first_art);
    let mut obj: BigRational = (0..n).map(|j| q(d.cost[j]) * &lower[j]).sum();
    for (i, &b) in basis.iter().enumerate() {
        obj += &phase2[b] * &t[i][rhs];
    }
    Exact::Optimal(obj.to_f64().unwrap())
}

fn pivot(t: &mut [Vec<BigRational>], basis: &mut [usize], r: usize, c: usize) {
    let p = t[r][c].clone();
    for v in t[r].iter_mut() {
        *v /= &p;
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r || row[c].is_zero() {
            continue;
        }
        let f = row[c].clone();
        for (v, pv) in row.iter_mut().zip(&prow) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
    }
    basis[r] = c;
}

/// Minimizes `cost` with Bland's rule, entering only columns below `allowed`.
fn run(t: &mut [Vec<BigRational>], basis: &mut [usize], cost: &[BigRational], allowed: usize) {
    let rhs = cost.len();
    loop {
        let entering = (0..allowed).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let mut d = cost[j].clone();
            for (i, &b) in basis.iter().enumerate() {
                if !t[i][j].is_zero() {
                    d -= &cost[b] * &t[i][j];
                }
            }
            d.is_negative()
        });
        let Some(c) = entering else { return };
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..t.len() {
            if !t[i][c].is_positive() {
                continue;
            }
            let ratio = &t[i][rhs] / &t[i][c];
            let better = match &leave {
                None => true,
                Some((k, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*k]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let (r, _) = leave.expect("all columns are bounded");
        pivot(t, basis, r, c);
    }
}

/// Exact 0/1 knapsack value by dynamic programming over capacity.
pub fn knapsack_dp(weights: &[usize], values: &[u64], capacity: usize) -> u64 {
    let mut best = vec![0u64; capacity + 1];
    for (&w, &v) in weights.iter().zip(values) {
        for c in (w..=capacity).rev() {
            best[c] = best[c].max(best[c - w] + v);
        }
    }
    best[capacity]
}
