//! Rule-based charger designs and the comparison against co-design.

use std::fmt;
use std::str::FromStr;

use chargeplan_milp::Status;
use serde::Serialize;

use crate::domain::{Design, FixedCounts, ValidatedScenario, ValidationError};
use crate::error::Result;
use crate::plan::{CostBreakdown, PlanReport};
use crate::scenario::FixedCountsSpec;
use crate::solve::{solve_scenario, SolveOptions, SolveOutcome};

/// How a fixed design is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    /// `count` chargers of type `charger` at the location with the most
    /// departures, none elsewhere.
    MainDepotOnly { count: u32, charger: u32 },
    /// Per location, as many chargers of type `charger` as the naive
    /// schedule ever uses at once. The naive schedule charges from the
    /// start of each window until the battery is full or the scheduled
    /// departure arrives.
    PeakDemandCover { charger: u32 },
    /// Counts given by the user.
    Explicit(FixedCountsSpec),
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::MainDepotOnly { count, charger } => write!(f, "main-depot-only:{count}:{charger}"),
            Policy::PeakDemandCover { charger } => write!(f, "peak-demand-cover:{charger}"),
            Policy::Explicit(_) => write!(f, "explicit"),
        }
    }
}

impl FromStr for Policy {
    type Err = String;

    /// Parses `main-depot-only:N:TYPE` or `peak-demand-cover:TYPE`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| p.parse::<u32>().map_err(|_| format!("{p:?} is not a nonnegative integer"));
        match parts.as_slice() {
            ["main-depot-only", n, r] => Ok(Policy::MainDepotOnly {
                count: num(n)?,
                charger: num(r)?,
            }),
            ["peak-demand-cover", r] => Ok(Policy::PeakDemandCover { charger: num(r)? }),
            _ => Err(format!(
                "unknown policy {s:?}, expected main-depot-only:N:TYPE or peak-demand-cover:TYPE"
            )),
        }
    }
}

/// Location with the most departures; ties go to the first listed.
pub fn main_depot(vs: &ValidatedScenario) -> Option<usize> {
    let n = vs.departures_per_location();
    let best = n.iter().copied().max()?;
    n.iter().position(|&c| c == best)
}

/// Charging intervals `(location, start..end)` of the naive schedule using
/// chargers of `power_kw`.
pub fn naive_schedule(vs: &ValidatedScenario, power_kw: f64) -> Vec<(usize, std::ops::Range<u32>)> {
    let per_block = vs.grid.block_hours() * power_kw;
    let mut out = Vec::new();
    let mut soe = 0.0;
    for (g, l) in vs.legs.iter().enumerate() {
        let truck = &vs.trucks[l.truck];
        let start = match vs.previous_leg(g) {
            None => {
                soe = truck.initial_soe_kwh;
                vs.grid.day_blocks(l.day).start
            }
            Some(p) => vs.legs[p].arrival_block,
        };
        let missing = truck.battery_capacity_kwh - soe;
        let wanted = if missing > 1e-9 { (missing / per_block).ceil() as u32 } else { 0 };
        let blocks = wanted.min(l.departure_block.saturating_sub(start));
        if blocks > 0 {
            out.push((l.origin, start..start + blocks));
        }
        soe = (soe + blocks as f64 * per_block).min(truck.battery_capacity_kwh);
        soe -= vs.leg_consumption(g);
    }
    out
}

fn charger(vs: &ValidatedScenario, id: u32) -> std::result::Result<usize, Vec<ValidationError>> {
    vs.charger_index(id).ok_or_else(|| {
        vec![ValidationError::UnknownReference {
            what: "policy charger type".into(),
            id: id.to_string(),
        }]
    })
}

/// Charger counts chosen by `policy`.
pub fn rule_based_design(
    vs: &ValidatedScenario,
    policy: &Policy,
) -> std::result::Result<FixedCounts, Vec<ValidationError>> {
    let mut counts = FixedCounts::zeros(vs.locations.len(), vs.chargers.len());
    match policy {
        Policy::MainDepotOnly { count, charger: id } => {
            let r = charger(vs, *id)?;
            if let Some(i) = main_depot(vs) {
                counts.set(i, r, *count);
            }
        }
        Policy::PeakDemandCover { charger: id } => {
            let r = charger(vs, *id)?;
            let mut in_use = vec![vec![0u32; vs.grid.num_blocks() as usize]; vs.locations.len()];
            for (i, span) in naive_schedule(vs, vs.chargers[r].rated_power_kw) {
                for t in span {
                    in_use[i][t as usize] += 1;
                }
            }
            for (i, row) in in_use.iter().enumerate() {
                counts.set(i, r, row.iter().copied().max().unwrap_or(0));
            }
        }
        Policy::Explicit(spec) => counts = vs.counts_from_spec(spec)?,
    }
    Ok(counts)
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignOutcome {
    pub status: Status,
    pub feasible: bool,
    pub gap: Option<f64>,
    pub report: Option<PlanReport>,
    /// Validator-recomputed costs.
    pub costs: Option<CostBreakdown>,
}

impl From<SolveOutcome> for DesignOutcome {
    fn from(o: SolveOutcome) -> Self {
        DesignOutcome {
            status: o.status,
            feasible: o.report.is_some(),
            gap: o.report.as_ref().map(|r| r.gap),
            report: o.report,
            costs: o.costs,
        }
    }
}

/// Relative savings of co-design, in percent of the fixed design's cost.
/// A component is absent when the fixed design spends nothing on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deltas {
    pub total_pct: Option<f64>,
    pub energy_pct: Option<f64>,
    pub infrastructure_pct: Option<f64>,
    pub peak_pct: Option<f64>,
}

fn pct(fixed: f64, codesign: f64) -> Option<f64> {
    (fixed.abs() > 1e-12).then(|| 100.0 * (fixed - codesign) / fixed)
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignComparison {
    pub codesign: DesignOutcome,
    pub fixed: DesignOutcome,
    pub fixed_counts: FixedCountsSpec,
    /// Only when both designs have a plan.
    pub deltas: Option<Deltas>,
    pub finding: Option<String>,
}

/// Solves the scenario once with free charger counts and once with
/// `fixed`, both with the scenario's α, slack and the same solver settings.
pub fn compare_designs(
    vs: &ValidatedScenario,
    fixed: &FixedCounts,
    options: &SolveOptions,
) -> Result<DesignComparison> {
    let co_vs = vs.with_design(Design::CoDesign);
    let fx_vs = vs.with_design(Design::Fixed(fixed.clone()));
    let (co, fx) = std::thread::scope(|s| {
        let co = s.spawn(|| solve_scenario(&co_vs, options));
        let fx = solve_scenario(&fx_vs, options);
        (co.join().expect("co-design solve panicked"), fx)
    });
    let (co, fx): (DesignOutcome, DesignOutcome) = (co?.into(), fx?.into());

    let deltas = match (&co.costs, &fx.costs) {
        (Some(c), Some(f)) => Some(Deltas {
            total_pct: pct(f.total, c.total),
            energy_pct: pct(f.energy, c.energy),
            infrastructure_pct: pct(f.infrastructure, c.infrastructure),
            peak_pct: pct(f.peak, c.peak),
        }),
        _ => None,
    };
    let limited = |o: &DesignOutcome| matches!(o.status, Status::Feasible { .. } | Status::LimitReached);
    let finding = match (co.feasible, fx.feasible) {
        (true, false) if fx.status == Status::Infeasible => Some(
            "the fixed design cannot serve the itineraries at this slack; co-design can".to_string(),
        ),
        (false, false) if co.status == Status::Infeasible && fx.status == Status::Infeasible => {
            Some("neither design can serve the itineraries at this slack".to_string())
        }
        _ if limited(&co) || limited(&fx) => {
            Some("a solver limit was hit; results are partial".to_string())
        }
        _ => None,
    };
    Ok(DesignComparison {
        codesign: co,
        fixed: fx,
        fixed_counts: vs.counts_to_spec(fixed),
        deltas,
        finding,
    })
}
