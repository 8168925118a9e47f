//! Decoded solutions.

use chargeplan_milp::{Solution, Status};
use serde::{Deserialize, Serialize};

use crate::domain::{Design, ValidatedScenario};
use crate::model::{BuiltModel, VarKey};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargerCount {
    pub location: String,
    pub charger: u32,
    pub count: u32,
}

/// One block of charging.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeEvent {
    pub truck: String,
    pub day: u32,
    pub leg: u32,
    /// Absolute block from the start of the period.
    pub block: u32,
    pub location: String,
    pub charger: u32,
    pub power_kw: f64,
    pub energy_kwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Departure {
    pub truck: String,
    pub day: u32,
    pub leg: u32,
    pub scheduled_block: u32,
    pub actual_block: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub energy: f64,
    pub infrastructure: f64,
    /// Weighted demand charges, α · Σ peak cost.
    pub peak: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationPeak {
    pub location: String,
    /// Unweighted demand charge at the location.
    pub peak_cost: f64,
    /// Maximum draw over the period.
    pub peak_kw: f64,
}

/// Draw at one location in one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub location: String,
    pub day: u32,
    /// Block within the day.
    pub block: u32,
    /// Indexed like the scenario's charger catalog.
    pub kw_by_type: Vec<f64>,
    pub kw_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub status: Status,
    pub objective: f64,
    pub best_bound: f64,
    pub gap: f64,
    pub nodes: u64,
    pub design: String,
    pub alpha: f64,
    pub slack_blocks: u32,
    pub block_minutes: u32,
    /// Nonzero counts, by location then charger type.
    pub charger_counts: Vec<ChargerCount>,
    /// By truck, day, leg and block.
    pub events: Vec<ChargeEvent>,
    pub departures: Vec<Departure>,
    /// Cost terms as seen by the solver.
    pub costs: CostBreakdown,
    pub peaks: Vec<LocationPeak>,
    /// Every block of every day at each location that has chargers or
    /// charging.
    pub power: Vec<PowerRow>,
}

impl PlanReport {
    pub fn count(&self, location: &str, charger: u32) -> u32 {
        self.charger_counts
            .iter()
            .find(|c| c.location == location && c.charger == charger)
            .map_or(0, |c| c.count)
    }

    /// Installed power per location, in kW.
    pub fn installed_kw(&self, vs: &ValidatedScenario, location: &str) -> f64 {
        self.charger_counts
            .iter()
            .filter(|c| c.location == location)
            .map(|c| {
                let r = vs.charger_index(c.charger).expect("counts use catalog ids");
                c.count as f64 * vs.chargers[r].rated_power_kw
            })
            .sum()
    }

    pub fn total_installed_kw(&self, vs: &ValidatedScenario) -> f64 {
        self.charger_counts
            .iter()
            .map(|c| {
                let r = vs.charger_index(c.charger).expect("counts use catalog ids");
                c.count as f64 * vs.chargers[r].rated_power_kw
            })
            .sum()
    }
}

/// Reads a plan out of a solution of `built`. The solution must carry a
/// point.
pub fn decode(vs: &ValidatedScenario, built: &BuiltModel, solution: &Solution) -> PlanReport {
    assert!(solution.status.has_solution(), "decode needs a solution point");
    let x = &solution.values;
    let tau = vs.grid.block_hours();
    let n_loc = vs.locations.len();
    let n_r = vs.chargers.len();

    let mut counts = match &vs.design {
        Design::CoDesign => vec![vec![0u32; n_r]; n_loc],
        Design::Fixed(c) => c.0.clone(),
    };
    let mut events = Vec::new();
    let mut departures = Vec::new();
    let mut peak_cost = vec![0.0; n_loc];
    let mut costs = CostBreakdown::default();
    for (c, key) in built.catalog.iter() {
        let v = x[c];
        let obj = built.model.column(c).objective;
        match key {
            VarKey::Count { location, charger } => {
                counts[location][charger] = v.round() as u32;
                costs.infrastructure += obj * v.round();
            }
            VarKey::Peak { location } => {
                peak_cost[location] = v;
                costs.peak += obj * v;
            }
            VarKey::Departure { leg } => {
                let l = &vs.legs[leg];
                departures.push(Departure {
                    truck: vs.trucks[l.truck].id.clone(),
                    day: l.day,
                    leg: l.leg,
                    scheduled_block: l.departure_block,
                    actual_block: v,
                });
            }
            VarKey::Charge { leg, block, charger } if v > 0.5 => {
                let l = &vs.legs[leg];
                let kw = vs.chargers[charger].rated_power_kw;
                costs.energy += obj;
                events.push(ChargeEvent {
                    truck: vs.trucks[l.truck].id.clone(),
                    day: l.day,
                    leg: l.leg,
                    block,
                    location: vs.locations[l.origin].id.clone(),
                    charger: vs.chargers[charger].id,
                    power_kw: kw,
                    energy_kwh: tau * kw,
                });
            }
            _ => {}
        }
    }
    costs.infrastructure += built.model.objective_offset();
    costs.total = costs.energy + costs.infrastructure + costs.peak;

    // Power curves.
    let bpd = vs.grid.blocks_per_day as usize;
    let mut kw = vec![vec![vec![0.0; n_r]; vs.grid.num_blocks() as usize]; n_loc];
    for e in &events {
        let i = vs.location_index(&e.location).expect("decoded from catalog");
        let r = vs.charger_index(e.charger).expect("decoded from catalog");
        kw[i][e.block as usize][r] += e.power_kw;
    }
    let mut power = Vec::new();
    let mut peaks = Vec::new();
    for i in 0..n_loc {
        let has_chargers = counts[i].iter().any(|&n| n > 0);
        let has_draw = kw[i].iter().flatten().any(|&p| p > 0.0);
        let max_kw = kw[i].iter().map(|b| b.iter().sum::<f64>()).fold(0.0, f64::max);
        peaks.push(LocationPeak {
            location: vs.locations[i].id.clone(),
            peak_cost: peak_cost[i],
            peak_kw: max_kw,
        });
        if !(has_chargers || has_draw) {
            continue;
        }
        for (t, by_type) in kw[i].iter().enumerate() {
            power.push(PowerRow {
                location: vs.locations[i].id.clone(),
                day: (t / bpd) as u32,
                block: (t % bpd) as u32,
                kw_by_type: by_type.clone(),
                kw_total: by_type.iter().sum(),
            });
        }
    }

    let mut charger_counts = Vec::new();
    for (i, row) in counts.iter().enumerate() {
        for (r, &n) in row.iter().enumerate() {
            if n > 0 {
                charger_counts.push(ChargerCount {
                    location: vs.locations[i].id.clone(),
                    charger: vs.chargers[r].id,
                    count: n,
                });
            }
        }
    }

    PlanReport {
        status: solution.status,
        objective: solution.objective,
        best_bound: solution.best_bound,
        gap: solution.gap,
        nodes: solution.nodes,
        design: vs.design.label().to_string(),
        alpha: vs.alpha,
        slack_blocks: vs.slack_blocks,
        block_minutes: vs.grid.block_minutes,
        charger_counts,
        events,
        departures,
        costs,
        peaks,
        power,
    }
}
