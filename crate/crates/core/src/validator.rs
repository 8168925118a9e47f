//! Replay of a plan against its scenario.
//!
//! Nothing here reuses the model builder. Windows, energy balances,
//! occupancy and costs are recomputed directly from the scenario so that a
//! plan which passes is checked by a second, independent path.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::domain::{Design, ValidatedScenario};
use crate::plan::{CostBreakdown, PlanReport};
use crate::scenario::{PeakConvention, WindowConvention};

const TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum Violation {
    #[error("event for unknown leg {truck} day {day} leg {leg}")]
    UnknownLeg { truck: String, day: u32, leg: u32 },
    #[error("unknown charger type {charger}")]
    UnknownCharger { charger: u32 },
    #[error("{truck} day {day} leg {leg}: charging at {found} in block {block}, but the leg starts at {expected}")]
    WrongLocation {
        truck: String,
        day: u32,
        leg: u32,
        block: u32,
        expected: String,
        found: String,
    },
    #[error("{truck} day {day} leg {leg}: block {block} is outside the window {window_start}..{window_end}")]
    WindowViolation {
        truck: String,
        day: u32,
        leg: u32,
        block: u32,
        window_start: u32,
        window_end: u32,
    },
    #[error("{truck} day {day} leg {leg} block {block}: event energy {found_kwh} kWh, expected {expected_kwh} kWh")]
    EnergyMismatch {
        truck: String,
        day: u32,
        leg: u32,
        block: u32,
        expected_kwh: f64,
        found_kwh: f64,
    },
    #[error("{truck} day {day} leg {leg}: more than one charger in block {block}")]
    DoubleCharge {
        truck: String,
        day: u32,
        leg: u32,
        block: u32,
    },
    #[error("{location} charger {charger} block {block}: {in_use} in use, {installed} installed")]
    CapacityViolation {
        location: String,
        charger: u32,
        block: u32,
        in_use: u32,
        installed: u32,
    },
    #[error("{truck} day {day} leg {leg}: charged to {soe_kwh} kWh, battery holds {capacity_kwh} kWh")]
    BatteryOverflow {
        truck: String,
        day: u32,
        leg: u32,
        soe_kwh: f64,
        capacity_kwh: f64,
    },
    #[error("{truck} day {day} leg {leg}: arrives with {arrival_soe_kwh} kWh")]
    EnergyViolation {
        truck: String,
        day: u32,
        leg: u32,
        arrival_soe_kwh: f64,
    },
    #[error("{truck} day {day} leg {leg}: no departure time")]
    MissingDeparture { truck: String, day: u32, leg: u32 },
    #[error("{truck} day {day} leg {leg}: departs at block {actual} before charging ends at {earliest}")]
    DepartureBeforeCharge {
        truck: String,
        day: u32,
        leg: u32,
        actual: f64,
        earliest: f64,
    },
    #[error("{truck} day {day} leg {leg}: departs at block {actual}, latest allowed is {latest}")]
    LateDeparture {
        truck: String,
        day: u32,
        leg: u32,
        actual: f64,
        latest: f64,
    },
    #[error("{truck} day {day} leg {leg}: departs at block {actual} before the previous leg can arrive at {earliest}")]
    DepartureOrder {
        truck: String,
        day: u32,
        leg: u32,
        actual: f64,
        earliest: f64,
    },
    #[error("{location} charger {charger}: plan has {found}, fixed design has {expected}")]
    FixedCountMismatch {
        location: String,
        charger: u32,
        expected: u32,
        found: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Clean,
    Violations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replay {
    pub verdict: Verdict,
    pub violations: Vec<Violation>,
}

impl Replay {
    pub fn is_clean(&self) -> bool {
        self.verdict == Verdict::Clean
    }
}

/// Replays `plan` leg by leg and lists every violated rule.
pub fn replay(vs: &ValidatedScenario, plan: &PlanReport) -> Replay {
    let mut out = Vec::new();
    let tau = vs.grid.block_minutes as f64 / 60.0;
    let bpd = vs.grid.blocks_per_day;

    let leg_of: HashMap<(&str, u32, u32), usize> = vs
        .legs
        .iter()
        .enumerate()
        .map(|(g, l)| ((vs.trucks[l.truck].id.as_str(), l.day, l.leg), g))
        .collect();
    let charger_of: HashMap<u32, usize> = vs.chargers.iter().enumerate().map(|(r, c)| (c.id, r)).collect();

    // Charged energy and last charging block per leg.
    let mut charged = vec![0.0; vs.legs.len()];
    let mut last_block: Vec<Option<u32>> = vec![None; vs.legs.len()];
    let mut per_leg_block: HashMap<(usize, u32), u32> = HashMap::new();
    let mut occupancy: BTreeMap<(String, u32, u32), u32> = BTreeMap::new();
    for e in &plan.events {
        let Some(&g) = leg_of.get(&(e.truck.as_str(), e.day, e.leg)) else {
            out.push(Violation::UnknownLeg {
                truck: e.truck.clone(),
                day: e.day,
                leg: e.leg,
            });
            continue;
        };
        let Some(&r) = charger_of.get(&e.charger) else {
            out.push(Violation::UnknownCharger { charger: e.charger });
            continue;
        };
        let l = &vs.legs[g];
        let origin = &vs.locations[l.origin].id;
        if &e.location != origin {
            out.push(Violation::WrongLocation {
                truck: e.truck.clone(),
                day: e.day,
                leg: e.leg,
                block: e.block,
                expected: origin.clone(),
                found: e.location.clone(),
            });
        }
        let day_start = l.day * bpd;
        let day_end = day_start + bpd;
        let open = match vs.window_convention {
            WindowConvention::PreviousArrival if l.leg > 1 => vs.legs[g - 1].arrival_block,
            WindowConvention::PreviousArrival => day_start,
            WindowConvention::SameLegArrival => l.arrival_block,
        };
        let close = (l.departure_block + vs.slack_blocks).min(day_end);
        if e.block < open || e.block >= close {
            out.push(Violation::WindowViolation {
                truck: e.truck.clone(),
                day: e.day,
                leg: e.leg,
                block: e.block,
                window_start: open,
                window_end: close,
            });
        }
        let energy = tau * vs.chargers[r].rated_power_kw;
        if (e.energy_kwh - energy).abs() > TOL {
            out.push(Violation::EnergyMismatch {
                truck: e.truck.clone(),
                day: e.day,
                leg: e.leg,
                block: e.block,
                expected_kwh: energy,
                found_kwh: e.energy_kwh,
            });
        }
        let n = per_leg_block.entry((g, e.block)).or_insert(0);
        *n += 1;
        if *n == 2 {
            out.push(Violation::DoubleCharge {
                truck: e.truck.clone(),
                day: e.day,
                leg: e.leg,
                block: e.block,
            });
        }
        *occupancy.entry((e.location.clone(), e.charger, e.block)).or_insert(0) += 1;
        charged[g] += energy;
        last_block[g] = Some(last_block[g].map_or(e.block, |b| b.max(e.block)));
    }

    let installed: HashMap<(&str, u32), u32> = plan
        .charger_counts
        .iter()
        .map(|c| ((c.location.as_str(), c.charger), c.count))
        .collect();
    for ((loc, charger, block), in_use) in &occupancy {
        let have = installed.get(&(loc.as_str(), *charger)).copied().unwrap_or(0);
        if *in_use > have {
            out.push(Violation::CapacityViolation {
                location: loc.clone(),
                charger: *charger,
                block: *block,
                in_use: *in_use,
                installed: have,
            });
        }
    }
    if let Design::Fixed(fixed) = &vs.design {
        for (i, loc) in vs.locations.iter().enumerate() {
            for (r, ch) in vs.chargers.iter().enumerate() {
                let found = installed.get(&(loc.id.as_str(), ch.id)).copied().unwrap_or(0);
                if found != fixed.get(i, r) {
                    out.push(Violation::FixedCountMismatch {
                        location: loc.id.clone(),
                        charger: ch.id,
                        expected: fixed.get(i, r),
                        found,
                    });
                }
            }
        }
    }

    let departure_of: HashMap<(&str, u32, u32), f64> = plan
        .departures
        .iter()
        .map(|d| ((d.truck.as_str(), d.day, d.leg), d.actual_block))
        .collect();

    let mut soe = 0.0;
    let mut prev_departure: Option<f64> = None;
    for (g, l) in vs.legs.iter().enumerate() {
        let truck = &vs.trucks[l.truck];
        let name = || (truck.id.clone(), l.day, l.leg);
        if l.leg == 1 {
            soe = truck.initial_soe_kwh;
            prev_departure = None;
        }
        soe += charged[g];
        if soe > truck.battery_capacity_kwh + TOL {
            let (truck_id, day, leg) = name();
            out.push(Violation::BatteryOverflow {
                truck: truck_id,
                day,
                leg,
                soe_kwh: soe,
                capacity_kwh: truck.battery_capacity_kwh,
            });
        }
        let weight = if l.payload_tons > truck.tare_tons { l.payload_tons } else { truck.tare_tons };
        soe -= l.distance_km * weight * truck.consumption_kwh_per_km_ton;
        if soe < -TOL {
            let (truck_id, day, leg) = name();
            out.push(Violation::EnergyViolation {
                truck: truck_id,
                day,
                leg,
                arrival_soe_kwh: soe,
            });
        }

        let Some(&actual) = departure_of.get(&(truck.id.as_str(), l.day, l.leg)) else {
            let (truck_id, day, leg) = name();
            out.push(Violation::MissingDeparture {
                truck: truck_id,
                day,
                leg,
            });
            prev_departure = None;
            continue;
        };
        if let Some(b) = last_block[g] {
            if actual < (b + 1) as f64 - TOL {
                let (truck_id, day, leg) = name();
                out.push(Violation::DepartureBeforeCharge {
                    truck: truck_id,
                    day,
                    leg,
                    actual,
                    earliest: (b + 1) as f64,
                });
            }
        }
        let latest = (l.departure_block + vs.slack_blocks) as f64;
        if actual > latest + TOL {
            let (truck_id, day, leg) = name();
            out.push(Violation::LateDeparture {
                truck: truck_id,
                day,
                leg,
                actual,
                latest,
            });
        }
        let earliest = match prev_departure {
            Some(p) => p + vs.legs[g - 1].travel_blocks as f64,
            None => (l.day * bpd) as f64,
        };
        if actual < earliest - TOL {
            let (truck_id, day, leg) = name();
            out.push(Violation::DepartureOrder {
                truck: truck_id,
                day,
                leg,
                actual,
                earliest,
            });
        }
        prev_departure = Some(actual);
    }

    Replay {
        verdict: if out.is_empty() { Verdict::Clean } else { Verdict::Violations },
        violations: out,
    }
}

/// Cost terms recomputed from the plan's events and counts. The demand
/// charge uses the literal maximum of each location's draw over all blocks.
pub fn recompute_costs(vs: &ValidatedScenario, plan: &PlanReport) -> CostBreakdown {
    let tau = vs.grid.block_minutes as f64 / 60.0;
    let charger_of: HashMap<u32, usize> = vs.chargers.iter().enumerate().map(|(r, c)| (c.id, r)).collect();

    let mut energy = 0.0;
    let mut draw: BTreeMap<(&str, u32), f64> = BTreeMap::new();
    for e in &plan.events {
        let Some(&r) = charger_of.get(&e.charger) else { continue };
        let c = &vs.chargers[r];
        energy += tau * c.rated_power_kw / c.efficiency * vs.prices.energy[r][e.block as usize];
        *draw.entry((e.location.as_str(), e.block)).or_insert(0.0) += c.rated_power_kw;
    }
    let mut infrastructure = 0.0;
    for c in &plan.charger_counts {
        if let Some(&r) = charger_of.get(&c.charger) {
            infrastructure += vs.chargers[r].capital_cost * vs.infra_cost_ratio * c.count as f64;
        }
    }
    let mut max_at: BTreeMap<&str, f64> = BTreeMap::new();
    for ((loc, _), kw) in draw {
        let m = max_at.entry(loc).or_insert(0.0);
        if kw > *m {
            *m = kw;
        }
    }
    let unit = match vs.peak_convention {
        PeakConvention::Power => 1.0,
        PeakConvention::Energy => tau,
    };
    let peak = vs.alpha * max_at.values().map(|kw| vs.prices.peak_per_kw * unit * kw).sum::<f64>();
    CostBreakdown {
        energy,
        infrastructure,
        peak,
        total: energy + infrastructure + peak,
    }
}
