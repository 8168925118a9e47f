//! Validated problem instance.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::ops::Range;

use serde::Serialize;

use crate::scenario::{
    ChargerType, DesignMode, FixedCountsSpec, LocationKind, PeakConvention, Scenario,
    WindowConvention, MINUTES_PER_DAY,
};

/// Uniform discretization of the analysis period. Blocks are numbered from
/// the start of day 0, so day `d` covers `d * blocks_per_day ..`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TimeGrid {
    pub block_minutes: u32,
    pub blocks_per_day: u32,
    pub num_days: u32,
}

impl TimeGrid {
    pub fn new(block_minutes: u32, num_days: u32) -> Option<Self> {
        if block_minutes == 0 || MINUTES_PER_DAY % block_minutes != 0 || num_days == 0 {
            return None;
        }
        Some(TimeGrid {
            block_minutes,
            blocks_per_day: MINUTES_PER_DAY / block_minutes,
            num_days,
        })
    }

    /// Block length τ in hours.
    pub fn block_hours(&self) -> f64 {
        self.block_minutes as f64 / 60.0
    }

    pub fn num_blocks(&self) -> u32 {
        self.blocks_per_day * self.num_days
    }

    pub fn day_blocks(&self, day: u32) -> Range<u32> {
        day * self.blocks_per_day..(day + 1) * self.blocks_per_day
    }

    pub fn day_of(&self, block: u32) -> u32 {
        block / self.blocks_per_day
    }

    /// Absolute block of an on-grid time of day.
    pub fn block_at(&self, day: u32, minutes: u32) -> u32 {
        day * self.blocks_per_day + minutes / self.block_minutes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Truck {
    pub id: String,
    pub battery_capacity_kwh: f64,
    pub consumption_kwh_per_km_ton: f64,
    pub initial_soe_kwh: f64,
    pub tare_tons: f64,
}

/// One leg with indices resolved and times in absolute blocks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripLeg {
    pub truck: usize,
    pub day: u32,
    pub leg: u32,
    pub origin: usize,
    pub destination: usize,
    pub departure_block: u32,
    pub arrival_block: u32,
    pub travel_blocks: u32,
    pub distance_km: f64,
    pub payload_tons: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Location {
    pub id: String,
    pub kind: LocationKind,
}

/// Energy price per charger type and absolute block, plus the demand charge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceSchedule {
    pub energy: Vec<Vec<f64>>,
    pub peak_per_kw: f64,
}

impl PriceSchedule {
    pub fn energy(&self, charger: usize, block: u32) -> f64 {
        self.energy[charger][block as usize]
    }
}

/// Dense charger counts indexed by location then charger type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixedCounts(pub Vec<Vec<u32>>);

impl FixedCounts {
    pub fn zeros(locations: usize, chargers: usize) -> Self {
        FixedCounts(vec![vec![0; chargers]; locations])
    }

    pub fn get(&self, location: usize, charger: usize) -> u32 {
        self.0[location][charger]
    }

    pub fn set(&mut self, location: usize, charger: usize, count: u32) {
        self.0[location][charger] = count;
    }

    pub fn total(&self) -> u32 {
        self.0.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Design {
    CoDesign,
    Fixed(FixedCounts),
}

impl Design {
    pub fn label(&self) -> &'static str {
        match self {
            Design::CoDesign => "codesign",
            Design::Fixed(_) => "fixed",
        }
    }
}

/// Every way a scenario can be rejected. Validation reports all of them.
#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum ValidationError {
    #[error("truck {truck} day {day}: leg {leg} starts at {found} but the previous leg ends at {expected}")]
    ChainBroken {
        truck: String,
        day: u32,
        leg: u32,
        expected: String,
        found: String,
    },
    #[error("{what} = {minutes} min is not a multiple of the {block_minutes}-minute block")]
    TimeOffGrid {
        what: String,
        minutes: i64,
        block_minutes: u32,
    },
    #[error("{what} refers to unknown id {id:?}")]
    UnknownReference { what: String, id: String },
    #[error("{what} is negative ({value})")]
    NegativeQuantity { what: String, value: f64 },
    #[error("duplicate {what} id {id:?}")]
    DuplicateId { what: String, id: String },
    #[error("truck {truck} day {day}: legs are numbered {found:?}, expected 1..={count}")]
    LegNumbering {
        truck: String,
        day: u32,
        found: Vec<u32>,
        count: usize,
    },
    #[error("{what}: {reason}")]
    InvalidValue { what: String, reason: String },
}

fn invalid(what: impl Into<String>, reason: impl Into<String>) -> ValidationError {
    ValidationError::InvalidValue {
        what: what.into(),
        reason: reason.into(),
    }
}

fn negative(what: impl Into<String>, value: f64) -> ValidationError {
    ValidationError::NegativeQuantity {
        what: what.into(),
        value,
    }
}

fn unknown(what: impl Into<String>, id: &str) -> ValidationError {
    ValidationError::UnknownReference {
        what: what.into(),
        id: id.to_string(),
    }
}

/// A scenario whose invariants have been checked, with ids resolved to
/// indices. Legs are sorted by truck, day and leg number, so each tour is a
/// contiguous run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatedScenario {
    #[serde(skip)]
    source: Scenario,
    pub grid: TimeGrid,
    pub trucks: Vec<Truck>,
    pub legs: Vec<TripLeg>,
    pub chargers: Vec<ChargerType>,
    pub locations: Vec<Location>,
    pub prices: PriceSchedule,
    pub alpha: f64,
    pub slack_blocks: u32,
    pub design: Design,
    pub window_convention: WindowConvention,
    pub peak_convention: PeakConvention,
    pub infra_cost_ratio: f64,
}

impl ValidatedScenario {
    /// The scenario document this was validated from.
    pub fn scenario(&self) -> &Scenario {
        &self.source
    }

    pub fn location_index(&self, id: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.id == id)
    }

    pub fn charger_index(&self, id: u32) -> Option<usize> {
        self.chargers.iter().position(|c| c.id == id)
    }

    pub fn truck_index(&self, id: &str) -> Option<usize> {
        self.trucks.iter().position(|t| t.id == id)
    }

    /// Index of the leg driven just before `leg` in the same tour.
    pub fn previous_leg(&self, leg: usize) -> Option<usize> {
        (self.legs[leg].leg > 1).then(|| leg - 1)
    }

    /// Energy a leg uses: distance × max(payload, tare) × consumption rate.
    ///
    /// ```
    /// # use chargeplan::{TripLeg, Truck, ValidatedScenario};
    /// # let truck = Truck { id: "k".into(), battery_capacity_kwh: 500.0,
    /// #     consumption_kwh_per_km_ton: 0.13, initial_soe_kwh: 500.0, tare_tons: 1.0 };
    /// # let leg = TripLeg { truck: 0, day: 0, leg: 1, origin: 0, destination: 1,
    /// #     departure_block: 0, arrival_block: 8, travel_blocks: 8,
    /// #     distance_km: 100.0, payload_tons: 10.0 };
    /// let kwh = ValidatedScenario::consumption(&leg, &truck);
    /// assert!((kwh - 130.0).abs() < 1e-9);
    /// ```
    pub fn consumption(leg: &TripLeg, truck: &Truck) -> f64 {
        leg.distance_km * leg.payload_tons.max(truck.tare_tons) * truck.consumption_kwh_per_km_ton
    }

    pub fn leg_consumption(&self, leg: usize) -> f64 {
        let l = &self.legs[leg];
        Self::consumption(l, &self.trucks[l.truck])
    }

    /// Blocks in which the truck may charge before driving `leg`, at the
    /// leg's origin. Closes at the scheduled departure plus slack and never
    /// leaves the leg's day.
    pub fn charging_window(&self, leg: usize) -> Range<u32> {
        let l = &self.legs[leg];
        let day = self.grid.day_blocks(l.day);
        let open = match self.window_convention {
            WindowConvention::PreviousArrival => match self.previous_leg(leg) {
                Some(p) => self.legs[p].arrival_block,
                None => day.start,
            },
            WindowConvention::SameLegArrival => l.arrival_block,
        };
        let close = (l.departure_block + self.slack_blocks).min(day.end);
        open.max(day.start)..close.max(open)
    }

    /// Number of legs departing from each location.
    pub fn departures_per_location(&self) -> Vec<usize> {
        let mut n = vec![0; self.locations.len()];
        for l in &self.legs {
            n[l.origin] += 1;
        }
        n
    }

    /// Copy with a different design, keeping everything else.
    pub fn with_design(&self, design: Design) -> Self {
        let mut out = self.clone();
        out.source.params.design_mode = match design {
            Design::CoDesign => DesignMode::Codesign,
            Design::Fixed(_) => DesignMode::Fixed,
        };
        out.source.params.fixed_counts = match &design {
            Design::CoDesign => self.source.params.fixed_counts.clone(),
            Design::Fixed(c) => Some(self.counts_to_spec(c)),
        };
        out.design = design;
        out
    }

    /// Copy with different peak weight and slack.
    pub fn with_alpha_slack(&self, alpha: f64, slack_blocks: u32) -> Self {
        let mut out = self.clone();
        out.alpha = alpha;
        out.slack_blocks = slack_blocks;
        out.source.params.alpha = alpha;
        out.source.params.slack_minutes = (slack_blocks * self.grid.block_minutes) as i64;
        out
    }

    /// Sparse map form of dense counts, dropping zeros.
    pub fn counts_to_spec(&self, counts: &FixedCounts) -> FixedCountsSpec {
        let mut out = BTreeMap::new();
        for (i, row) in counts.0.iter().enumerate() {
            let m: BTreeMap<String, i64> = row
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(r, &c)| (self.chargers[r].id.to_string(), c as i64))
                .collect();
            if !m.is_empty() {
                out.insert(self.locations[i].id.clone(), m);
            }
        }
        out
    }

    /// Resolves a sparse count map against this scenario's ids.
    pub fn counts_from_spec(&self, spec: &FixedCountsSpec) -> Result<FixedCounts, Vec<ValidationError>> {
        resolve_counts(spec, &self.locations, &self.chargers, "fixed_counts")
    }
}

fn resolve_counts(
    spec: &FixedCountsSpec,
    locations: &[Location],
    chargers: &[ChargerType],
    what: &str,
) -> Result<FixedCounts, Vec<ValidationError>> {
    let mut errors = Vec::new();
    let mut counts = FixedCounts::zeros(locations.len(), chargers.len());
    for (loc, per_type) in spec {
        let Some(i) = locations.iter().position(|l| &l.id == loc) else {
            errors.push(unknown(format!("{what} location"), loc));
            continue;
        };
        for (ty, &n) in per_type {
            let r = ty
                .parse::<u32>()
                .ok()
                .and_then(|id| chargers.iter().position(|c| c.id == id));
            let Some(r) = r else {
                errors.push(unknown(format!("{what}.{loc} charger type"), ty));
                continue;
            };
            if n < 0 {
                errors.push(negative(format!("{what}.{loc}.{ty}"), n as f64));
                continue;
            }
            counts.set(i, r, n as u32);
        }
    }
    if errors.is_empty() {
        Ok(counts)
    } else {
        Err(errors)
    }
}

fn check_ids<'a>(what: &str, ids: impl Iterator<Item = &'a str>, errors: &mut Vec<ValidationError>) {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            errors.push(ValidationError::DuplicateId {
                what: what.into(),
                id: id.into(),
            });
        }
    }
}

fn nonneg(what: impl Into<String>, v: f64, errors: &mut Vec<ValidationError>) -> bool {
    if v.is_nan() || v.is_infinite() {
        errors.push(invalid(what, "must be a finite number"));
        false
    } else if v < 0.0 {
        errors.push(negative(what, v));
        false
    } else {
        true
    }
}

/// Checks every invariant of `scenario` and resolves its references.
///
/// Leg times, travel times and slack must already lie on the block grid
/// (see [`crate::quantize_times`]); off-grid values are reported, not
/// rounded.
pub fn validate_scenario(scenario: &Scenario) -> Result<ValidatedScenario, Vec<ValidationError>> {
    let mut errors = Vec::new();
    let tg = &scenario.time_grid;
    let grid = TimeGrid::new(tg.block_minutes, tg.num_days);
    if tg.block_minutes == 0 || MINUTES_PER_DAY % tg.block_minutes.max(1) != 0 {
        errors.push(invalid(
            "time_grid.block_minutes",
            format!("{} does not divide a 24-hour day", tg.block_minutes),
        ));
    }
    if tg.num_days == 0 {
        errors.push(invalid("time_grid.num_days", "must be at least 1"));
    }
    let block = tg.block_minutes.max(1);

    check_ids("location", scenario.locations.iter().map(|l| l.id.as_str()), &mut errors);
    let locations: Vec<Location> = scenario
        .locations
        .iter()
        .map(|l| Location {
            id: l.id.clone(),
            kind: l.kind,
        })
        .collect();
    let loc_index: HashMap<&str, usize> = scenario
        .locations
        .iter()
        .enumerate()
        .map(|(i, l)| (l.id.as_str(), i))
        .collect();

    let mut seen = HashSet::new();
    for c in &scenario.chargers {
        if !seen.insert(c.id) {
            errors.push(ValidationError::DuplicateId {
                what: "charger".into(),
                id: c.id.to_string(),
            });
        }
        let what = |f: &str| format!("charger {} {f}", c.id);
        if nonneg(what("rated_power_kw"), c.rated_power_kw, &mut errors) && c.rated_power_kw == 0.0 {
            errors.push(invalid(what("rated_power_kw"), "must be positive"));
        }
        nonneg(what("capital_cost"), c.capital_cost, &mut errors);
        if !(c.efficiency > 0.0 && c.efficiency <= 1.0) {
            errors.push(invalid(what("efficiency"), format!("{} is outside (0, 1]", c.efficiency)));
        }
    }

    check_ids("truck", scenario.trucks.iter().map(|t| t.id.as_str()), &mut errors);
    let mut trucks = Vec::new();
    for t in &scenario.trucks {
        let what = |f: &str| format!("truck {} {f}", t.id);
        if nonneg(what("battery_capacity_kwh"), t.battery_capacity_kwh, &mut errors)
            && t.battery_capacity_kwh == 0.0
        {
            errors.push(invalid(what("battery_capacity_kwh"), "must be positive"));
        }
        if nonneg(what("consumption_kwh_per_km_ton"), t.consumption_kwh_per_km_ton, &mut errors)
            && t.consumption_kwh_per_km_ton == 0.0
        {
            errors.push(invalid(what("consumption_kwh_per_km_ton"), "must be positive"));
        }
        nonneg(what("tare_tons"), t.tare_tons, &mut errors);
        let soe = t.initial_soe_kwh.unwrap_or(t.battery_capacity_kwh);
        if nonneg(what("initial_soe_kwh"), soe, &mut errors) && soe > t.battery_capacity_kwh {
            errors.push(invalid(
                what("initial_soe_kwh"),
                format!("{soe} exceeds the battery capacity {}", t.battery_capacity_kwh),
            ));
        }
        trucks.push(Truck {
            id: t.id.clone(),
            battery_capacity_kwh: t.battery_capacity_kwh,
            consumption_kwh_per_km_ton: t.consumption_kwh_per_km_ton,
            initial_soe_kwh: soe,
            tare_tons: t.tare_tons,
        });
    }
    let truck_index: HashMap<&str, usize> = scenario
        .trucks
        .iter()
        .enumerate()
        .map(|(i, t)| (t.id.as_str(), i))
        .collect();

    let mut legs = Vec::new();
    for (n, l) in scenario.legs.iter().enumerate() {
        let what = |f: &str| format!("legs[{n}].{f}");
        let truck = truck_index.get(l.truck.as_str()).copied();
        if truck.is_none() {
            errors.push(unknown(what("truck"), &l.truck));
        }
        let origin = loc_index.get(l.origin.as_str()).copied();
        if origin.is_none() {
            errors.push(unknown(what("origin"), &l.origin));
        }
        let destination = loc_index.get(l.destination.as_str()).copied();
        if destination.is_none() {
            errors.push(unknown(what("destination"), &l.destination));
        }
        if l.day >= tg.num_days {
            errors.push(invalid(what("day"), format!("{} is outside 0..{}", l.day, tg.num_days)));
        }
        if l.leg == 0 {
            errors.push(invalid(what("leg"), "legs are numbered from 1"));
        }
        nonneg(what("distance_km"), l.distance_km, &mut errors);
        nonneg(what("payload_tons"), l.payload_tons, &mut errors);
        let travel = l.travel_minutes.unwrap_or(l.arrival.0.saturating_sub(l.departure.0));
        for (f, m) in [
            ("departure", l.departure.0),
            ("arrival", l.arrival.0),
            ("travel_minutes", travel),
        ] {
            if m % block != 0 {
                errors.push(ValidationError::TimeOffGrid {
                    what: what(f),
                    minutes: m as i64,
                    block_minutes: tg.block_minutes,
                });
            }
        }
        if l.arrival < l.departure {
            errors.push(invalid(
                what("arrival"),
                format!("{} is before the departure {}", l.arrival, l.departure),
            ));
        }
        if l.distance_km > 0.0 && travel == 0 {
            errors.push(invalid(what("travel_minutes"), "must be positive for a leg with distance"));
        }
        if let (Some(truck), Some(origin), Some(destination), Some(g)) = (truck, origin, destination, grid) {
            legs.push(TripLeg {
                truck,
                day: l.day,
                leg: l.leg,
                origin,
                destination,
                departure_block: g.block_at(l.day.min(g.num_days - 1), l.departure.0),
                arrival_block: g.block_at(l.day.min(g.num_days - 1), l.arrival.0),
                travel_blocks: travel.div_ceil(block),
                distance_km: l.distance_km,
                payload_tons: l.payload_tons,
            });
        }
    }
    legs.sort_by_key(|l| (l.truck, l.day, l.leg));

    // Tours: consecutive numbering and location chaining.
    let mut start = 0;
    while start < legs.len() {
        let (k, d) = (legs[start].truck, legs[start].day);
        let end = start + legs[start..].iter().take_while(|l| (l.truck, l.day) == (k, d)).count();
        let tour = &legs[start..end];
        let numbers: Vec<u32> = tour.iter().map(|l| l.leg).collect();
        if numbers.iter().enumerate().any(|(n, &l)| l as usize != n + 1) {
            errors.push(ValidationError::LegNumbering {
                truck: trucks[k].id.clone(),
                day: d,
                found: numbers,
                count: tour.len(),
            });
        }
        for w in tour.windows(2) {
            if w[0].destination != w[1].origin {
                errors.push(ValidationError::ChainBroken {
                    truck: trucks[k].id.clone(),
                    day: d,
                    leg: w[1].leg,
                    expected: locations[w[0].destination].id.clone(),
                    found: locations[w[1].origin].id.clone(),
                });
            }
        }
        start = end;
    }

    let prices = price_table(scenario, grid, &mut errors);

    let p = &scenario.params;
    nonneg("params.alpha", p.alpha, &mut errors);
    nonneg("params.infra_cost_ratio", p.infra_cost_ratio, &mut errors);
    if p.slack_minutes < 0 {
        errors.push(negative("params.slack_minutes", p.slack_minutes as f64));
    } else if p.slack_minutes % block as i64 != 0 {
        errors.push(ValidationError::TimeOffGrid {
            what: "params.slack_minutes".into(),
            minutes: p.slack_minutes,
            block_minutes: tg.block_minutes,
        });
    }
    let design = match (p.design_mode, &p.fixed_counts) {
        (DesignMode::Codesign, _) => Some(Design::CoDesign),
        (DesignMode::Fixed, None) => {
            errors.push(invalid("params.fixed_counts", "required when design_mode is fixed"));
            None
        }
        (DesignMode::Fixed, Some(spec)) => {
            match resolve_counts(spec, &locations, &scenario.chargers, "params.fixed_counts") {
                Ok(c) => Some(Design::Fixed(c)),
                Err(e) => {
                    errors.extend(e);
                    None
                }
            }
        }
    };
    // Counts given alongside co-design are still checked.
    if let (DesignMode::Codesign, Some(spec)) = (p.design_mode, &p.fixed_counts) {
        if let Err(e) = resolve_counts(spec, &locations, &scenario.chargers, "params.fixed_counts") {
            errors.extend(e);
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(ValidatedScenario {
        source: scenario.clone(),
        grid: grid.expect("grid errors were reported"),
        trucks,
        legs,
        chargers: scenario.chargers.clone(),
        locations,
        prices: prices.expect("price errors were reported"),
        alpha: p.alpha,
        slack_blocks: (p.slack_minutes / block as i64) as u32,
        design: design.expect("design errors were reported"),
        window_convention: p.window_convention,
        peak_convention: p.peak_convention,
        infra_cost_ratio: p.infra_cost_ratio,
    })
}

fn price_table(
    scenario: &Scenario,
    grid: Option<TimeGrid>,
    errors: &mut Vec<ValidationError>,
) -> Option<PriceSchedule> {
    let ps = &scenario.prices;
    let before = errors.len();
    nonneg("prices.peak_per_kw", ps.peak_per_kw, errors);
    let res = ps.resolution_minutes;
    if res == 0 || MINUTES_PER_DAY % res != 0 {
        errors.push(invalid(
            "prices.resolution_minutes",
            format!("{res} does not divide a 24-hour day"),
        ));
        return None;
    }
    let per_day = (MINUTES_PER_DAY / res) as usize;
    let full = per_day * scenario.time_grid.num_days as usize;
    let check = |what: String, profile: &[f64], errors: &mut Vec<ValidationError>| {
        if profile.len() != per_day && profile.len() != full {
            errors.push(invalid(
                what.clone(),
                format!("has {} values, expected {per_day} (one day) or {full} (whole period)", profile.len()),
            ));
        }
        for (n, &v) in profile.iter().enumerate() {
            nonneg(format!("{what}[{n}]"), v, errors);
        }
    };
    check("prices.energy_per_kwh.default".into(), &ps.energy_per_kwh.default, errors);
    let mut overrides = HashMap::new();
    for (ty, profile) in &ps.energy_per_kwh.by_type {
        check(format!("prices.energy_per_kwh.by_type.{ty}"), profile, errors);
        match ty.parse::<u32>().ok().filter(|id| scenario.chargers.iter().any(|c| c.id == *id)) {
            Some(id) => {
                overrides.insert(id, profile);
            }
            None => errors.push(unknown("prices.energy_per_kwh.by_type", ty)),
        }
    }
    let grid = grid?;
    if errors.len() > before {
        return None;
    }
    let energy = scenario
        .chargers
        .iter()
        .map(|c| {
            let profile = overrides.get(&c.id).copied().unwrap_or(&ps.energy_per_kwh.default);
            (0..grid.num_blocks())
                .map(|t| {
                    let minute = t as usize * grid.block_minutes as usize;
                    profile[(minute / res as usize) % profile.len()]
                })
                .collect()
        })
        .collect();
    Some(PriceSchedule {
        energy,
        peak_per_kw: ps.peak_per_kw,
    })
}
