//! Translation of a validated scenario into a mixed-integer linear program.
//!
//! Columns, one family per [`VarKey`] variant:
//!
//! * `Y[leg, t, r]` binary: the truck charges on a type `r` charger during
//!   block `t` before driving `leg`. Only blocks in the leg's charging window
//!   and charger types the origin can offer get a column.
//! * `X[i, r]` integer: chargers of type `r` built at location `i`. Co-design
//!   only; fixed designs use constants.
//! * `tdep[leg]`: actual departure, in blocks.
//! * `Cpeak[i]`: demand charge at location `i` over the whole period.
//! * `Edep[leg]`, `Earr[leg]`: state of energy when leaving and arriving.
//!
//! All days share one model because charger counts and demand charges span
//! the whole analysis period. State of energy does not carry over between
//! days: the first leg of each day starts at the truck's initial energy.

use std::collections::BTreeMap;
use std::ops::Range;

use chargeplan_milp::{ColumnId, ColumnKind, LinearModel, Relation};
use serde::Serialize;

use crate::domain::{Design, TripLeg, Truck, ValidatedScenario};
use crate::scenario::PeakConvention;

/// Semantic identity of a model column. The derived order is the column
/// order of the built model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum VarKey {
    Count { location: usize, charger: usize },
    Peak { location: usize },
    Departure { leg: usize },
    SoeDeparture { leg: usize },
    SoeArrival { leg: usize },
    Charge { leg: usize, block: u32, charger: usize },
}

/// Map between semantic keys and model columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VariableCatalog {
    keys: Vec<VarKey>,
    index: BTreeMap<VarKey, ColumnId>,
}

impl VariableCatalog {
    fn from_sorted(keys: Vec<VarKey>) -> Self {
        debug_assert!(keys.windows(2).all(|w| w[0] < w[1]));
        let index = keys.iter().enumerate().map(|(c, &k)| (k, c)).collect();
        VariableCatalog { keys, index }
    }

    pub fn column(&self, key: VarKey) -> Option<ColumnId> {
        self.index.get(&key).copied()
    }

    pub fn key(&self, column: ColumnId) -> VarKey {
        self.keys[column]
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ColumnId, VarKey)> + '_ {
        self.keys.iter().copied().enumerate()
    }

    /// Charge columns of one leg, ordered by block then charger type.
    pub fn charges(&self, leg: usize) -> impl Iterator<Item = (u32, usize, ColumnId)> + '_ {
        let lo = VarKey::Charge {
            leg,
            block: 0,
            charger: 0,
        };
        let hi = VarKey::Charge {
            leg: leg + 1,
            block: 0,
            charger: 0,
        };
        self.index.range(lo..hi).map(|(k, &c)| match *k {
            VarKey::Charge { block, charger, .. } => (block, charger, c),
            _ => unreachable!(),
        })
    }

    /// Column counts per family, in [`VarKey`] order.
    pub fn family_sizes(&self) -> FamilySizes {
        let mut s = FamilySizes::default();
        for k in &self.keys {
            match k {
                VarKey::Count { .. } => s.counts += 1,
                VarKey::Peak { .. } => s.peaks += 1,
                VarKey::Departure { .. } => s.departures += 1,
                VarKey::SoeDeparture { .. } | VarKey::SoeArrival { .. } => s.soe += 1,
                VarKey::Charge { .. } => s.charges += 1,
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FamilySizes {
    pub charges: usize,
    pub counts: usize,
    pub departures: usize,
    pub peaks: usize,
    pub soe: usize,
}

impl FamilySizes {
    pub fn total(&self) -> usize {
        self.charges + self.counts + self.departures + self.peaks + self.soe
    }
}

/// Problems the builder can see without solving.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum BuildDiagnostic {
    /// The leg has no block to charge in, or its origin has no chargers.
    WindowEmpty {
        truck: String,
        day: u32,
        leg: u32,
        consumption_kwh: f64,
        available_kwh: f64,
        guaranteed_infeasible: bool,
    },
    /// The leg needs more energy than a full battery holds.
    LegExceedsBattery {
        truck: String,
        day: u32,
        leg: u32,
        consumption_kwh: f64,
        battery_kwh: f64,
    },
}

impl BuildDiagnostic {
    pub fn guaranteed_infeasible(&self) -> bool {
        match self {
            BuildDiagnostic::WindowEmpty {
                guaranteed_infeasible,
                ..
            } => *guaranteed_infeasible,
            BuildDiagnostic::LegExceedsBattery { .. } => true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub model: LinearModel,
    pub catalog: VariableCatalog,
    pub diagnostics: Vec<BuildDiagnostic>,
}

impl BuiltModel {
    pub fn guaranteed_infeasible(&self) -> bool {
        self.diagnostics.iter().any(BuildDiagnostic::guaranteed_infeasible)
    }
}

/// Energy a leg consumes, in kWh. Payload below the truck's tare counts as
/// tare.
///
/// ```
/// # use chargeplan::{model::energy_consumption, TripLeg, Truck};
/// # let truck = Truck { id: "k".into(), battery_capacity_kwh: 500.0,
/// #     consumption_kwh_per_km_ton: 0.10, initial_soe_kwh: 500.0, tare_tons: 1.0 };
/// # let leg = TripLeg { truck: 0, day: 0, leg: 1, origin: 0, destination: 1,
/// #     departure_block: 0, arrival_block: 8, travel_blocks: 8,
/// #     distance_km: 250.0, payload_tons: 16.0 };
/// assert!((energy_consumption(&leg, &truck) - 400.0).abs() < 1e-9);
/// ```
pub fn energy_consumption(leg: &TripLeg, truck: &Truck) -> f64 {
    ValidatedScenario::consumption(leg, truck)
}

/// Assembles the model one constraint family at a time.
///
/// [`build_problem`] runs every step; the individual steps are public so
/// partial models can be inspected.
pub struct ModelBuilder<'a> {
    vs: &'a ValidatedScenario,
    model: LinearModel,
    catalog: VariableCatalog,
    windows: Vec<Range<u32>>,
    diagnostics: Vec<BuildDiagnostic>,
}

fn leg_tag(vs: &ValidatedScenario, g: usize) -> String {
    let l = &vs.legs[g];
    format!("{},d{},l{}", vs.trucks[l.truck].id, l.day, l.leg)
}

impl<'a> ModelBuilder<'a> {
    /// Creates every column with its bounds and no rows.
    pub fn new(vs: &'a ValidatedScenario) -> Self {
        let n_loc = vs.locations.len();
        let n_r = vs.chargers.len();
        let windows: Vec<Range<u32>> = (0..vs.legs.len()).map(|g| vs.charging_window(g)).collect();
        let offered = |i: usize, r: usize| match &vs.design {
            Design::CoDesign => true,
            Design::Fixed(c) => c.get(i, r) > 0,
        };

        let mut keys = Vec::new();
        if vs.design == Design::CoDesign {
            for i in 0..n_loc {
                for r in 0..n_r {
                    keys.push(VarKey::Count { location: i, charger: r });
                }
            }
        }
        keys.extend((0..n_loc).map(|i| VarKey::Peak { location: i }));
        keys.extend((0..vs.legs.len()).map(|leg| VarKey::Departure { leg }));
        keys.extend((0..vs.legs.len()).map(|leg| VarKey::SoeDeparture { leg }));
        keys.extend((0..vs.legs.len()).map(|leg| VarKey::SoeArrival { leg }));
        for (g, w) in windows.iter().enumerate() {
            let i = vs.legs[g].origin;
            for t in w.clone() {
                for r in (0..n_r).filter(|&r| offered(i, r)) {
                    keys.push(VarKey::Charge {
                        leg: g,
                        block: t,
                        charger: r,
                    });
                }
            }
        }
        let catalog = VariableCatalog::from_sorted(keys);

        // More chargers than simultaneously open windows never help.
        let mut open = vec![vec![0u32; vs.grid.num_blocks() as usize + 1]; n_loc];
        for (g, w) in windows.iter().enumerate() {
            for t in w.clone() {
                open[vs.legs[g].origin][t as usize] += 1;
            }
        }

        let mut model = LinearModel::new();
        for (_, key) in catalog.iter() {
            match key {
                VarKey::Count { location, charger } => {
                    let cap = open[location].iter().copied().max().unwrap_or(0);
                    let x = model.add_column(
                        format!("X[{},{}]", vs.locations[location].id, vs.chargers[charger].id),
                        0.0,
                        cap as f64,
                        ColumnKind::Integer,
                        0.0,
                    );
                    // Settling the design first moves the bound far more
                    // than any single charging decision.
                    model.set_branch_priority(x, 1);
                }
                VarKey::Peak { location } => {
                    model.continuous(format!("Cpeak[{}]", vs.locations[location].id), 0.0, f64::INFINITY);
                }
                VarKey::Departure { leg } => {
                    let l = &vs.legs[leg];
                    let lo = vs.grid.day_blocks(l.day).start as f64;
                    let hi = (l.departure_block + vs.slack_blocks) as f64;
                    model.continuous(format!("tdep[{}]", leg_tag(vs, leg)), lo, hi);
                }
                VarKey::SoeDeparture { leg } => {
                    let truck = &vs.trucks[vs.legs[leg].truck];
                    let (lo, hi) = match vs.previous_leg(leg) {
                        None => (truck.initial_soe_kwh, truck.initial_soe_kwh),
                        Some(_) => (0.0, truck.battery_capacity_kwh),
                    };
                    model.continuous(format!("Edep[{}]", leg_tag(vs, leg)), lo, hi);
                }
                VarKey::SoeArrival { leg } => {
                    let cap = vs.trucks[vs.legs[leg].truck].battery_capacity_kwh;
                    model.continuous(format!("Earr[{}]", leg_tag(vs, leg)), 0.0, cap);
                }
                VarKey::Charge { leg, block, charger } => {
                    model.binary(format!(
                        "Y[{},t{},r{}]",
                        leg_tag(vs, leg),
                        block,
                        vs.chargers[charger].id
                    ));
                }
            }
        }

        ModelBuilder {
            vs,
            model,
            catalog,
            windows,
            diagnostics: Vec::new(),
        }
    }

    fn col(&self, key: VarKey) -> ColumnId {
        self.catalog.column(key).expect("column created in new()")
    }

    fn energy_per_block(&self, charger: usize) -> f64 {
        self.vs.grid.block_hours() * self.vs.chargers[charger].rated_power_kw
    }

    /// Energy balance per leg, state-of-energy chaining between legs and the
    /// battery limit while charging.
    pub fn add_energy_constraints(&mut self) {
        let vs = self.vs;
        for g in 0..vs.legs.len() {
            let tag = leg_tag(vs, g);
            let l = &vs.legs[g];
            let truck = &vs.trucks[l.truck];
            let cons = energy_consumption(l, truck);
            let edep = self.col(VarKey::SoeDeparture { leg: g });
            let earr = self.col(VarKey::SoeArrival { leg: g });
            let charge: Vec<(ColumnId, f64)> = self
                .catalog
                .charges(g)
                .map(|(_, r, c)| (c, self.energy_per_block(r)))
                .collect();

            let mut balance = vec![(earr, 1.0), (edep, -1.0)];
            balance.extend(charge.iter().map(|&(c, e)| (c, -e)));
            self.model.add_row(format!("balance[{tag}]"), balance, Relation::Eq, -cons);

            if let Some(p) = vs.previous_leg(g) {
                let prev = self.col(VarKey::SoeArrival { leg: p });
                self.model
                    .add_row(format!("soe_chain[{tag}]"), [(edep, 1.0), (prev, -1.0)], Relation::Eq, 0.0);
            }
            if !charge.is_empty() {
                let mut cap = vec![(edep, 1.0)];
                cap.extend(charge.iter().copied());
                self.model
                    .add_row(format!("battery[{tag}]"), cap, Relation::Le, truck.battery_capacity_kwh);
            }

            if cons > truck.battery_capacity_kwh {
                self.diagnostics.push(BuildDiagnostic::LegExceedsBattery {
                    truck: truck.id.clone(),
                    day: l.day,
                    leg: l.leg,
                    consumption_kwh: cons,
                    battery_kwh: truck.battery_capacity_kwh,
                });
            }
            if charge.is_empty() {
                let available = match vs.previous_leg(g) {
                    None => truck.initial_soe_kwh,
                    Some(_) => truck.battery_capacity_kwh,
                };
                self.diagnostics.push(BuildDiagnostic::WindowEmpty {
                    truck: truck.id.clone(),
                    day: l.day,
                    leg: l.leg,
                    consumption_kwh: cons,
                    available_kwh: available,
                    guaranteed_infeasible: cons > available,
                });
            }
        }
    }

    /// Departure after the last charging block, within the slack, and after
    /// the previous leg has been driven.
    pub fn add_schedule_constraints(&mut self) {
        let vs = self.vs;
        for g in 0..vs.legs.len() {
            let tag = leg_tag(vs, g);
            let tdep = self.col(VarKey::Departure { leg: g });
            let mut per_block: BTreeMap<u32, Vec<ColumnId>> = BTreeMap::new();
            for (t, _, c) in self.catalog.charges(g) {
                per_block.entry(t).or_default().push(c);
            }
            for (t, cols) in per_block {
                let mut terms = vec![(tdep, 1.0)];
                terms.extend(cols.into_iter().map(|c| (c, -((t + 1) as f64))));
                self.model
                    .add_row(format!("after_charge[{tag},t{t}]"), terms, Relation::Ge, 0.0);
            }
            if let Some(p) = vs.previous_leg(g) {
                let prev = self.col(VarKey::Departure { leg: p });
                self.model.add_row(
                    format!("order[{tag}]"),
                    [(tdep, 1.0), (prev, -1.0)],
                    Relation::Ge,
                    vs.legs[p].travel_blocks as f64,
                );
            }
        }
    }

    /// Chargers in use never exceed chargers built, and a truck uses at most
    /// one charger per block.
    pub fn add_capacity_constraints(&mut self) {
        let vs = self.vs;
        let mut usage: BTreeMap<(usize, usize, u32), Vec<ColumnId>> = BTreeMap::new();
        for g in 0..vs.legs.len() {
            let mut per_block: BTreeMap<u32, Vec<ColumnId>> = BTreeMap::new();
            for (t, r, c) in self.catalog.charges(g) {
                usage.entry((vs.legs[g].origin, r, t)).or_default().push(c);
                per_block.entry(t).or_default().push(c);
            }
            for (t, cols) in per_block.into_iter().filter(|(_, c)| c.len() > 1) {
                self.model.add_row(
                    format!("one_charger[{},t{t}]", leg_tag(vs, g)),
                    cols.into_iter().map(|c| (c, 1.0)),
                    Relation::Le,
                    1.0,
                );
            }
        }
        for ((i, r), blocks) in group_by_pair(usage) {
            let name = |t: u32| format!("capacity[{},{},t{t}]", vs.locations[i].id, vs.chargers[r].id);
            match &vs.design {
                Design::CoDesign => {
                    let x = self.col(VarKey::Count { location: i, charger: r });
                    for (t, cols) in blocks {
                        let mut terms: Vec<_> = cols.into_iter().map(|c| (c, 1.0)).collect();
                        terms.push((x, -1.0));
                        self.model.add_row(name(t), terms, Relation::Le, 0.0);
                    }
                }
                Design::Fixed(counts) => {
                    let cap = counts.get(i, r);
                    for (t, cols) in blocks.into_iter().filter(|(_, c)| c.len() > cap as usize) {
                        self.model
                            .add_row(name(t), cols.into_iter().map(|c| (c, 1.0)), Relation::Le, cap as f64);
                    }
                }
            }
        }
    }

    /// Demand charge bounded below by the draw of every block at the
    /// location. Minimization makes the tightest bound hold with equality.
    pub fn add_peak_epigraph(&mut self) {
        let vs = self.vs;
        let unit = match vs.peak_convention {
            PeakConvention::Power => 1.0,
            PeakConvention::Energy => vs.grid.block_hours(),
        };
        let mut draw: BTreeMap<(usize, u32), Vec<(ColumnId, f64)>> = BTreeMap::new();
        for g in 0..vs.legs.len() {
            for (t, r, c) in self.catalog.charges(g) {
                let kw = vs.chargers[r].rated_power_kw;
                draw.entry((vs.legs[g].origin, t)).or_default().push((c, kw));
            }
        }
        for ((i, t), terms) in draw {
            let peak = self.col(VarKey::Peak { location: i });
            let mut row = vec![(peak, 1.0)];
            row.extend(terms.into_iter().map(|(c, kw)| (c, -vs.prices.peak_per_kw * unit * kw)));
            self.model
                .add_row(format!("peak[{},t{t}]", vs.locations[i].id), row, Relation::Ge, 0.0);
        }
    }

    /// Energy cost of every charging block, capital cost of chargers built
    /// and the weighted demand charges.
    pub fn build_objective(&mut self) {
        let vs = self.vs;
        let tau = vs.grid.block_hours();
        let ratio = vs.infra_cost_ratio;
        let mut offset = 0.0;
        if let Design::Fixed(counts) = &vs.design {
            for row in &counts.0 {
                for (r, &n) in row.iter().enumerate() {
                    offset += vs.chargers[r].capital_cost * ratio * n as f64;
                }
            }
        }
        let costs: Vec<(ColumnId, f64)> = self
            .catalog
            .iter()
            .filter_map(|(c, key)| {
                let cost = match key {
                    VarKey::Charge { block, charger, .. } => {
                        let ch = &vs.chargers[charger];
                        tau * ch.rated_power_kw / ch.efficiency * vs.prices.energy(charger, block)
                    }
                    VarKey::Count { charger, .. } => vs.chargers[charger].capital_cost * ratio,
                    VarKey::Peak { .. } => vs.alpha,
                    _ => return None,
                };
                Some((c, cost))
            })
            .collect();
        for (c, cost) in costs {
            self.model.set_objective(c, cost);
        }
        self.model.set_objective_offset(offset);
    }

    pub fn windows(&self) -> &[Range<u32>] {
        &self.windows
    }

    pub fn model(&self) -> &LinearModel {
        &self.model
    }

    pub fn finish(self) -> BuiltModel {
        BuiltModel {
            model: self.model,
            catalog: self.catalog,
            diagnostics: self.diagnostics,
        }
    }
}

fn group_by_pair(
    usage: BTreeMap<(usize, usize, u32), Vec<ColumnId>>,
) -> BTreeMap<(usize, usize), Vec<(u32, Vec<ColumnId>)>> {
    let mut out: BTreeMap<(usize, usize), Vec<(u32, Vec<ColumnId>)>> = BTreeMap::new();
    for ((i, r, t), cols) in usage {
        out.entry((i, r)).or_default().push((t, cols));
    }
    out
}

/// Builds the complete model for `vs`. The result depends only on `vs`:
/// column and row order follow semantic keys.
pub fn build_problem(vs: &ValidatedScenario) -> BuiltModel {
    let mut b = ModelBuilder::new(vs);
    b.add_energy_constraints();
    b.add_schedule_constraints();
    b.add_capacity_constraints();
    b.add_peak_epigraph();
    b.build_objective();
    b.finish()
}

