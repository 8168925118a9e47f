#![allow(dead_code)]

use std::path::PathBuf;

use chargeplan::{load_scenario, ValidatedScenario};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture(name: &str) -> ValidatedScenario {
    load_scenario(&fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

use std::collections::BTreeMap;

use chargeplan::{
    prepare, ChargerType, Clock, DesignMode, EnergyPrices, LegSpec, LocationKind, LocationSpec,
    Params, PriceSpec, Scenario, TimeGridSpec, TruckSpec,
};

/// Hand-built one-day scenarios. Consumption is 1 kWh per km at 1 t, so a
/// leg's `kwh` is its distance. Energy costs 0.20 per kWh all day.
pub struct Mini {
    pub s: Scenario,
}

impl Mini {
    pub fn new(block_minutes: u32) -> Self {
        Mini {
            s: Scenario {
                time_grid: TimeGridSpec {
                    block_minutes,
                    num_days: 1,
                },
                trucks: vec![],
                legs: vec![],
                chargers: chargeplan::synth::default_catalog(),
                prices: PriceSpec {
                    resolution_minutes: 60,
                    energy_per_kwh: EnergyPrices {
                        default: vec![0.20; 24],
                        by_type: BTreeMap::new(),
                    },
                    peak_per_kw: 20.0,
                },
                locations: vec![
                    LocationSpec {
                        id: "DC".into(),
                        kind: LocationKind::Depot,
                    },
                    LocationSpec {
                        id: "R1".into(),
                        kind: LocationKind::Retailer,
                    },
                ],
                params: Params {
                    alpha: 1.0,
                    slack_minutes: 0,
                    design_mode: DesignMode::Codesign,
                    fixed_counts: None,
                    window_convention: Default::default(),
                    peak_convention: Default::default(),
                    infra_cost_ratio: 1.0,
                },
            },
        }
    }

    pub fn chargers(mut self, list: &[(u32, f64)]) -> Self {
        self.s.chargers = list
            .iter()
            .map(|&(id, kw)| ChargerType {
                id,
                rated_power_kw: kw,
                capital_cost: 1000.0 * kw,
                efficiency: 1.0,
            })
            .collect();
        self
    }

    pub fn truck(mut self, id: &str, battery: f64, initial: f64) -> Self {
        self.s.trucks.push(TruckSpec {
            id: id.into(),
            battery_capacity_kwh: battery,
            consumption_kwh_per_km_ton: 1.0,
            initial_soe_kwh: Some(initial),
            tare_tons: 1.0,
        });
        self
    }

    #[allow(clippy::too_many_arguments)]
    pub fn leg(mut self, truck: &str, leg: u32, from: &str, to: &str, dep: &str, arr: &str, kwh: f64) -> Self {
        self.s.legs.push(LegSpec {
            truck: truck.into(),
            day: 0,
            leg,
            origin: from.into(),
            destination: to.into(),
            departure: dep.parse::<Clock>().unwrap(),
            arrival: arr.parse::<Clock>().unwrap(),
            travel_minutes: None,
            distance_km: kwh,
            payload_tons: 1.0,
        });
        self
    }

    pub fn fixed(mut self, counts: &[(&str, u32, i64)]) -> Self {
        let mut spec: BTreeMap<String, BTreeMap<String, i64>> = BTreeMap::new();
        for &(loc, r, n) in counts {
            spec.entry(loc.into()).or_default().insert(r.to_string(), n);
        }
        self.s.params.design_mode = DesignMode::Fixed;
        self.s.params.fixed_counts = Some(spec);
        self
    }

    pub fn alpha(mut self, alpha: f64) -> Self {
        self.s.params.alpha = alpha;
        self
    }

    pub fn peak_price(mut self, per_kw: f64) -> Self {
        self.s.prices.peak_per_kw = per_kw;
        self
    }

    pub fn prepare(&self) -> ValidatedScenario {
        prepare(&self.s).unwrap_or_else(|e| panic!("{e:?}"))
    }
}
