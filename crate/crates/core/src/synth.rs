//! Seeded synthetic scenarios: one depot serving retailers.
//!
//! Every truck drives two round trips a day, depot to retailer and back,
//! starting shortly after midnight. Outbound legs are loaded, return legs
//! nearly empty. Two round trips use more energy than one battery holds, so
//! every truck has to charge at least once a day.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scenario::{
    ChargerType, Clock, DesignMode, EnergyPrices, LegSpec, LocationKind, LocationSpec, Params,
    PeakConvention, PriceSpec, Scenario, TimeGridSpec, TruckSpec, WindowConvention,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub seed: u64,
    pub trucks: usize,
    /// Including the depot; at least 2.
    pub locations: usize,
    pub days: u32,
    /// Scales dwell times between their minimum (0) and maximum (1).
    pub tightness: f64,
    pub block_minutes: u32,
    pub peak_per_kw: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            seed: 1,
            trucks: 3,
            locations: 5,
            days: 2,
            tightness: 0.3,
            block_minutes: 15,
            peak_per_kw: 20.0,
        }
    }
}

/// Power, capital cost and efficiency of five charger types from 60 kW to
/// 1180 kW.
pub fn default_catalog() -> Vec<ChargerType> {
    [
        (1, 60.0, 20_000.0, 0.98),
        (2, 180.0, 50_000.0, 0.98),
        (3, 360.0, 90_000.0, 0.97),
        (4, 720.0, 150_000.0, 0.97),
        (5, 1180.0, 300_000.0, 0.97),
    ]
    .into_iter()
    .map(|(id, p, c, e)| ChargerType {
        id,
        rated_power_kw: p,
        capital_cost: c,
        efficiency: e,
    })
    .collect()
}

/// Hourly energy prices: expensive 06-12 and 18-20.
pub fn default_prices(rng: &mut impl Rng) -> Vec<f64> {
    (0..24)
        .map(|h| {
            let base = if (6..12).contains(&h) || (18..20).contains(&h) { 0.32 } else { 0.18 };
            let jitter = rng.gen_range(-10..=10) as f64 / 1000.0;
            ((base + jitter) * 1000.0f64).round() / 1000.0
        })
        .collect()
}

const BATTERY_KWH: f64 = 300.0;
const KM_PER_MIN: f64 = 1.0;

fn tenth(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Deterministic in `params`; the same parameters always give the same
/// scenario.
pub fn generate_synthetic(params: &SynthParams) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n_loc = params.locations.max(2);
    let tight = params.tightness.clamp(0.0, 1.0);

    let mut locations = vec![LocationSpec {
        id: "DC".into(),
        kind: LocationKind::Depot,
    }];
    let mut distance = Vec::new();
    for n in 1..n_loc {
        locations.push(LocationSpec {
            id: format!("R{n}"),
            kind: LocationKind::Retailer,
        });
        distance.push(rng.gen_range(40..=110) as f64);
    }

    let trucks: Vec<TruckSpec> = (0..params.trucks)
        .map(|k| TruckSpec {
            id: format!("T{}", k + 1),
            battery_capacity_kwh: BATTERY_KWH,
            consumption_kwh_per_km_ton: 0.16,
            initial_soe_kwh: None,
            tare_tons: 1.0,
        })
        .collect();

    let mut legs = Vec::new();
    for day in 0..params.days {
        for truck in &trucks {
            let mut clock = rng.gen_range(20..=60u32);
            let mut leg = 0;
            for _ in 0..2 {
                let r = rng.gen_range(0..distance.len());
                let km = distance[r];
                let minutes = (km / KM_PER_MIN).round() as u32;
                let retailer = &locations[r + 1].id;
                for (from, to, payload) in [
                    ("DC", retailer.as_str(), tenth(rng.gen_range(9.0..17.0))),
                    (retailer.as_str(), "DC", tenth(rng.gen_range(0.0..3.0))),
                ] {
                    leg += 1;
                    legs.push(LegSpec {
                        truck: truck.id.clone(),
                        day,
                        leg,
                        origin: from.into(),
                        destination: to.into(),
                        departure: Clock(clock),
                        arrival: Clock(clock + minutes),
                        travel_minutes: Some(minutes),
                        distance_km: km,
                        payload_tons: payload,
                    });
                    clock += minutes;
                    let (min, extra) = if to == "DC" { (40, 120) } else { (25, 60) };
                    let arrived = clock;
                    clock += min + (tight * rng.gen_range(0..=extra) as f64).round() as u32;
                    // Quantization moves arrivals up and departures down;
                    // keep the next departure from landing before the arrival.
                    let b = params.block_minutes.max(1);
                    if clock / b * b < arrived.div_ceil(b) * b {
                        clock = arrived.div_ceil(b) * b;
                    }
                }
            }
        }
    }

    let prices = default_prices(&mut rng);
    Scenario {
        time_grid: TimeGridSpec {
            block_minutes: params.block_minutes,
            num_days: params.days,
        },
        trucks,
        legs,
        chargers: default_catalog(),
        prices: PriceSpec {
            resolution_minutes: 60,
            energy_per_kwh: EnergyPrices {
                default: prices,
                by_type: BTreeMap::new(),
            },
            peak_per_kw: params.peak_per_kw,
        },
        locations,
        params: Params {
            alpha: 1.0,
            slack_minutes: params.block_minutes as i64,
            design_mode: DesignMode::Codesign,
            fixed_counts: None,
            window_convention: WindowConvention::PreviousArrival,
            peak_convention: PeakConvention::Power,
            infra_cost_ratio: 1.0,
        },
    }
}
