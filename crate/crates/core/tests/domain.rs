mod common;

use chargeplan::milp::Status;
use chargeplan::synth::{generate_synthetic, SynthParams};
use chargeplan::{
    io, prepare, quantize_times, solve_scenario, validate_scenario, Clock, Design, FixedCounts, Rounding,
    SolveOptions, ValidationError,
};
use common::Mini;
use proptest::prelude::*;

fn two_legs() -> Mini {
    Mini::new(15)
        .truck("T1", 300.0, 300.0)
        .leg("T1", 1, "DC", "R1", "01:00", "02:00", 50.0)
        .leg("T1", 2, "R1", "DC", "03:00", "04:00", 50.0)
}

#[test]
fn empty_scenario_is_valid() {
    let vs = validate_scenario(&Mini::new(15).s).unwrap();
    assert!(vs.legs.is_empty() && vs.trucks.is_empty());
}

#[test]
fn broken_chain_is_rejected() {
    let mut m = two_legs();
    m.s.locations.push(chargeplan::LocationSpec {
        id: "R2".into(),
        kind: chargeplan::LocationKind::Retailer,
    });
    m.s.legs[1].origin = "R2".into();
    let errs = validate_scenario(&m.s).unwrap_err();
    assert_eq!(
        errs,
        vec![ValidationError::ChainBroken {
            truck: "T1".into(),
            day: 0,
            leg: 2,
            expected: "R1".into(),
            found: "R2".into(),
        }]
    );
}

#[test]
fn every_problem_is_reported_at_once() {
    let mut m = two_legs();
    m.s.legs[0].truck = "T7".into();
    m.s.legs[1].distance_km = -1.0;
    m.s.legs[1].departure = Clock::hm(3, 5);
    m.s.trucks.push(m.s.trucks[0].clone());
    m.s.params.slack_minutes = 20;
    m.s.chargers[0].efficiency = 1.5;
    m.s.prices.energy_per_kwh.default.pop();
    let errs = validate_scenario(&m.s).unwrap_err();
    let has = |f: fn(&ValidationError) -> bool| errs.iter().any(f);
    assert!(has(|e| matches!(e, ValidationError::UnknownReference { id, .. } if id == "T7")));
    assert!(has(|e| matches!(e, ValidationError::NegativeQuantity { .. })));
    assert!(has(|e| matches!(e, ValidationError::TimeOffGrid { minutes: 185, .. })));
    assert!(has(|e| matches!(e, ValidationError::TimeOffGrid { minutes: 20, .. })));
    assert!(has(|e| matches!(e, ValidationError::DuplicateId { .. })));
    assert!(errs.iter().filter(|e| matches!(e, ValidationError::InvalidValue { .. })).count() >= 2);
}

#[test]
fn fixed_design_needs_known_ids_and_nonnegative_counts() {
    let m = two_legs().fixed(&[("DC", 2, -3), ("XX", 1, 1), ("R1", 42, 1)]);
    let errs = validate_scenario(&m.s).unwrap_err();
    assert_eq!(errs.len(), 3, "{errs:?}");
}

#[test]
fn leg_numbers_must_run_from_one() {
    let mut m = two_legs();
    m.s.legs[1].leg = 3;
    let errs = validate_scenario(&m.s).unwrap_err();
    assert!(matches!(&errs[..], [ValidationError::LegNumbering { found, .. }] if found == &[1, 3]));
}

#[test]
fn quantize_rounds_outward() {
    let mut m = two_legs();
    m.s.legs[0].departure = Clock::hm(3, 7);
    m.s.legs[0].arrival = Clock::hm(3, 7);
    m.s.legs[0].travel_minutes = Some(50);
    let q = quantize_times(&m.s, Rounding::Conservative);
    assert_eq!(q.legs[0].departure, Clock::hm(3, 0));
    assert_eq!(q.legs[0].arrival, Clock::hm(3, 15));
    assert_eq!(q.legs[0].travel_minutes, Some(60));
    m.s.legs[1].departure = Clock::hm(4, 0);
    m.s.legs[1].arrival = Clock::hm(5, 0);
    let vs = prepare(&m.s).unwrap();
    assert_eq!(vs.legs[0].departure_block, 12);
    assert_eq!(vs.legs[0].arrival_block, 13);
    assert_eq!(vs.legs[0].travel_blocks, 4);
}

#[test]
fn generator_is_deterministic() {
    let p = SynthParams::default();
    assert_eq!(io::to_json_string(&generate_synthetic(&p)), io::to_json_string(&generate_synthetic(&p)));
    let other = SynthParams { seed: 2, ..p };
    assert_ne!(generate_synthetic(&other), generate_synthetic(&SynthParams::default()));
}

#[test]
fn tightest_windows_cannot_do_without_chargers() {
    let p = SynthParams {
        tightness: 0.0,
        days: 1,
        ..Default::default()
    };
    let vs = prepare(&generate_synthetic(&p)).unwrap().with_alpha_slack(1.0, 0);
    let none = FixedCounts::zeros(vs.locations.len(), vs.chargers.len());
    let out = solve_scenario(&vs.with_design(Design::Fixed(none)), &SolveOptions::default()).unwrap();
    assert_eq!(out.status, Status::Infeasible);
}

fn params() -> impl Strategy<Value = SynthParams> {
    (any::<u64>(), 1usize..5, 2usize..7, 1u32..4, 0.0f64..=1.0, prop::sample::select(vec![5u32, 10, 15, 20, 30, 60]))
        .prop_map(|(seed, trucks, locations, days, tightness, block_minutes)| SynthParams {
            seed,
            trucks,
            locations,
            days,
            tightness,
            block_minutes,
            ..Default::default()
        })
}

proptest! {
    #[test]
    fn generated_tours_are_connected_depot_loops(p in params()) {
        let vs = prepare(&generate_synthetic(&p)).unwrap();
        prop_assert_eq!(vs.trucks.len(), p.trucks);
        let depot = vs.location_index("DC").unwrap();
        for (g, l) in vs.legs.iter().enumerate() {
            match vs.previous_leg(g) {
                Some(prev) => {
                    prop_assert_eq!(vs.legs[prev].destination, l.origin);
                    prop_assert!(vs.legs[prev].arrival_block <= l.departure_block);
                }
                None => prop_assert_eq!(l.origin, depot),
            }
            let last = vs.legs.get(g + 1).map_or(true, |n| (n.truck, n.day) != (l.truck, l.day));
            if last {
                prop_assert_eq!(l.destination, depot);
            }
        }
    }

    #[test]
    fn quantizing_twice_is_quantizing_once(
        p in params(),
        jitter in prop::collection::vec((0u32..60, 0u32..60), 1..40),
        nearest in any::<bool>(),
    ) {
        let mut s = generate_synthetic(&SynthParams { block_minutes: 60, ..p });
        for (l, (a, b)) in s.legs.iter_mut().zip(jitter.iter().cycle()) {
            l.departure = Clock(l.departure.0.saturating_sub(*a));
            l.arrival = Clock((l.arrival.0 + b).min(24 * 60));
            l.travel_minutes = None;
        }
        s.time_grid.block_minutes = p.block_minutes;
        let mode = if nearest { Rounding::Nearest } else { Rounding::Conservative };
        let once = quantize_times(&s, mode);
        prop_assert_eq!(quantize_times(&once, mode), once.clone());
        for (q, raw) in once.legs.iter().zip(&s.legs) {
            prop_assert_eq!(q.departure.0 % p.block_minutes, 0);
            prop_assert_eq!(q.arrival.0 % p.block_minutes, 0);
            if !nearest {
                prop_assert!(q.departure <= raw.departure);
                prop_assert!(q.arrival >= raw.arrival);
            }
        }
    }
}
