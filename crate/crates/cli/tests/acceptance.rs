//! End-to-end acceptance checks. Prints one PASS/FAIL line per check and
//! fails if any check fails.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use chargeplan::milp::{branch_and_bound, brute_force_enumerate, LinearModel, Relation, SolverConfig, Status};
use chargeplan::sweep::{read_outputs, run_sweep, SweepSpec};
use chargeplan::{
    io, prepare, rule_based_design, solve_scenario, Design, Policy, Scenario, SolveOptions, SolveOutcome,
    ValidatedScenario,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const TOL: f64 = 1e-6;

fn fixture(name: &str) -> ValidatedScenario {
    io::load_scenario(&fixture_path(name)).unwrap()
}

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * a.abs().max(b.abs()).max(1.0)
}

/// Every optimal solve with a positive peak weight, kept for the demand
/// charge check.
struct Seen(Vec<(String, ValidatedScenario, SolveOutcome)>);

impl Seen {
    fn solve(&mut self, label: String, vs: &ValidatedScenario, opts: &SolveOptions) -> SolveOutcome {
        let out = solve_scenario(vs, opts).unwrap();
        if out.status == Status::Optimal && vs.alpha > 0.0 {
            self.0.push((label, vs.clone(), out.clone()));
        }
        out
    }
}

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Random binary programs with a few continuous columns, built around a
/// known feasible point so most of them have an optimum.
fn random_milp(rng: &mut ChaCha8Rng) -> LinearModel {
    let bins = rng.gen_range(2..=12);
    let conts = rng.gen_range(0..=3);
    let rows = rng.gen_range(1..=10);
    let mut m = LinearModel::new();
    let mut cols = Vec::new();
    let mut point = Vec::new();
    for j in 0..bins {
        let c = m.binary(format!("b{j}"));
        m.set_objective(c, rng.gen_range(-10..=10) as f64);
        cols.push(c);
        point.push(rng.gen_range(0..=1) as f64);
    }
    for j in 0..conts {
        let c = m.continuous(format!("x{j}"), 0.0, 5.0);
        m.set_objective(c, rng.gen_range(-10..=10) as f64 / 2.0);
        cols.push(c);
        point.push(rng.gen_range(0..=10) as f64 / 2.0);
    }
    for i in 0..rows {
        let a: Vec<f64> = cols.iter().map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(-8..=8) as f64 }).collect();
        let act: f64 = a.iter().zip(&point).map(|(a, x)| a * x).sum();
        let (rel, rhs) = match rng.gen_range(0..5) {
            0 => (Relation::Eq, act),
            1 | 2 => (Relation::Le, act + rng.gen_range(0..=4) as f64),
            _ => (Relation::Ge, act - rng.gen_range(0..=4) as f64),
        };
        m.add_row(format!("r{i}"), cols.iter().copied().zip(a), rel, rhs);
    }
    m
}

fn exact_solver_matches_enumeration() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let start = Instant::now();
    let mut optimal = 0;
    for k in 0..50 {
        let m = random_milp(&mut rng);
        let bb = branch_and_bound(&m, &SolverConfig::with_gap(0.0)).map_err(|e| format!("instance {k}: {e}"))?;
        let bf = brute_force_enumerate(&m, 12).map_err(|e| format!("instance {k}: {e}"))?;
        ensure(bb.status == bf.status, || format!("instance {k}: {:?} vs {:?}", bb.status, bf.status))?;
        if bf.status == Status::Optimal {
            optimal += 1;
            ensure((bb.objective - bf.objective).abs() <= TOL, || {
                format!("instance {k}: {} vs {}", bb.objective, bf.objective)
            })?;
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(5), || format!("took {took:?}"))?;
    Ok(format!("50 instances ({optimal} with an optimum) agree, {took:.2?}"))
}

fn depot_fixture_solves_and_replays(seen: &mut Seen) -> Check {
    let vs = fixture("depot_3x5x2.json");
    let start = Instant::now();
    let out = seen.solve("depot".into(), &vs, &SolveOptions::with_gap(0.01));
    let took = start.elapsed();
    ensure(out.status == Status::Optimal, || format!("status {:?}", out.status))?;
    ensure(out.verified(), || format!("replay {:?}", out.replay))?;
    let report = out.report.as_ref().unwrap();
    let costs = out.costs.as_ref().unwrap();
    ensure((costs.total - report.objective).abs() <= TOL * report.objective.abs().max(1.0), || {
        format!("validator {} vs objective {}", costs.total, report.objective)
    })?;
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!("objective {:.2}, gap {:.4}, {took:.2?}", report.objective, report.gap))
}

fn demand_charges_are_literal_peaks(seen: &Seen) -> Check {
    ensure(!seen.0.is_empty(), || "no optimal solves recorded".into())?;
    let mut peaks = 0;
    for (label, vs, out) in &seen.0 {
        let report = out.report.as_ref().unwrap();
        let mut draw: BTreeMap<(&str, u32), f64> = BTreeMap::new();
        for e in &report.events {
            *draw.entry((e.location.as_str(), e.block)).or_insert(0.0) += e.power_kw;
        }
        for pk in &report.peaks {
            let literal = draw
                .iter()
                .filter(|((loc, _), _)| *loc == pk.location)
                .map(|(_, &kw)| kw)
                .fold(0.0, f64::max);
            let want = vs.prices.peak_per_kw * literal;
            ensure(close(pk.peak_cost, want), || {
                format!("{label} at {}: charge {} vs {want}", pk.location, pk.peak_cost)
            })?;
            peaks += 1;
        }
    }
    Ok(format!("{peaks} location peaks over {} solves", seen.0.len()))
}

fn codesign_never_loses_to_a_fixed_design(seen: &mut Seen) -> Check {
    let base = fixture("remote_site.json");
    let fixed = rule_based_design(&base, &"main-depot-only:1:2".parse::<Policy>().unwrap()).unwrap();
    let opts = SolveOptions::default();
    let mut compared = 0;
    for alpha in [1.0, 2.0] {
        for slack in [0, 2] {
            let vs = base.with_alpha_slack(alpha, slack);
            let label = format!("remote a{alpha} s{slack}");
            let co = seen.solve(format!("{label} codesign"), &vs, &opts);
            let fx = seen.solve(format!("{label} fixed"), &vs.with_design(Design::Fixed(fixed.clone())), &opts);
            let Some(f) = fx.report else { continue };
            let c = co.report.ok_or_else(|| format!("{label}: codesign infeasible where fixed is not"))?;
            let slack_allowed = (c.objective - c.best_bound) + (f.objective - f.best_bound) + TOL;
            ensure(c.objective <= f.objective + slack_allowed, || {
                format!("{label}: codesign {} > fixed {} + {slack_allowed}", c.objective, f.objective)
            })?;
            compared += 1;
        }
    }
    ensure(compared > 0, || "fixed design never feasible".into())?;
    Ok(format!("{compared} of 4 cells compared"))
}

fn slack_never_raises_cost(seen: &mut Seen) -> Check {
    let base = fixture("remote_site.json");
    let mut prev: Option<(u32, f64, f64)> = None;
    let mut objs = Vec::new();
    for slack in [0, 1, 2, 4] {
        let out = seen.solve(format!("remote slack {slack}"), &base.with_alpha_slack(1.0, slack), &SolveOptions::default());
        let r = out.report.ok_or_else(|| format!("slack {slack}: {:?}", out.status))?;
        if let Some((s0, obj0, gap0)) = prev {
            ensure(r.objective <= obj0 + gap0 + (r.objective - r.best_bound) + TOL, || {
                format!("slack {slack}: {} above slack {s0}: {obj0}", r.objective)
            })?;
        }
        prev = Some((slack, r.objective, r.objective - r.best_bound));
        objs.push(format!("{:.2}", r.objective));
    }
    Ok(format!("objectives {}", objs.join(" / ")))
}

fn peak_weight_trades_peaks_for_total(seen: &mut Seen) -> Check {
    let base = fixture("depot_3x5x2.json");
    let mut rows = Vec::new();
    for alpha in [0.5, 1.0, 2.0, 4.0] {
        let vs = base.with_alpha_slack(alpha, 1);
        let out = seen.solve(format!("depot alpha {alpha}"), &vs, &SolveOptions::with_gap(0.0));
        let r = out.report.ok_or_else(|| format!("alpha {alpha}: {:?}", out.status))?;
        let peak: f64 = r.peaks.iter().map(|p| p.peak_cost).sum();
        let kw: f64 = vs.locations.iter().map(|l| r.installed_kw(&vs, &l.id)).sum();
        rows.push((alpha, peak, r.objective, kw));
    }
    for w in rows.windows(2) {
        let (a0, p0, t0, k0) = w[0];
        let (a1, p1, t1, k1) = w[1];
        ensure(p1 <= p0 + TOL, || format!("peak rises from α={a0} to α={a1}: {p0} → {p1}"))?;
        ensure(t1 + TOL >= t0, || format!("total falls from α={a0} to α={a1}: {t0} → {t1}"))?;
        ensure(k1 <= k0 + TOL, || format!("installed kW rises from α={a0} to α={a1}: {k0} → {k1}"))?;
    }
    let totals: Vec<String> = rows.iter().map(|r| format!("{:.2}", r.2)).collect();
    Ok(format!("totals {}", totals.join(" / ")))
}

fn slack_rescues_a_single_depot_charger(seen: &mut Seen) -> Check {
    let base = fixture("remote_site.json");
    let fixed = rule_based_design(&base, &"main-depot-only:1:2".parse::<Policy>().unwrap()).unwrap();
    let mut pattern = Vec::new();
    for slack in 0..=4 {
        let vs = base.with_alpha_slack(1.0, slack);
        let fx = seen.solve(format!("remote fixed s{slack}"), &vs.with_design(Design::Fixed(fixed.clone())), &SolveOptions::default());
        let co = seen.solve(format!("remote codesign s{slack}"), &vs, &SolveOptions::default());
        ensure(co.verified(), || format!("codesign at slack {slack}: {:?}", co.status))?;
        ensure(fx.report.is_none() || fx.verified(), || format!("fixed plan at slack {slack} failed replay"))?;
        pattern.push(fx.report.is_some());
    }
    ensure(pattern == [false, false, true, true, true], || format!("fixed feasibility by slack: {pattern:?}"))?;
    Ok("fixed infeasible at 0 and 1 blocks, feasible from 2; codesign always feasible".into())
}

fn single_thread_sweeps_repeat_exactly() -> Check {
    let vs = fixture("tiny_2x1.json");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut spec = SweepSpec::new(a.path());
    spec.alphas = vec![0.5, 1.0, 2.0];
    spec.slack_minutes = vec![0, 60];
    spec.threads = 1;
    run_sweep(&vs, &spec).map_err(|e| e.to_string())?;
    run_sweep(&vs, &SweepSpec { out_dir: b.path().into(), ..spec }).map_err(|e| e.to_string())?;
    let (x, y) = (read_outputs(a.path()).unwrap(), read_outputs(b.path()).unwrap());
    ensure(x == y, || "outputs differ".into())?;
    let csvs = x.iter().filter(|(n, _)| n.ends_with(".csv")).count();
    Ok(format!("{} files identical, {csvs} CSV", x.len()))
}

fn scenarios_round_trip_and_match_schema() -> Check {
    let schema_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas/scenario.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let schema = jsonschema::JSONSchema::compile(&schema).map_err(|e| e.to_string())?;
    let names = ["depot_3x5x2.json", "remote_site.json", "tiny_2x1.json"];
    for name in names {
        let text = std::fs::read_to_string(fixture_path(name)).unwrap();
        let raw: Value = serde_json::from_str(&text).unwrap();
        ensure(schema.is_valid(&raw), || format!("{name} fails the schema"))?;
        let first = prepare(&serde_json::from_str::<Scenario>(&text).unwrap()).map_err(|e| e.to_string())?;
        let again: Scenario = serde_json::from_str(&io::to_json_string(first.scenario())).unwrap();
        let second = prepare(&again).map_err(|e| e.to_string())?;
        ensure(first == second, || format!("{name} changes on reload"))?;
    }
    Ok(format!("{} fixtures", names.len()))
}

fn main() {
    let mut seen = Seen(Vec::new());
    let mut results: Vec<(&str, Check)> = vec![
        ("exact solver matches enumeration", exact_solver_matches_enumeration()),
        ("depot fixture solves and replays", depot_fixture_solves_and_replays(&mut seen)),
        ("codesign never loses to a fixed design", codesign_never_loses_to_a_fixed_design(&mut seen)),
        ("slack never raises cost", slack_never_raises_cost(&mut seen)),
        ("peak weight trades peaks for total", peak_weight_trades_peaks_for_total(&mut seen)),
        ("slack rescues a single depot charger", slack_rescues_a_single_depot_charger(&mut seen)),
        ("single-thread sweeps repeat exactly", single_thread_sweeps_repeat_exactly()),
        ("scenarios round-trip and match schema", scenarios_round_trip_and_match_schema()),
    ];
    results.insert(2, ("demand charges are literal peaks", demand_charges_are_literal_peaks(&seen)));
    let mut failed = 0;
    for (i, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
