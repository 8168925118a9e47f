//! Command-line front end.
//!
//! Exit codes: 0 success, 1 infeasible or violations found, 2 usage or
//! configuration error, 3 solver limit hit. Failures are also reported as a
//! JSON object on stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use chargeplan::milp::Status;
use chargeplan::sweep::{run_sweep, SweepSpec};
use chargeplan::synth::{generate_synthetic, SynthParams};
use chargeplan::{
    compare_designs, io, prepare, replay, rule_based_design, solve_scenario, Design,
    Error, FixedCounts, PlanReport, Policy, Scenario, SolveOptions, ValidatedScenario,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "chargeplan", version, about = "Size chargers and schedule charging for electric truck fleets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario, and optionally replay a plan against it.
    Validate {
        #[command(flatten)]
        input: Input,
        /// Plan report or solve outcome JSON to replay.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Solve one scenario and write the verified plan.
    Solve {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long = "slack-min")]
        slack_min: Option<i64>,
        #[command(flatten)]
        design: DesignArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-block power curve CSV.
        #[arg(long = "power-csv")]
        power_csv: Option<PathBuf>,
        /// Also write the model in LP format.
        #[arg(long = "dump-lp")]
        dump_lp: Option<PathBuf>,
    },
    /// Solve every combination of peak weight, slack and design.
    Sweep {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        alpha: Vec<f64>,
        #[arg(long = "slack-min", value_delimiter = ',', default_value = "0")]
        slack_min: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "codesign")]
        design: Vec<DesignKind>,
        #[arg(long = "fixed-file")]
        fixed_file: Option<PathBuf>,
        #[arg(long)]
        policy: Option<Policy>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Cells solved in parallel.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Charger lifetime for the amortized cost columns.
        #[arg(long = "lifetime-years", default_value_t = 10.0)]
        lifetime_years: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare co-design against a fixed design.
    Compare {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long = "slack-min")]
        slack_min: Option<i64>,
        #[arg(long = "fixed-file", conflicts_with = "policy", required_unless_present = "policy")]
        fixed_file: Option<PathBuf>,
        #[arg(long)]
        policy: Option<Policy>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic depot scenario.
    Generate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        trucks: usize,
        #[arg(long, default_value_t = 5)]
        locations: usize,
        #[arg(long, default_value_t = 2)]
        days: u32,
        #[arg(long, default_value_t = 0.3)]
        tightness: f64,
        #[arg(long = "tau-min", default_value_t = 15)]
        tau_min: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    #[arg(long)]
    scenario: PathBuf,
    /// Block length in minutes, replacing the scenario's.
    #[arg(long = "tau-min")]
    tau_min: Option<u32>,
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long, value_enum)]
    design: Option<DesignKind>,
    /// Explicit charger counts: location → charger type → count.
    #[arg(long = "fixed-file")]
    fixed_file: Option<PathBuf>,
    /// `main-depot-only:N:TYPE` or `peak-demand-cover:TYPE`.
    #[arg(long)]
    policy: Option<Policy>,
}

#[derive(Args)]
struct SolverArgs {
    /// Relative optimality gap.
    #[arg(long, default_value_t = 0.01)]
    gap: f64,
    /// Seconds.
    #[arg(long = "time-limit")]
    time_limit: Option<f64>,
    #[arg(long = "node-limit")]
    node_limit: Option<u64>,
}

impl SolverArgs {
    fn options(&self) -> Result<SolveOptions, Failure> {
        if !(self.gap >= 0.0 && self.gap.is_finite()) {
            return Err(Failure::usage(format!("--gap {} must be a nonnegative number", self.gap)));
        }
        let time_limit = match self.time_limit {
            Some(s) if s.is_finite() && s >= 0.0 => Some(Duration::from_secs_f64(s)),
            Some(s) => return Err(Failure::usage(format!("--time-limit {s} must be a nonnegative number"))),
            None => None,
        };
        Ok(SolveOptions {
            gap: self.gap,
            node_limit: self.node_limit,
            time_limit,
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DesignKind {
    Codesign,
    Fixed,
}

struct Failure {
    code: u8,
    report: Value,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            report: json!({ "error": "usage", "message": message.into() }),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let report = match &e {
            Error::Invalid(errors) => json!({ "error": "invalid_scenario", "message": e.to_string(), "violations": errors }),
            Error::Solver(_) => json!({ "error": "solver", "message": e.to_string() }),
            _ => json!({ "error": "config", "message": e.to_string() }),
        };
        Failure { code: 2, report }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", serde_json::to_string_pretty(&f.report).expect("plain JSON"));
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Validate { input, plan } => validate(&input, plan.as_deref()),
        Command::Solve {
            input,
            alpha,
            slack_min,
            design,
            solver,
            out,
            power_csv,
            dump_lp,
        } => {
            let vs = load(&input, alpha, slack_min)?;
            let vs = match resolve_design(&vs, &design)? {
                Some(d) => vs.with_design(d),
                None => vs,
            };
            if let Some(path) = &dump_lp {
                let mut f = fs::File::create(path).map_err(|e| io_failure(path, e))?;
                chargeplan::dump_lp(&vs, &mut f).map_err(|e| io_failure(path, e))?;
            }
            solve(&vs, &solver.options()?, out.as_deref(), power_csv.as_deref())
        }
        Command::Sweep {
            input,
            alpha,
            slack_min,
            design,
            fixed_file,
            policy,
            solver,
            threads,
            lifetime_years,
            out,
        } => {
            let vs = load(&input, None, None)?;
            let mut designs = Vec::new();
            for kind in dedup(design) {
                designs.push(match kind {
                    DesignKind::Codesign => Design::CoDesign,
                    DesignKind::Fixed => {
                        let args = DesignArgs {
                            design: Some(DesignKind::Fixed),
                            fixed_file: fixed_file.clone(),
                            policy: policy.clone(),
                        };
                        resolve_design(&vs, &args)?.expect("fixed design requested")
                    }
                });
            }
            let spec = SweepSpec {
                alphas: alpha,
                slack_minutes: slack_min,
                designs,
                options: solver.options()?,
                threads,
                out_dir: out.clone(),
                lifetime_years,
            };
            let summary = run_sweep(&vs, &spec)?;
            let failed = summary.cells.iter().filter(|c| c.error.is_some()).count();
            println!(
                "{}",
                json!({ "cells": summary.cells.len(), "verified": summary.cells.iter().filter(|c| c.verified).count(), "errors": failed, "out": out })
            );
            Ok(0)
        }
        Command::Compare {
            input,
            alpha,
            slack_min,
            fixed_file,
            policy,
            solver,
            out,
        } => {
            let vs = load(&input, alpha, slack_min)?;
            let args = DesignArgs {
                design: Some(DesignKind::Fixed),
                fixed_file,
                policy,
            };
            let Some(Design::Fixed(counts)) = resolve_design(&vs, &args)? else {
                unreachable!("fixed design requested")
            };
            let cmp = compare_designs(&vs, &counts, &solver.options()?)?;
            emit(out.as_deref(), &io::to_json_string(&cmp))?;
            let limited = |s: &Status| matches!(s, Status::Feasible { .. } | Status::LimitReached);
            Ok(if limited(&cmp.codesign.status) || limited(&cmp.fixed.status) { 3 } else { 0 })
        }
        Command::Generate {
            seed,
            trucks,
            locations,
            days,
            tightness,
            tau_min,
            out,
        } => {
            if trucks == 0 || locations < 2 || days == 0 || !(0.0..=1.0).contains(&tightness) {
                return Err(Failure::usage(
                    "need at least 1 truck, 2 locations and 1 day, and tightness in [0, 1]",
                ));
            }
            if tau_min == 0 || 1440 % tau_min != 0 {
                return Err(Failure::usage(format!("--tau-min {tau_min} must divide a day")));
            }
            let s = generate_synthetic(&SynthParams {
                seed,
                trucks,
                locations,
                days,
                tightness,
                block_minutes: tau_min,
                ..Default::default()
            });
            emit(out.as_deref(), &io::to_json_string(&s))?;
            Ok(0)
        }
    }
}

fn dedup(kinds: Vec<DesignKind>) -> Vec<DesignKind> {
    let mut out = Vec::new();
    for k in kinds {
        if !out.contains(&k) {
            out.push(k);
        }
    }
    out
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 2,
        report: json!({ "error": "io", "message": format!("{}: {e}", path.display()) }),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
            }
            fs::write(path, text).map_err(|e| io_failure(path, e))
        }
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| io_failure(Path::new("-"), e)),
    }
}

fn read_scenario(input: &Input) -> Result<Scenario, Failure> {
    let mut s = io::read_scenario(&input.scenario)?;
    if let Some(tau) = input.tau_min {
        s.time_grid.block_minutes = tau;
    }
    Ok(s)
}

fn load(input: &Input, alpha: Option<f64>, slack_min: Option<i64>) -> Result<ValidatedScenario, Failure> {
    let mut s = read_scenario(input)?;
    if let Some(a) = alpha {
        s.params.alpha = a;
    }
    if let Some(m) = slack_min {
        s.params.slack_minutes = m;
    }
    Ok(prepare(&s)?)
}

/// The design asked for on the command line, or `None` to keep the
/// scenario's own.
fn resolve_design(vs: &ValidatedScenario, args: &DesignArgs) -> Result<Option<Design>, Failure> {
    let wants_fixed = args.fixed_file.is_some() || args.policy.is_some();
    match args.design {
        None if !wants_fixed => return Ok(None),
        Some(DesignKind::Codesign) if wants_fixed => {
            return Err(Failure::usage("--fixed-file and --policy need --design fixed"));
        }
        Some(DesignKind::Codesign) => return Ok(Some(Design::CoDesign)),
        _ => {}
    }
    let counts: FixedCounts = match (&args.fixed_file, &args.policy) {
        (Some(_), Some(_)) => return Err(Failure::usage("give either --fixed-file or --policy, not both")),
        (Some(path), None) => {
            let spec = io::read_fixed_counts(path)?;
            vs.counts_from_spec(&spec).map_err(Error::Invalid)?
        }
        (None, Some(policy)) => rule_based_design(vs, policy).map_err(Error::Invalid)?,
        (None, None) => match &vs.design {
            Design::Fixed(c) => c.clone(),
            Design::CoDesign => {
                return Err(Failure::usage(
                    "--design fixed needs --fixed-file, --policy or fixed counts in the scenario",
                ))
            }
        },
    };
    Ok(Some(Design::Fixed(counts)))
}

fn solve(vs: &ValidatedScenario, options: &SolveOptions, out: Option<&Path>, power_csv: Option<&Path>) -> Result<u8, Failure> {
    let outcome = solve_scenario(vs, options)?;
    if let Some(r) = &outcome.replay {
        if !r.is_clean() {
            return Err(Failure {
                code: 1,
                report: json!({
                    "error": "unverified_plan",
                    "message": "the solver's plan failed replay and was not written",
                    "violations": r.violations,
                }),
            });
        }
    }
    emit(out, &io::to_json_string(&outcome))?;
    if let (Some(path), Some(report)) = (power_csv, &outcome.report) {
        let f = fs::File::create(path).map_err(|e| io_failure(path, e))?;
        chargeplan::report::write_power_csv(vs, report, f)?;
    }
    Ok(match outcome.status {
        Status::Optimal => 0,
        Status::Feasible { .. } | Status::LimitReached => 3,
        Status::Infeasible | Status::Unbounded => {
            eprintln!(
                "{}",
                json!({ "error": "infeasible", "message": format!("no plan: {:?}", outcome.status), "diagnostics": outcome.diagnostics })
            );
            1
        }
    })
}

fn validate(input: &Input, plan: Option<&Path>) -> Result<u8, Failure> {
    let s = read_scenario(input)?;
    let vs = match prepare(&s) {
        Ok(vs) => vs,
        Err(Error::Invalid(errors)) => {
            return Err(Failure {
                code: 1,
                report: json!({ "error": "invalid_scenario", "message": format!("{} problem(s) found", errors.len()), "violations": errors }),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let Some(path) = plan else {
        println!(
            "{}",
            json!({ "valid": true, "trucks": vs.trucks.len(), "legs": vs.legs.len(), "locations": vs.locations.len(), "blocks": vs.grid.num_blocks() })
        );
        return Ok(0);
    };
    let value: Value = io::read_json(path)?;
    // Accept a bare plan report or a solve outcome wrapping one.
    let inner = value.get("report").cloned().unwrap_or(value);
    let report: PlanReport = serde_json::from_value(inner)
        .map_err(|e| Failure::usage(format!("{}: not a plan report: {e}", path.display())))?;
    let vs = vs.with_alpha_slack(report.alpha, report.slack_blocks);
    let verdict = replay(&vs, &report);
    if verdict.is_clean() {
        println!("{}", serde_json::to_string_pretty(&verdict).expect("plain JSON"));
        Ok(0)
    } else {
        Err(Failure {
            code: 1,
            report: json!({ "error": "violations", "message": format!("{} violation(s)", verdict.violations.len()), "violations": verdict.violations }),
        })
    }
}
