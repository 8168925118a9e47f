//! Full-factorial runs over peak weight, slack and design.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use chargeplan_milp::Status;
use serde::Serialize;

use crate::domain::{Design, ValidatedScenario};
use crate::error::{Error, Result};
use crate::io::write_json;
use crate::report::{average_daily_max, daily_average, smooth_daily};
use crate::solve::{solve_scenario, SolveOptions, SolveOutcome};

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub alphas: Vec<f64>,
    pub slack_minutes: Vec<u32>,
    pub designs: Vec<Design>,
    pub options: SolveOptions,
    /// Cells solved at once. Each solve is single-threaded.
    pub threads: usize,
    pub out_dir: PathBuf,
    /// Charger lifetime for the amortized cost columns.
    pub lifetime_years: f64,
}

impl SweepSpec {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        SweepSpec {
            alphas: vec![1.0],
            slack_minutes: vec![0],
            designs: vec![Design::CoDesign],
            options: SolveOptions::default(),
            threads: 1,
            out_dir: out_dir.into(),
            lifetime_years: 10.0,
        }
    }

    fn check(&self, vs: &ValidatedScenario) -> Result<()> {
        if self.alphas.is_empty() || self.slack_minutes.is_empty() || self.designs.is_empty() {
            return Err(Error::Config("sweep lists must not be empty".into()));
        }
        let b = vs.grid.block_minutes;
        if let Some(s) = self.slack_minutes.iter().find(|&&s| s % b != 0) {
            return Err(Error::Config(format!(
                "slack {s} min is not a multiple of the {b}-minute block"
            )));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::Config(format!("alpha {a} must be a nonnegative number")));
        }
        Ok(())
    }
}

/// Stable identifier of a cell, used as its file name.
pub fn cell_id(alpha: f64, slack_minutes: u32, design: &Design) -> String {
    format!("a{alpha}_s{slack_minutes}_{}", design.label())
}

#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    pub id: String,
    pub alpha: f64,
    pub slack_minutes: u32,
    pub design: String,
    pub status: Option<Status>,
    pub objective: Option<f64>,
    pub gap: Option<f64>,
    pub verified: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub cells: Vec<CellSummary>,
}

struct Cell {
    id: String,
    alpha: f64,
    slack_minutes: u32,
    design: Design,
}

/// Solves every cell and writes `cells/<id>.json`, `infrastructure.csv`,
/// `costs.csv`, `power_curves.csv` and `summary.json` under the output
/// directory. A failing cell is recorded and the sweep carries on.
pub fn run_sweep(vs: &ValidatedScenario, spec: &SweepSpec) -> Result<SweepSummary> {
    spec.check(vs)?;
    let cells_dir = spec.out_dir.join("cells");
    fs::create_dir_all(&cells_dir).map_err(|e| Error::io(&cells_dir, e))?;

    let mut cells = Vec::new();
    for &alpha in &spec.alphas {
        for &slack in &spec.slack_minutes {
            for design in &spec.designs {
                cells.push(Cell {
                    id: cell_id(alpha, slack, design),
                    alpha,
                    slack_minutes: slack,
                    design: design.clone(),
                });
            }
        }
    }

    let results: Mutex<Vec<Option<Result<SolveOutcome>>>> = Mutex::new((0..cells.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let solve_cell = |cell: &Cell| -> Result<SolveOutcome> {
        let cv = vs
            .with_alpha_slack(cell.alpha, cell.slack_minutes / vs.grid.block_minutes)
            .with_design(cell.design.clone());
        let outcome = solve_scenario(&cv, &spec.options)?;
        write_json(&cells_dir.join(format!("{}.json", cell.id)), &outcome)?;
        Ok(outcome)
    };
    std::thread::scope(|s| {
        for _ in 0..spec.threads.clamp(1, cells.len().max(1)) {
            s.spawn(|| loop {
                let n = next.fetch_add(1, Ordering::SeqCst);
                let Some(cell) = cells.get(n) else { break };
                log::info!("cell {}", cell.id);
                let r = solve_cell(cell);
                results.lock().expect("no worker panicked")[n] = Some(r);
            });
        }
    });
    let results: Vec<Result<SolveOutcome>> = results
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect();

    let mut summary = Vec::new();
    let mut infra = csv::Writer::from_path(spec.out_dir.join("infrastructure.csv"))?;
    infra.write_record(["cell", "location", "type", "count"])?;
    let mut costs = csv::Writer::from_path(spec.out_dir.join("costs.csv"))?;
    costs.write_record([
        "cell",
        "status",
        "energy",
        "infra",
        "peak",
        "total",
        "infra_amortized",
        "total_amortized",
    ])?;
    let mut curves = csv::Writer::from_path(spec.out_dir.join("power_curves.csv"))?;
    curves.write_record([
        "cell",
        "location",
        "block",
        "type",
        "kw_raw",
        "kw_smoothed",
        "avg_max_peak_kw",
        "installed_kw",
    ])?;

    let ratio = vs.grid.num_days as f64 / (spec.lifetime_years * 365.0);
    for (cell, result) in cells.iter().zip(results) {
        let mut row = CellSummary {
            id: cell.id.clone(),
            alpha: cell.alpha,
            slack_minutes: cell.slack_minutes,
            design: cell.design.label().to_string(),
            status: None,
            objective: None,
            gap: None,
            verified: false,
            error: None,
        };
        match result {
            Err(e) => row.error = Some(e.to_string()),
            Ok(outcome) => {
                row.status = Some(outcome.status);
                row.verified = outcome.verified();
                let status = status_label(&outcome.status);
                match (&outcome.report, &outcome.costs) {
                    (Some(report), Some(c)) => {
                        row.objective = Some(report.objective);
                        row.gap = Some(report.gap);
                        for cc in &report.charger_counts {
                            infra.write_record([
                                cell.id.as_str(),
                                &cc.location,
                                &cc.charger.to_string(),
                                &cc.count.to_string(),
                            ])?;
                        }
                        let capital: f64 = report
                            .charger_counts
                            .iter()
                            .map(|cc| {
                                let r = vs.charger_index(cc.charger).expect("catalog id");
                                vs.chargers[r].capital_cost * cc.count as f64
                            })
                            .sum();
                        let amortized = capital * ratio;
                        costs.write_record([
                            cell.id.clone(),
                            status.clone(),
                            c.energy.to_string(),
                            c.infrastructure.to_string(),
                            c.peak.to_string(),
                            c.total.to_string(),
                            amortized.to_string(),
                            (c.energy + c.peak + amortized).to_string(),
                        ])?;
                        write_curves(&mut curves, vs, &cell.id, report)?;
                    }
                    _ => {
                        costs.write_record([cell.id.as_str(), &status, "", "", "", "", "", ""])?;
                    }
                }
            }
        }
        summary.push(row);
    }
    infra.flush().map_err(|e| Error::io(spec.out_dir.join("infrastructure.csv"), e))?;
    costs.flush().map_err(|e| Error::io(spec.out_dir.join("costs.csv"), e))?;
    curves.flush().map_err(|e| Error::io(spec.out_dir.join("power_curves.csv"), e))?;
    let summary = SweepSummary { cells: summary };
    write_json(&spec.out_dir.join("summary.json"), &summary)?;
    Ok(summary)
}

fn status_label(s: &Status) -> String {
    match s {
        Status::Optimal => "optimal".into(),
        Status::Feasible { .. } => "feasible".into(),
        Status::Infeasible => "infeasible".into(),
        Status::Unbounded => "unbounded".into(),
        Status::LimitReached => "limit_reached".into(),
    }
}

fn write_curves(
    w: &mut csv::Writer<fs::File>,
    vs: &ValidatedScenario,
    cell: &str,
    report: &crate::plan::PlanReport,
) -> Result<()> {
    for loc in &vs.locations {
        let installed = report.installed_kw(vs, &loc.id);
        if installed == 0.0 {
            continue;
        }
        let avg = daily_average(vs, report, &loc.id);
        let max_peak = average_daily_max(vs, report, &loc.id);
        for (r, ch) in vs.chargers.iter().enumerate() {
            if report.count(&loc.id, ch.id) == 0 {
                continue;
            }
            let smooth = smooth_daily(&avg[r]);
            for (t, (raw, sm)) in avg[r].iter().zip(&smooth).enumerate() {
                w.write_record([
                    cell,
                    &loc.id,
                    &t.to_string(),
                    &ch.id.to_string(),
                    &raw.to_string(),
                    &sm.to_string(),
                    &max_peak.to_string(),
                    &installed.to_string(),
                ])?;
            }
        }
    }
    Ok(())
}

/// Reads a sweep's CSV outputs, for comparing runs.
pub fn read_outputs(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    ["infrastructure.csv", "costs.csv", "power_curves.csv"]
        .iter()
        .map(|name| {
            let p = dir.join(name);
            fs::read(&p).map(|b| (name.to_string(), b)).map_err(|e| Error::io(&p, e))
        })
        .collect()
}
