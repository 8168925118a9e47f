//! Tabular outputs.

use std::io::Write;

use crate::domain::ValidatedScenario;
use crate::error::Result;
use crate::plan::PlanReport;

/// Per-block power of one plan: `location, day, block, kw_<type>..., kw_total`.
pub fn write_power_csv(vs: &ValidatedScenario, report: &PlanReport, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["location".to_string(), "day".into(), "block".into()];
    header.extend(vs.chargers.iter().map(|c| format!("kw_{}", c.id)));
    header.push("kw_total".into());
    w.write_record(&header)?;
    for row in &report.power {
        let mut rec = vec![row.location.clone(), row.day.to_string(), row.block.to_string()];
        rec.extend(row.kw_by_type.iter().map(|v| v.to_string()));
        rec.push(row.kw_total.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| csv::Error::from(e))?;
    Ok(())
}

/// Centered moving average over 4 blocks (two before, the block itself and
/// one after), wrapping around the day.
pub fn smooth_daily(curve: &[f64]) -> Vec<f64> {
    let n = curve.len() as isize;
    (0..n)
        .map(|t| (-2..=1).map(|d| curve[(t + d).rem_euclid(n) as usize]).sum::<f64>() / 4.0)
        .collect()
}

/// Draw per charger type at `location`, averaged over days, indexed
/// `[type][block of day]`.
pub fn daily_average(vs: &ValidatedScenario, report: &PlanReport, location: &str) -> Vec<Vec<f64>> {
    let bpd = vs.grid.blocks_per_day as usize;
    let days = vs.grid.num_days as f64;
    let mut avg = vec![vec![0.0; bpd]; vs.chargers.len()];
    for row in report.power.iter().filter(|r| r.location == location) {
        for (r, kw) in row.kw_by_type.iter().enumerate() {
            avg[r][row.block as usize] += kw / days;
        }
    }
    avg
}

/// Mean over days of each day's maximum total draw at `location`.
pub fn average_daily_max(vs: &ValidatedScenario, report: &PlanReport, location: &str) -> f64 {
    let mut max = vec![0.0f64; vs.grid.num_days as usize];
    for row in report.power.iter().filter(|r| r.location == location) {
        let m = &mut max[row.day as usize];
        *m = m.max(row.kw_total);
    }
    max.iter().sum::<f64>() / max.len() as f64
}
