//! CSV and JSON artifacts. Reals are written with 17 significant digits so
//! that identical runs produce identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use sdre::analysis::bound_partials;
use sdre::sim::TrajectoryRecord;

use crate::error::CliError;

pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const RESIDUAL_CSV: &str = "residual.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const BENCH_CSV: &str = "bench.csv";
pub const BENCH_JSON: &str = "bench.json";
pub const SDC_PROFILE_CSV: &str = "sdc_profile.csv";
pub const SDC_ROOT_JSON: &str = "sdc_root.json";
pub const SPECTRUM_CSV: &str = "spectrum.csv";
pub const OFFDIAG_CSV: &str = "offdiag.csv";
pub const SPECTRUM_JSON: &str = "spectrum.json";

pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_real(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

pub fn trajectory_header(d: usize, m: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=d).map(|i| format!("y_{i}")));
    h.extend((1..=m).map(|i| format!("u_{i}")));
    h.extend(["running_cost", "E", "nk_iters", "step_wall_s"].map(String::from));
    h
}

pub fn write_trajectory(path: &Path, rec: &TrajectoryRecord, d: usize, m: usize) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(trajectory_header(d, m))?;
    for k in 0..rec.len() {
        let mut row = Vec::with_capacity(d + m + 5);
        row.push(real(rec.times[k]));
        row.extend(rec.states[k].iter().map(|&v| real(v)));
        row.extend(rec.controls[k].iter().map(|&v| real(v)));
        row.push(real(rec.running_cost[k]));
        row.push(opt_real(rec.residuals[k]));
        row.push(rec.step_stats[k].iterations.to_string());
        row.push(real(rec.step_stats[k].wall_time));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Rows where the residual was evaluated: `t,E,phi_norm,bound_partial`.
pub fn write_residuals(path: &Path, rec: &TrajectoryRecord) -> Result<(), CliError> {
    let partial = bound_partials(rec);
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "E", "phi_norm", "bound_partial"])?;
    for (k, bound) in partial.into_iter().enumerate() {
        if let Some(e) = rec.residuals[k] {
            w.write_record([real(rec.times[k]), real(e), opt_real(rec.phi_norms[k]), opt_real(bound)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_pairs<I>(path: &Path, header: [&str; 2], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for (a, b) in rows {
        w.write_record([a, b])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}
