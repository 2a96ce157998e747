//! CSV and JSON writers. Floats use Rust's shortest round-trip formatting,
//! so parsing a cell gives back the exact double that was written.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use flock_core::diagnostics::DiagnosticsRecord;
use flock_core::integrator::Trajectory;
use flock_core::reduced::{CompareRow, TransientTrajectory};
use serde::Serialize;

use crate::error::CliError;

pub fn num(x: f64) -> String {
    format!("{x}")
}

/// `t, x_i_k…, v_i_k…, d_X, d_V, d_beta, lambda_global, min_alpha, energy`
/// with agents `i` and components `k` counted from 0.
pub fn trajectory_header(n: usize, dim: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for prefix in ["x", "v"] {
        for i in 0..n {
            for k in 0..dim {
                h.push(format!("{prefix}_{i}_{k}"));
            }
        }
    }
    h.extend(["d_X", "d_V", "d_beta", "lambda_global", "min_alpha", "energy"].map(String::from));
    h
}

pub fn write_trajectory<W: Write>(w: W, traj: &Trajectory) -> Result<(), CliError> {
    let first = &traj.samples[0].state;
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(trajectory_header(first.n(), first.dim()))?;
    let mut row = Vec::new();
    for s in &traj.samples {
        let r: &DiagnosticsRecord = s
            .record
            .as_ref()
            .ok_or_else(|| CliError::Numerical("trajectory sample without diagnostics".into()))?;
        row.clear();
        row.push(num(s.state.t));
        row.extend(s.state.positions().iter().map(|&x| num(x)));
        row.extend(s.state.velocities().iter().map(|&x| num(x)));
        row.extend([num(r.d_x), num(r.d_v), num(r.d_beta), r.lambda_global.to_string(), num(r.min_alpha), num(r.energy)]);
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub const COMPARE_HEADER: [&str; 12] = [
    "eps",
    "t_skip",
    "velocity_error",
    "position_error",
    "velocity_ratio",
    "position_ratio",
    "full_steps",
    "full_rejected",
    "full_rhs_evals",
    "reduced_steps",
    "reduced_rejected",
    "reduced_rhs_evals",
];

/// One row per `ε`; the ratio columns hold `err(previous ε)/err(this ε)`
/// and are empty on the first row.
pub fn write_compare<W: Write>(w: W, rows: &[CompareRow]) -> Result<(), CliError> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(COMPARE_HEADER)?;
    for (j, r) in rows.iter().enumerate() {
        let ratio = |f: fn(&CompareRow) -> f64| j.checked_sub(1).map_or(String::new(), |p| num(f(&rows[p]) / f(r)));
        out.write_record([
            num(r.eps),
            num(r.t_skip),
            num(r.velocity_error),
            num(r.position_error),
            ratio(|r| r.velocity_error),
            ratio(|r| r.position_error),
            r.full_stats.steps.to_string(),
            r.full_stats.rejected.to_string(),
            r.full_stats.rhs_evals.to_string(),
            r.reduced_stats.steps.to_string(),
            r.reduced_stats.rejected.to_string(),
            r.reduced_stats.rhs_evals.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `tau, v_i_k…`.
pub fn transient_header(n: usize, dim: usize) -> Vec<String> {
    let mut h = vec!["tau".to_string()];
    for i in 0..n {
        for k in 0..dim {
            h.push(format!("v_{i}_{k}"));
        }
    }
    h
}

pub fn write_transient<W: Write>(w: W, traj: &TransientTrajectory) -> Result<(), CliError> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(transient_header(traj.n, traj.dim))?;
    for (tau, v) in traj.taus.iter().zip(&traj.velocities) {
        let row: Vec<String> = std::iter::once(num(*tau)).chain(v.iter().map(|&x| num(x))).collect();
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))
}
