use std::path::{Path, PathBuf};
use std::time::Instant;

use flock_core::diagnostics::{
    diameter, flocking_certificate, monitor_contraction, record, ContractionReport, DiagnosticsRecord,
    FlockingCertificate, SteeringBound,
};
use flock_core::integrator::IntegratorStats;
use flock_core::reduced::{
    compare_full_reduced, initial_flock_velocity, rate_matrix, simulate_transient, stationary_distribution,
    stochastic_matrix, CompareOptions, CompareRow, TransientGains,
};
use flock_core::{integrate, Method, ModelConfig, SwarmState, Trajectory};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output;
use crate::presets;

/// Where the experiment description comes from.
#[derive(Debug, Clone)]
pub enum Source {
    File(PathBuf),
    Preset(String),
}

impl Source {
    pub fn load(&self) -> Result<ExperimentConfig, CliError> {
        match self {
            Source::File(p) => ExperimentConfig::load(p),
            Source::Preset(name) => {
                let text = presets::preset(name).ok_or_else(|| {
                    CliError::Config(format!("unknown preset {name:?}; available: {}", presets::names().join(", ")))
                })?;
                ExperimentConfig::parse(text)
            }
        }
    }
}

/// Per-invocation overrides shared by all subcommands.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub eps: Option<f64>,
}

pub struct Setup {
    pub initial: SwarmState,
    pub model: ModelConfig,
}

pub fn setup(exp: &ExperimentConfig, ov: &Overrides) -> Result<Setup, CliError> {
    if let Some(e) = ov.eps {
        if !(e > 0.0 && e.is_finite()) {
            return Err(CliError::Config(format!("--eps must be positive, got {e}")));
        }
    }
    let initial = exp.initial_state(ov.seed)?;
    let model = exp.model(initial.n(), initial.dim(), ov.eps)?;
    Ok(Setup { initial, model })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub name: Option<String>,
    pub n: usize,
    pub dim: usize,
    pub eps: f64,
    pub method: Method,
    pub dt: f64,
    pub t_end: f64,
    pub samples: usize,
    pub initial: DiagnosticsRecord,
    #[serde(rename = "final")]
    pub last: DiagnosticsRecord,
    pub max_d_x: f64,
    /// Largest `d_V` over the second half of the horizon.
    pub max_d_v_second_half: f64,
    pub centroid_final: Vec<f64>,
    pub certificate: Option<FlockingCertificate>,
    pub monitor: Option<ContractionReport>,
    pub stats: IntegratorStats,
    pub wall_time_s: f64,
}

/// Integrates the configured system with a diagnostics record per sample.
pub fn simulate(exp: &ExperimentConfig, s: &Setup) -> Result<Trajectory, CliError> {
    let icfg = exp.integrator(s.model.eps)?;
    let policy = exp.theta_policy()?;
    Ok(integrate(&s.initial, &s.model, &icfg, |st| record(st, &s.model, policy).map(Some))?)
}

pub fn certificate(exp: &ExperimentConfig, s: &Setup) -> Result<FlockingCertificate, CliError> {
    let bound = exp
        .steering_bound(&s.model)
        .unwrap_or(SteeringBound { integral: f64::INFINITY, decays: false });
    Ok(flocking_certificate(&s.initial, &s.model, bound)?)
}

/// `run`: writes `trajectory.csv` and `summary.json` into `out`.
pub fn run(exp: &ExperimentConfig, ov: &Overrides, out: &Path) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let s = setup(exp, ov)?;
    let icfg = exp.integrator(s.model.eps)?;
    let traj = simulate(exp, &s)?;
    output::write_trajectory(output::create(&out.join("trajectory.csv"))?, &traj)?;

    let records: Vec<&DiagnosticsRecord> = traj.samples.iter().filter_map(|x| x.record.as_ref()).collect();
    let t0 = s.initial.t;
    let half = t0 + 0.5 * (traj.last().t - t0);
    let monitor = if exp.diagnostics.monitor {
        Some(monitor_contraction(&traj, &s.model, exp.theta_policy()?)?)
    } else {
        None
    };
    let summary = RunSummary {
        name: exp.name.clone(),
        n: s.initial.n(),
        dim: s.initial.dim(),
        eps: s.model.eps,
        method: icfg.method,
        dt: icfg.dt,
        t_end: icfg.t_end,
        samples: traj.samples.len(),
        initial: *records[0],
        last: **records.last().expect("at least one sample"),
        max_d_x: records.iter().map(|r| r.d_x).fold(0.0, f64::max),
        max_d_v_second_half: records.iter().filter(|r| r.t >= half).map(|r| r.d_v).fold(0.0, f64::max),
        centroid_final: traj.last().centroid(),
        certificate: exp.certificate.as_ref().map(|_| certificate(exp, &s)).transpose()?,
        monitor,
        stats: traj.stats,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    output::write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// `certify`: writes `certificate.json`.
pub fn certify(exp: &ExperimentConfig, ov: &Overrides, out: &Path) -> Result<FlockingCertificate, CliError> {
    let s = setup(exp, ov)?;
    let cert = certificate(exp, &s)?;
    output::write_json(&out.join("certificate.json"), &cert)?;
    Ok(cert)
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub options: CompareOptions,
    pub rows: Vec<CompareRow>,
}

/// `compare`: writes `compare.csv` and `compare.json`.
pub fn compare(
    exp: &ExperimentConfig,
    ov: &Overrides,
    eps_list: Option<Vec<f64>>,
    out: &Path,
) -> Result<CompareReport, CliError> {
    let s = setup(exp, ov)?;
    let eps = eps_list.unwrap_or_else(|| exp.compare.eps.clone());
    let options = exp.compare_options();
    let rows = compare_full_reduced(&s.initial, &s.model, &eps, &options)?;
    output::write_compare(output::create(&out.join("compare.csv"))?, &rows)?;
    let report = CompareReport { options, rows };
    output::write_json(&out.join("compare.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct TransientReport {
    pub gains: TransientGains,
    pub tau_end: f64,
    pub pi: Vec<f64>,
    /// `π`-weighted mean of the initial velocities.
    pub formula: Vec<f64>,
    /// Mean velocity at `tau_end`.
    pub simulated_limit: Vec<f64>,
    /// Largest component of `|formula − simulated_limit|`.
    pub gap: f64,
    /// Velocity diameter at `tau_end`.
    pub final_spread: f64,
    pub stats: IntegratorStats,
}

/// `transient`: writes `transient.csv` and `transient.json`.
pub fn transient(
    exp: &ExperimentConfig,
    ov: &Overrides,
    tau_end: Option<f64>,
    out: &Path,
) -> Result<TransientReport, CliError> {
    let s = setup(exp, ov)?;
    let tau_end = tau_end.unwrap_or(exp.transient.tau_end);
    if !(tau_end > 0.0 && tau_end.is_finite()) {
        return Err(CliError::Config(format!("tau_end must be positive, got {tau_end}")));
    }
    let dim = s.initial.dim();
    let p = stochastic_matrix(s.initial.positions(), dim, &s.model.influence)?;
    let w = stationary_distribution(&rate_matrix(&p, &s.model.gains_at_zero())?)?;
    let formula = initial_flock_velocity(s.initial.velocities(), dim, &w)?;
    let traj = simulate_transient(&s.initial, &s.model, tau_end, exp.transient.gains)?;
    output::write_transient(output::create(&out.join("transient.csv"))?, &traj)?;
    let limit = traj.limit();
    let report = TransientReport {
        gains: exp.transient.gains,
        tau_end,
        gap: formula.iter().zip(&limit).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
        final_spread: diameter(traj.last(), dim).0,
        pi: w.pi,
        formula,
        simulated_limit: limit,
        stats: traj.stats,
    };
    output::write_json(&out.join("transient.json"), &report)?;
    Ok(report)
}
