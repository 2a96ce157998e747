use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    initial_flock_velocity, integrate_reduced, rate_matrix, stationary_distribution, stochastic_matrix,
    transient_limit, ReducedState, TransientGains,
};
use crate::error::{FlockError, Result};
use crate::integrator::{solve, IntegratorConfig, IntegratorStats, Method, SwarmSystem};
use crate::model::ModelConfig;
use crate::state::{dist, SwarmState};

/// Initial flock velocity handed to the reduced model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReducedInit {
    /// Limit of the state-dependent transient layer, which is where the
    /// full model actually leaves the layer.
    TransientLimit,
    /// `π`-weighted mean of the initial velocities.
    Formula,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    pub t_end: f64,
    /// Start of the measured window; `None` uses [`default_t_skip`].
    pub t_skip: Option<f64>,
    /// Spacing of the common sample grid.
    pub sample_spacing: f64,
    pub init: ReducedInit,
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            t_end: 200.0,
            t_skip: None,
            sample_spacing: 1e-2,
            init: ReducedInit::TransientLimit,
            method: Method::Rk45,
            rtol: 1e-8,
            atol: 1e-10,
        }
    }
}

/// `10·ε·max(|ln ε|, 1)`: ten layer widths, kept positive at `ε = 1`.
pub fn default_t_skip(eps: f64) -> f64 {
    10.0 * eps * eps.ln().abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub eps: f64,
    pub t_skip: f64,
    /// `sup_t max_i ‖v_i(t) − v^f(t)‖` over `[t_skip, t_end]`.
    pub velocity_error: f64,
    /// `sup_t max_i ‖x_i(t) − x0_i(t)‖` over `[t_skip, t_end]`.
    pub position_error: f64,
    pub vf0: Vec<f64>,
    pub full_stats: IntegratorStats,
    pub reduced_stats: IntegratorStats,
}

/// Integrates the full model for every `ε` and the reduced model once,
/// and reports the sup deviations past the initial layer. Rows follow
/// `eps_list` order; members run in parallel.
pub fn compare_full_reduced(
    initial: &SwarmState,
    cfg: &ModelConfig,
    eps_list: &[f64],
    opts: &CompareOptions,
) -> Result<Vec<CompareRow>> {
    cfg.validate()?;
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(FlockError::Domain("eps list must hold positive values".into()));
    }
    let (n, dim) = (initial.n(), initial.dim());
    if n != cfg.n || dim != cfg.dim {
        return Err(FlockError::Dimension("initial state does not match the model".into()));
    }
    let p = stochastic_matrix(initial.positions(), dim, &cfg.influence)?;
    let weights = stationary_distribution(&rate_matrix(&p, &cfg.gains_at_zero())?)?;
    let vf0 = match opts.init {
        ReducedInit::Formula => initial_flock_velocity(initial.velocities(), dim, &weights)?,
        ReducedInit::TransientLimit => transient_limit(initial, cfg, TransientGains::StateDependent)?,
    };

    let grid = |dt: f64| IntegratorConfig {
        method: opts.method,
        dt,
        rtol: opts.rtol,
        atol: opts.atol,
        t_end: initial.t + opts.t_end,
        sample_every: 1,
        dt_min: 1e-12,
    };
    let reduced0 = ReducedState::new(initial.t, dim, initial.positions().to_vec(), vf0.clone())?;
    let reduced = integrate_reduced(
        &reduced0,
        &cfg.steering,
        &cfg.friction,
        &weights,
        &IntegratorConfig { method: Method::Rk45, ..grid(opts.sample_spacing) },
    )?;

    eps_list
        .par_iter()
        .map(|&eps| {
            let model = cfg.clone().with_eps(eps);
            let t_skip = opts.t_skip.unwrap_or_else(|| default_t_skip(eps));
            let icfg = match opts.method {
                Method::Rk45 => grid(opts.sample_spacing),
                Method::Rk4 => {
                    let dt = crate::integrator::default_dt(eps).min(opts.sample_spacing);
                    let every = (opts.sample_spacing / dt).round().max(1.0) as usize;
                    IntegratorConfig { dt: opts.sample_spacing / every as f64, sample_every: every, ..grid(dt) }
                }
            };
            let mut sys = SwarmSystem::new(&model);
            let mut k = 0usize;
            let (mut verr, mut perr) = (0.0f64, 0.0f64);
            let full_stats = solve(&mut sys, initial.t, &initial.pack(), &icfg, |t, y| {
                let r = reduced
                    .samples
                    .get(k)
                    .filter(|r| (r.t - t).abs() <= 1e-9 * t.abs().max(1.0))
                    .ok_or_else(|| FlockError::Sampling(format!("full and reduced grids diverge at t = {t}")))?;
                k += 1;
                if t - initial.t >= t_skip {
                    let (x, v) = y.split_at(n * dim);
                    for i in 0..n {
                        let s = i * dim..(i + 1) * dim;
                        verr = verr.max(dist(&v[s.clone()], &r.vf));
                        perr = perr.max(dist(&x[s.clone()], &r.x0[s]));
                    }
                }
                Ok(())
            })
            .map_err(|e| match e {
                FlockError::BlowUp { last_valid_t } if opts.method == Method::Rk4 => FlockError::Unsupported(format!(
                    "rk4 blew up at t = {last_valid_t} for eps = {eps}; use the adaptive method"
                )),
                other => other,
            })?;
            Ok(CompareRow {
                eps,
                t_skip,
                velocity_error: verr,
                position_error: perr,
                vf0: vf0.clone(),
                full_stats,
                reduced_stats: reduced.stats,
            })
        })
        .collect()
}
