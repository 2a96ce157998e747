//! The initial layer in stretched time `τ = t/ε`: positions are frozen and
//! velocities relax toward a common flock velocity.

use serde::{Deserialize, Serialize};

use super::{rate_matrix, rate_spectrum, stochastic_matrix};
use crate::diagnostics::diameter;
use crate::dynamics::gain_vector;
use crate::error::{FlockError, Result};
use crate::influence::mean_into;
use crate::integrator::{solve, IntegratorConfig, IntegratorStats, OdeSystem};
use crate::model::{GainRule, ModelConfig, PerAgent};
use crate::state::SwarmState;

/// Which gains drive the layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransientGains {
    /// `V' = diag(ξ(0))(P − I)V = QV`; linear, conserves `Σπ_iV_i`, and its
    /// limit is exactly the `π`-weighted mean of the initial velocities.
    FrozenAtZero,
    /// `V_i' = ξ_i(V̄_i − V_i)(V̄_i − V_i)`; coincides with the frozen system
    /// for constant gains.
    StateDependent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientTrajectory {
    pub n: usize,
    pub dim: usize,
    pub taus: Vec<f64>,
    /// Row-major `N × d` velocities per sample.
    pub velocities: Vec<Vec<f64>>,
    pub stats: IntegratorStats,
}

impl TransientTrajectory {
    pub fn last(&self) -> &[f64] {
        self.velocities.last().expect("transient holds the initial sample")
    }

    /// Mean of the final velocities, the numerical limit of the layer.
    pub fn limit(&self) -> Vec<f64> {
        let last = self.last();
        let mut out = vec![0.0; self.dim];
        for v in last.chunks(self.dim) {
            for k in 0..self.dim {
                out[k] += v[k] / self.n as f64;
            }
        }
        out
    }

    /// Final velocity diameter.
    pub fn final_spread(&self) -> f64 {
        diameter(self.last(), self.dim).0
    }

    /// `Σ_i w_i V_i(τ)` at every sample.
    pub fn weighted_means(&self, weights: &[f64]) -> Vec<Vec<f64>> {
        self.velocities
            .iter()
            .map(|v| {
                let mut out = vec![0.0; self.dim];
                for (i, w) in weights.iter().enumerate() {
                    for k in 0..self.dim {
                        out[k] += w * v[i * self.dim + k];
                    }
                }
                out
            })
            .collect()
    }
}

struct TransientSystem<'a> {
    n: usize,
    dim: usize,
    p: Vec<f64>,
    gain: &'a PerAgent<GainRule>,
    frozen: Option<Vec<f64>>,
    vbar: Vec<f64>,
}

impl OdeSystem for TransientSystem<'_> {
    fn len(&self) -> usize {
        self.n * self.dim
    }

    fn rhs(&mut self, _tau: f64, v: &[f64], dv: &mut [f64]) -> Result<()> {
        let dim = self.dim;
        mean_into(&self.p, v, self.n, dim, &mut self.vbar);
        let alpha = match &self.frozen {
            Some(a) => a.clone(),
            None => gain_vector(&self.vbar, v, dim, self.gain)?,
        };
        for i in 0..self.n {
            for k in 0..dim {
                let m = i * dim + k;
                dv[m] = alpha[i] * (self.vbar[m] - v[m]);
            }
        }
        Ok(())
    }
}

/// Default τ-integration: rk45 at tight tolerances, samples every 0.1.
pub fn transient_integrator(tau_end: f64) -> IntegratorConfig {
    IntegratorConfig::rk45(0.01, tau_end).with_sample_every(10).with_tolerances(1e-12, 1e-14)
}

pub fn simulate_transient(
    initial: &SwarmState,
    cfg: &ModelConfig,
    tau_end: f64,
    gains: TransientGains,
) -> Result<TransientTrajectory> {
    simulate_transient_with(initial, cfg, gains, &transient_integrator(tau_end))
}

/// Integrates the layer from `initial` (its `t` is ignored; `τ` starts at 0
/// and ends at `icfg.t_end`).
pub fn simulate_transient_with(
    initial: &SwarmState,
    cfg: &ModelConfig,
    gains: TransientGains,
    icfg: &IntegratorConfig,
) -> Result<TransientTrajectory> {
    cfg.validate()?;
    let (n, dim) = (initial.n(), initial.dim());
    if n != cfg.n || dim != cfg.dim {
        return Err(FlockError::Dimension("initial state does not match the model".into()));
    }
    let p = stochastic_matrix(initial.positions(), dim, &cfg.influence)?;
    let frozen = match gains {
        TransientGains::FrozenAtZero => Some(cfg.gains_at_zero()),
        TransientGains::StateDependent => None,
    };
    let mut sys = TransientSystem {
        n,
        dim,
        p: p.as_slice().to_vec(),
        gain: &cfg.gain,
        frozen,
        vbar: vec![0.0; n * dim],
    };
    let mut taus = Vec::new();
    let mut velocities = Vec::new();
    let stats = solve(&mut sys, 0.0, initial.velocities(), icfg, |tau, v| {
        taus.push(tau);
        velocities.push(v.to_vec());
        Ok(())
    })?;
    Ok(TransientTrajectory { n, dim, taus, velocities, stats })
}

/// Runs the layer until the velocity diameter falls below
/// `1e-12·(1 + max‖v_i(0)‖)`, doubling the horizon from 50 up to
/// `max(12800, 64/γ)`, with `γ` the spectral gap of the rate matrix.
/// Each attempt keeps 10⁴ samples whatever its horizon.
pub fn transient_limit(initial: &SwarmState, cfg: &ModelConfig, gains: TransientGains) -> Result<Vec<f64>> {
    let scale = 1.0 + initial.velocities().chunks(initial.dim()).map(crate::state::norm).fold(0.0, f64::max);
    let p = stochastic_matrix(initial.positions(), initial.dim(), &cfg.influence)?;
    let gap = rate_spectrum(&rate_matrix(&p, &cfg.gains_at_zero())?).get(1).map_or(0.0, |z| -z.re);
    let cap = if gap > 0.0 { (64.0 / gap).max(12800.0) } else { 12800.0 };
    let mut tau_end = 50.0;
    loop {
        let icfg = IntegratorConfig::rk45(tau_end / 1e4, tau_end).with_tolerances(1e-12, 1e-14);
        let traj = simulate_transient_with(initial, cfg, gains, &icfg)?;
        if traj.final_spread() <= 1e-12 * scale || tau_end >= cap {
            return Ok(traj.limit());
        }
        tau_end *= 2.0;
    }
}
