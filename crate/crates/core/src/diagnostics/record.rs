use serde::{Deserialize, Serialize};

use super::{active_sets, diameter, psi_lower_bound};
use crate::dynamics::Dynamics;
use crate::error::{FlockError, Result};
use crate::state::SwarmState;

/// How the active-set threshold is chosen at each sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum ThetaPolicy {
    Fixed(f64),
    /// `θ(t) = ψ(d_X(t))` from the certified influence lower bound; every
    /// agent is then in the global active set.
    Psi,
}

impl ThetaPolicy {
    pub fn theta<D: Dynamics + ?Sized>(&self, dynamics: &D, d_x: f64) -> Result<f64> {
        match *self {
            ThetaPolicy::Fixed(theta) => Ok(theta),
            ThetaPolicy::Psi => {
                let rule = dynamics.influence_rule().ok_or_else(|| {
                    FlockError::Unsupported("psi threshold needs a state-dependent influence rule".into())
                })?;
                Ok(psi_lower_bound(rule, dynamics.n(), d_x))
            }
        }
    }
}

/// One row of per-sample diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub d_x: f64,
    pub d_v: f64,
    pub d_beta: f64,
    pub theta: f64,
    /// Size of the global active set at `theta`.
    pub lambda_global: usize,
    /// `min_i α_i` (before any `1/ε` scaling).
    pub min_alpha: f64,
    /// `max_i ½‖v_i‖²`.
    pub energy: f64,
}

pub fn record<D: Dynamics + ?Sized>(state: &SwarmState, dynamics: &D, policy: ThetaPolicy) -> Result<DiagnosticsRecord> {
    let snap = dynamics.snapshot(state)?;
    let dim = state.dim();
    let (d_x, _) = diameter(state.positions(), dim);
    let (d_v, _) = diameter(state.velocities(), dim);
    let (d_beta, _) = diameter(&snap.beta, dim);
    let theta = policy.theta(dynamics, d_x)?;
    let lambda_global = active_sets(&snap.influence_matrix(), theta)?.lambda();
    Ok(DiagnosticsRecord {
        t: state.t,
        d_x,
        d_v,
        d_beta,
        theta,
        lambda_global,
        min_alpha: snap.alpha.iter().copied().fold(f64::INFINITY, f64::min),
        energy: state.max_kinetic_energy(),
    })
}
