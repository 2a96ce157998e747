//! Right-hand sides of the open- and closed-loop flocking systems.
//!
//! Both variants share the form
//! `ẋ_i = v_i`, `v̇_i = s·α_i(v̄_i − v_i) + β_i − c_i‖v_i‖^r v_i`
//! where `s = 1/ε` for the closed loop and `s = 1` for the open loop.

use std::sync::Arc;

use crate::error::{ensure_finite, FlockError, Result};
use crate::influence::{fill_influence, mean_into, InfluenceMatrix};
use crate::model::{FrictionRule, GainRule, InfluenceRule, ModelConfig, PerAgent, SteeringRule};
use crate::state::SwarmState;

/// Everything entering `v̇` at one instant.
#[derive(Debug, Clone, Default)]
pub struct LoopSnapshot {
    pub n: usize,
    pub dim: usize,
    /// Row-major influence matrix.
    pub influence: Vec<f64>,
    pub vbar: Vec<f64>,
    /// Per-agent gains `α_i` before the `1/ε` scaling.
    pub alpha: Vec<f64>,
    pub alpha_scale: f64,
    /// Steering accelerations `β_i`.
    pub beta: Vec<f64>,
    /// Friction accelerations `−c_i‖v_i‖^r v_i`.
    pub friction: Vec<f64>,
}

impl LoopSnapshot {
    fn resize(&mut self, n: usize, dim: usize) {
        self.n = n;
        self.dim = dim;
        self.influence.resize(n * n, 0.0);
        self.vbar.resize(n * dim, 0.0);
        self.alpha.resize(n, 0.0);
        self.beta.resize(n * dim, 0.0);
        self.friction.resize(n * dim, 0.0);
    }

    pub fn influence_matrix(&self) -> InfluenceMatrix {
        InfluenceMatrix::from_raw(self.n, self.influence.clone())
    }

    /// Gains actually multiplying `v̄_i − v_i`.
    pub fn effective_alpha(&self) -> impl Iterator<Item = f64> + '_ {
        self.alpha.iter().map(move |a| a * self.alpha_scale)
    }

    /// Non-alignment acceleration `β_i − c_i‖v_i‖^r v_i`.
    pub fn forcing(&self) -> Vec<f64> {
        self.beta.iter().zip(&self.friction).map(|(b, f)| b + f).collect()
    }

    /// Writes `v̇`.
    pub fn acceleration(&self, v: &[f64], out: &mut [f64]) {
        let dim = self.dim;
        for i in 0..self.n {
            let g = self.alpha[i] * self.alpha_scale;
            for k in 0..dim {
                let m = i * dim + k;
                out[m] = g * (self.vbar[m] - v[m]) + self.beta[m] + self.friction[m];
            }
        }
    }
}

/// A flocking system that can report its loop quantities at a state.
pub trait Dynamics: Send + Sync {
    fn n(&self) -> usize;
    fn dim(&self) -> usize;

    /// Fills `snap` at `(t, x, v)`; buffers are resized as needed.
    fn snapshot_into(&self, t: f64, x: &[f64], v: &[f64], snap: &mut LoopSnapshot) -> Result<()>;

    /// The influence rule when influence is state-dependent.
    fn influence_rule(&self) -> Option<&InfluenceRule> {
        None
    }

    fn snapshot(&self, state: &SwarmState) -> Result<LoopSnapshot> {
        let mut snap = LoopSnapshot::default();
        self.snapshot_into(state.t, state.positions(), state.velocities(), &mut snap)?;
        Ok(snap)
    }
}

/// `α_i = ξ_i(v̄_i − v_i)`.
pub fn gain_vector(vbar: &[f64], v: &[f64], dim: usize, gain: &PerAgent<GainRule>) -> Result<Vec<f64>> {
    if dim == 0 || vbar.len() != v.len() || v.len() % dim != 0 {
        return Err(FlockError::Dimension("gain_vector: vbar and v must both be N x d".into()));
    }
    ensure_finite(vbar, "local mean velocities")?;
    ensure_finite(v, "velocities")?;
    let n = v.len() / dim;
    gain.check_len(n, "gain")?;
    let mut out = vec![0.0; n];
    gains_into(vbar, v, dim, gain, &mut out);
    Ok(out)
}

fn gains_into(vbar: &[f64], v: &[f64], dim: usize, gain: &PerAgent<GainRule>, out: &mut [f64]) {
    let mut u = [0.0f64; 16];
    for (i, a) in out.iter_mut().enumerate() {
        let rule = gain.get(i);
        *a = if dim <= 16 {
            let mut r2 = 0.0;
            for k in 0..dim {
                u[k] = vbar[i * dim + k] - v[i * dim + k];
                r2 += u[k] * u[k];
            }
            match rule.eval_radial(r2.sqrt()) {
                Some(g) => g,
                None => rule.eval(&u[..dim]),
            }
        } else {
            let u: Vec<f64> = (0..dim).map(|k| vbar[i * dim + k] - v[i * dim + k]).collect();
            rule.eval(&u)
        };
    }
}

fn steering_into(rule: &SteeringRule, t: f64, x: &[f64], v: &[f64], dim: usize, out: &mut [f64]) {
    for (i, b) in out.chunks_mut(dim).enumerate() {
        rule.eval(i, &x[i * dim..(i + 1) * dim], &v[i * dim..(i + 1) * dim], t, b);
    }
}

fn friction_into(rule: &FrictionRule, v: &[f64], dim: usize, out: &mut [f64]) {
    out.fill(0.0);
    for (i, f) in out.chunks_mut(dim).enumerate() {
        rule.accumulate(i, &v[i * dim..(i + 1) * dim], f);
    }
}

impl Dynamics for ModelConfig {
    fn n(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn influence_rule(&self) -> Option<&InfluenceRule> {
        Some(&self.influence)
    }

    fn snapshot_into(&self, t: f64, x: &[f64], v: &[f64], snap: &mut LoopSnapshot) -> Result<()> {
        let (n, dim) = (self.n, self.dim);
        if x.len() != n * dim || v.len() != n * dim {
            return Err(FlockError::Dimension(format!(
                "state does not match model with N = {n}, d = {dim}"
            )));
        }
        snap.resize(n, dim);
        fill_influence(x, v, n, dim, &self.influence, &self.orientation_map, &mut snap.influence)?;
        mean_into(&snap.influence, v, n, dim, &mut snap.vbar);
        gains_into(&snap.vbar, v, dim, &self.gain, &mut snap.alpha);
        snap.alpha_scale = 1.0 / self.eps;
        steering_into(&self.steering, t, x, v, dim, &mut snap.beta);
        friction_into(&self.friction, v, dim, &mut snap.friction);
        Ok(())
    }
}

/// Derivative pair `(ẋ, v̇)` of the closed loop at `state`.
pub fn rhs_closed(state: &SwarmState, cfg: &ModelConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    rhs(state, cfg)
}

/// Derivative pair for any [`Dynamics`].
pub fn rhs<D: Dynamics + ?Sized>(state: &SwarmState, dynamics: &D) -> Result<(Vec<f64>, Vec<f64>)> {
    let snap = dynamics.snapshot(state)?;
    let mut dv = vec![0.0; state.velocities().len()];
    snap.acceleration(state.velocities(), &mut dv);
    Ok((state.velocities().to_vec(), dv))
}

pub type GainSchedule = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;
pub type InfluenceSchedule = Arc<dyn Fn(f64) -> InfluenceMatrix + Send + Sync>;

/// Open-loop system with prescribed `α(t)`, `a(t)` and `β(t)`.
#[derive(Clone)]
pub struct OpenLoop {
    pub n: usize,
    pub dim: usize,
    pub alpha: GainSchedule,
    pub influence: InfluenceSchedule,
    pub steering: SteeringRule,
    pub friction: FrictionRule,
}

impl std::fmt::Debug for OpenLoop {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OpenLoop")
            .field("n", &self.n)
            .field("dim", &self.dim)
            .field("steering", &self.steering)
            .field("friction", &self.friction)
            .finish_non_exhaustive()
    }
}

impl OpenLoop {
    pub fn new(n: usize, dim: usize, alpha: GainSchedule, influence: InfluenceSchedule) -> Self {
        Self {
            n,
            dim,
            alpha,
            influence,
            steering: SteeringRule::None,
            friction: FrictionRule::none(),
        }
    }

    pub fn with_steering(mut self, steering: SteeringRule) -> Self {
        self.steering = steering;
        self
    }

    pub fn with_friction(mut self, friction: FrictionRule) -> Self {
        self.friction = friction;
        self
    }
}

impl Dynamics for OpenLoop {
    fn n(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn snapshot_into(&self, t: f64, x: &[f64], v: &[f64], snap: &mut LoopSnapshot) -> Result<()> {
        let (n, dim) = (self.n, self.dim);
        if x.len() != n * dim || v.len() != n * dim {
            return Err(FlockError::Dimension("state does not match open-loop system".into()));
        }
        ensure_finite(x, "positions")?;
        ensure_finite(v, "velocities")?;
        let a = (self.influence)(t);
        if a.n() != n {
            return Err(FlockError::Dimension(format!("a(t) is {0}x{0}, expected {n}x{n}", a.n())));
        }
        a.check_stochastic(1e-12)?;
        let alpha = (self.alpha)(t);
        if alpha.len() != n || alpha.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
            return Err(FlockError::Domain("alpha(t) must hold N finite nonnegative gains".into()));
        }
        snap.resize(n, dim);
        snap.influence.copy_from_slice(a.as_slice());
        mean_into(&snap.influence, v, n, dim, &mut snap.vbar);
        snap.alpha.copy_from_slice(&alpha);
        snap.alpha_scale = 1.0;
        steering_into(&self.steering, t, x, v, dim, &mut snap.beta);
        friction_into(&self.friction, v, dim, &mut snap.friction);
        Ok(())
    }
}

/// Derivative pair of the open loop at `state`.
pub fn rhs_open(state: &SwarmState, schedules: &OpenLoop) -> Result<(Vec<f64>, Vec<f64>)> {
    rhs(state, schedules)
}
