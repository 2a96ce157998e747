use serde::{Deserialize, Serialize};

use super::StationaryWeights;
use crate::error::{ensure_finite, FlockError, Result};
use crate::integrator::{solve, IntegratorConfig, IntegratorStats, OdeSystem};
use crate::model::{FrictionRule, SteeringRule};

/// Leading-order slow state: a rigidly translating configuration moving
/// with the common flock velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub t: f64,
    pub n: usize,
    pub dim: usize,
    pub x0: Vec<f64>,
    pub vf: Vec<f64>,
}

impl ReducedState {
    pub fn new(t: f64, dim: usize, x0: Vec<f64>, vf: Vec<f64>) -> Result<Self> {
        if dim == 0 || x0.is_empty() || x0.len() % dim != 0 || vf.len() != dim {
            return Err(FlockError::Dimension("reduced state needs N x d positions and a d-vector".into()));
        }
        ensure_finite(&x0, "positions")?;
        ensure_finite(&vf, "flock velocity")?;
        Ok(Self { t, n: x0.len() / dim, dim, x0, vf })
    }

    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for p in self.x0.chunks(self.dim) {
            for (ck, pk) in c.iter_mut().zip(p) {
                *ck += pk;
            }
        }
        c.iter_mut().for_each(|ck| *ck /= self.n as f64);
        c
    }
}

struct ReducedSystem<'a> {
    n: usize,
    dim: usize,
    steering: &'a SteeringRule,
    friction: &'a FrictionRule,
    pi: &'a [f64],
    buf: Vec<f64>,
}

impl OdeSystem for ReducedSystem<'_> {
    fn len(&self) -> usize {
        (self.n + 1) * self.dim
    }

    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let (n, dim) = (self.n, self.dim);
        let (x0, vf) = y.split_at(n * dim);
        let (dx, dv) = dy.split_at_mut(n * dim);
        for chunk in dx.chunks_mut(dim) {
            chunk.copy_from_slice(vf);
        }
        dv.fill(0.0);
        for i in 0..n {
            self.steering.eval(i, &x0[i * dim..(i + 1) * dim], vf, t, &mut self.buf);
            self.friction.accumulate(i, vf, &mut self.buf);
            for k in 0..dim {
                dv[k] += self.pi[i] * self.buf[k];
            }
        }
        Ok(())
    }
}

/// `ẋ0_i = v^f`, `v̇^f = Σ_i π_i (β_i(x0_i, v^f, t) − c_i‖v^f‖^r v^f)`.
pub fn rhs_reduced(
    state: &ReducedState,
    steering: &SteeringRule,
    friction: &FrictionRule,
    weights: &StationaryWeights,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if weights.pi.len() != state.n {
        return Err(FlockError::Dimension("stationary weights do not match the agent count".into()));
    }
    let mut sys = ReducedSystem { n: state.n, dim: state.dim, steering, friction, pi: &weights.pi, buf: vec![0.0; state.dim] };
    let y: Vec<f64> = state.x0.iter().chain(&state.vf).copied().collect();
    let mut dy = vec![0.0; y.len()];
    sys.rhs(state.t, &y, &mut dy)?;
    let dv = dy.split_off(state.n * state.dim);
    Ok((dy, dv))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTrajectory {
    pub samples: Vec<ReducedState>,
    pub stats: IntegratorStats,
}

pub fn integrate_reduced(
    initial: &ReducedState,
    steering: &SteeringRule,
    friction: &FrictionRule,
    weights: &StationaryWeights,
    icfg: &IntegratorConfig,
) -> Result<ReducedTrajectory> {
    if weights.pi.len() != initial.n {
        return Err(FlockError::Dimension("stationary weights do not match the agent count".into()));
    }
    steering.validate(initial.n, initial.dim)?;
    friction.validate(initial.n)?;
    let (n, dim) = (initial.n, initial.dim);
    let mut sys = ReducedSystem { n, dim, steering, friction, pi: &weights.pi, buf: vec![0.0; dim] };
    let y0: Vec<f64> = initial.x0.iter().chain(&initial.vf).copied().collect();
    let mut samples = Vec::new();
    let stats = solve(&mut sys, initial.t, &y0, icfg, |t, y| {
        samples.push(ReducedState { t, n, dim, x0: y[..n * dim].to_vec(), vf: y[n * dim..].to_vec() });
        Ok(())
    })?;
    Ok(ReducedTrajectory { samples, stats })
}
