use serde::{Deserialize, Serialize};

use crate::error::{FlockError, Result};
use crate::integrator::Trajectory;
use crate::model::{FrictionRule, SteeringRule};

/// `(E₀^{−r/2} + 2^{r/2}·r·c·t)^{−2/r}`: the decay bound on
/// `E = max_i ½‖v_i‖²` under friction `−c_i‖v_i‖^r v_i`, `c_i ≥ c`.
pub fn energy_bound(e0: f64, r: f64, c_min: f64, t: f64) -> f64 {
    if e0 <= 0.0 {
        return 0.0;
    }
    (e0.powf(-0.5 * r) + 2f64.powf(0.5 * r) * r * c_min * t).powf(-2.0 / r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub samples: usize,
    /// Largest `E(t_{k+1}) − E(t_k)`; nonpositive when monotone.
    pub max_increase: f64,
    /// Largest `E(t) − bound(t)`.
    pub max_bound_excess: f64,
    pub monotone: bool,
    pub bound_holds: bool,
}

pub fn energy_decay_check(
    traj: &Trajectory,
    friction: &FrictionRule,
    steering: &SteeringRule,
    tol: f64,
) -> Result<EnergyReport> {
    let first = traj
        .samples
        .first()
        .ok_or_else(|| FlockError::Sampling("empty trajectory".into()))?;
    let n = first.state.n();
    friction.validate(n)?;
    let c_min = friction.min_coeff(n);
    if !(c_min > 0.0) || !(friction.exponent > 0.0) {
        return Err(FlockError::Domain(
            "energy decay needs every friction coefficient and the exponent positive".into(),
        ));
    }
    if !steering.is_zero() {
        return Err(FlockError::Domain("energy decay needs zero steering".into()));
    }
    let t0 = first.state.t;
    let e0 = first.state.max_kinetic_energy();
    let mut report = EnergyReport {
        samples: traj.samples.len(),
        max_increase: f64::NEG_INFINITY,
        max_bound_excess: f64::NEG_INFINITY,
        monotone: true,
        bound_holds: true,
    };
    let mut prev = e0;
    for s in &traj.samples {
        let e = s.state.max_kinetic_energy();
        if !std::ptr::eq(s, first) {
            report.max_increase = report.max_increase.max(e - prev);
        }
        prev = e;
        let excess = e - energy_bound(e0, friction.exponent, c_min, s.state.t - t0);
        report.max_bound_excess = report.max_bound_excess.max(excess);
    }
    report.monotone = !(report.max_increase > tol);
    report.bound_holds = report.max_bound_excess <= tol;
    Ok(report)
}
