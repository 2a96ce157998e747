//! Finite-difference check of the diameter inequalities
//! `d_X' ≤ d_V` and `d_V' ≤ −α₀λ_pq²θ²d_V + d_β` along a sampled trajectory.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{active_sets, diameter, ThetaPolicy};
use crate::dynamics::Dynamics;
use crate::error::{FlockError, Result};
use crate::integrator::Trajectory;

/// Largest sample spacing the monitor accepts.
pub const MAX_SAMPLE_SPACING: f64 = 1e-2;

/// Worst margins over all interior samples. A margin is
/// `rhs − (finite-difference derivative)`, so negative means the raw
/// inequality failed before tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub samples: usize,
    pub worst_margin_x: f64,
    pub worst_margin_x_t: f64,
    pub worst_margin_v: f64,
    pub worst_margin_v_t: f64,
    /// Smallest `margin + tol` over both inequalities.
    pub worst_slack: f64,
    pub max_tol: f64,
    pub violations: usize,
    pub holds: bool,
}

struct Point {
    t: f64,
    d_x: f64,
    d_v: f64,
    d_beta: f64,
    rate: f64,
}

fn evaluate<D: Dynamics + ?Sized>(
    state: &crate::state::SwarmState,
    dynamics: &D,
    policy: ThetaPolicy,
) -> Result<Point> {
    let dim = state.dim();
    let snap = dynamics.snapshot(state)?;
    let (d_x, _) = diameter(state.positions(), dim);
    let (d_v, (p, q)) = diameter(state.velocities(), dim);
    // Friction acts like a state-dependent steering term here.
    let (d_beta, _) = diameter(&snap.forcing(), dim);
    let theta = policy.theta(dynamics, d_x)?;
    let lambda = active_sets(&snap.influence_matrix(), theta)?.lambda_pair(p, q) as f64;
    let alpha0 = snap.effective_alpha().fold(f64::INFINITY, f64::min);
    Ok(Point { t: state.t, d_x, d_v, d_beta, rate: alpha0 * lambda * lambda * theta * theta })
}

/// Weights of the three-point centered first and second derivatives on a
/// non-uniform grid.
fn stencil(h1: f64, h2: f64) -> ([f64; 3], [f64; 3]) {
    let s = h1 * h2 * (h1 + h2);
    let d1 = [-h2 * h2 / s, (h2 * h2 - h1 * h1) / s, h1 * h1 / s];
    let d2 = [2.0 * h2 / s, -2.0 * (h1 + h2) / s, 2.0 * h1 / s];
    (d1, d2)
}

/// Checks both inequalities at every interior sample of `traj`.
///
/// The tolerance at sample `k` is `10·h²·max|f''|`, with `h` the larger
/// neighbouring spacing and `f''` the largest second difference of `d_X`
/// or `d_V` over samples `k−1..k+1`; it absorbs the discretization error,
/// including at kinks where the diameter-achieving pair switches.
pub fn monitor_contraction<D: Dynamics + ?Sized>(
    traj: &Trajectory,
    dynamics: &D,
    policy: ThetaPolicy,
) -> Result<ContractionReport> {
    let states: Vec<_> = traj.states().collect();
    if states.len() < 3 {
        return Err(FlockError::Sampling("the monitor needs at least three samples".into()));
    }
    for w in states.windows(2) {
        let h = w[1].t - w[0].t;
        if !(h > 0.0) || h > MAX_SAMPLE_SPACING * (1.0 + 1e-9) {
            return Err(FlockError::Sampling(format!(
                "sample spacing {h} at t = {} exceeds {MAX_SAMPLE_SPACING}",
                w[0].t
            )));
        }
    }
    let points: Vec<Point> = states
        .par_iter()
        .map(|s| evaluate(*s, dynamics, policy))
        .collect::<Result<_>>()?;

    let m = points.len();
    let mut second_x = vec![0.0; m];
    let mut second_v = vec![0.0; m];
    let mut first_x = vec![0.0; m];
    let mut first_v = vec![0.0; m];
    for k in 1..m - 1 {
        let (h1, h2) = (points[k].t - points[k - 1].t, points[k + 1].t - points[k].t);
        let (d1, d2) = stencil(h1, h2);
        let apply = |w: &[f64; 3], f: &dyn Fn(&Point) -> f64| {
            w[0] * f(&points[k - 1]) + w[1] * f(&points[k]) + w[2] * f(&points[k + 1])
        };
        first_x[k] = apply(&d1, &|p| p.d_x);
        first_v[k] = apply(&d1, &|p| p.d_v);
        second_x[k] = apply(&d2, &|p| p.d_x).abs();
        second_v[k] = apply(&d2, &|p| p.d_v).abs();
    }

    let mut report = ContractionReport {
        samples: m,
        worst_margin_x: f64::INFINITY,
        worst_margin_x_t: f64::NAN,
        worst_margin_v: f64::INFINITY,
        worst_margin_v_t: f64::NAN,
        worst_slack: f64::INFINITY,
        max_tol: 0.0,
        violations: 0,
        holds: true,
    };
    for k in 1..m - 1 {
        let p = &points[k];
        let h = (p.t - points[k - 1].t).max(points[k + 1].t - p.t);
        let lo = k.saturating_sub(1).max(1);
        let hi = (k + 1).min(m - 2);
        let curv = (lo..=hi).map(|j| second_x[j].max(second_v[j])).fold(0.0, f64::max);
        let scale = p.d_x.max(p.d_v).max(1.0);
        let tol = 10.0 * h * h * curv + 1e-12 * scale;
        let margin_x = p.d_v - first_x[k];
        let margin_v = -p.rate * p.d_v + p.d_beta - first_v[k];
        if margin_x < report.worst_margin_x {
            report.worst_margin_x = margin_x;
            report.worst_margin_x_t = p.t;
        }
        if margin_v < report.worst_margin_v {
            report.worst_margin_v = margin_v;
            report.worst_margin_v_t = p.t;
        }
        let slack = margin_x.min(margin_v) + tol;
        report.worst_slack = report.worst_slack.min(slack);
        report.max_tol = report.max_tol.max(tol);
        if slack < 0.0 {
            report.violations += 1;
        }
    }
    report.holds = report.violations == 0;
    Ok(report)
}
