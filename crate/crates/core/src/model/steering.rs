use std::fmt;
use std::sync::Arc;

use crate::error::{FlockError, Result};
use crate::state::dist;

use super::PerAgent;

/// Open-loop steering schedule: `(agent, t, out)` writes `β_i(t)`.
pub type SteeringFn = Arc<dyn Fn(usize, f64, &mut [f64]) + Send + Sync>;

/// Reference trajectory `y(t)` followed by tracking feedback.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// `y(t) = c + R·(sin ωt, cos ωt)` in the plane.
    Circle { center: [f64; 2], radius: f64, omega: f64 },
    /// `y(t) = y₀ + w t`.
    Line { origin: Vec<f64>, velocity: Vec<f64> },
}

impl Target {
    pub fn dim(&self) -> usize {
        match self {
            Target::Circle { .. } => 2,
            Target::Line { origin, .. } => origin.len(),
        }
    }

    /// Component `k` of `(y(t), ẏ(t))`.
    pub fn component(&self, t: f64, k: usize) -> (f64, f64) {
        match self {
            Target::Circle { center, radius, omega } => {
                let (s, c) = (omega * t).sin_cos();
                if k == 0 {
                    (center[0] + radius * s, radius * omega * c)
                } else {
                    (center[1] + radius * c, -radius * omega * s)
                }
            }
            Target::Line { origin, velocity } => (origin[k] + velocity[k] * t, velocity[k]),
        }
    }

    /// Writes `y(t)` and `ẏ(t)`.
    pub fn eval(&self, t: f64, y: &mut [f64], ydot: &mut [f64]) {
        match self {
            Target::Circle { center, radius, omega } => {
                let (s, c) = (omega * t).sin_cos();
                y[0] = center[0] + radius * s;
                y[1] = center[1] + radius * c;
                ydot[0] = radius * omega * c;
                ydot[1] = -radius * omega * s;
            }
            Target::Line { origin, velocity } => {
                for k in 0..origin.len() {
                    y[k] = origin[k] + velocity[k] * t;
                    ydot[k] = velocity[k];
                }
            }
        }
    }
}

/// Extra acceleration `β_i` beyond alignment.
#[derive(Clone)]
pub enum SteeringRule {
    None,
    /// Time-independent `β_i`.
    Constant(PerAgent<Vec<f64>>),
    /// `β_i(t) = b_i·e^{−λt}`; integrable with `∫d_β = d_β(0)/λ`.
    Decaying { offsets: PerAgent<Vec<f64>>, rate: f64 },
    /// Arbitrary continuous open-loop schedule.
    Schedule(SteeringFn),
    /// Feedback `β_i = γ₁(ẏ − v_i) + γ₂(y − x_i)`.
    Tracking { gamma1: f64, gamma2: f64, target: Target },
}

impl fmt::Debug for SteeringRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SteeringRule::None => write!(f, "None"),
            SteeringRule::Constant(b) => f.debug_tuple("Constant").field(b).finish(),
            SteeringRule::Decaying { offsets, rate } => f
                .debug_struct("Decaying")
                .field("offsets", offsets)
                .field("rate", rate)
                .finish(),
            SteeringRule::Schedule(_) => write!(f, "Schedule(..)"),
            SteeringRule::Tracking { gamma1, gamma2, target } => f
                .debug_struct("Tracking")
                .field("gamma1", gamma1)
                .field("gamma2", gamma2)
                .field("target", target)
                .finish(),
        }
    }
}

impl SteeringRule {
    pub fn validate(&self, n: usize, dim: usize) -> Result<()> {
        let check_vecs = |p: &PerAgent<Vec<f64>>| -> Result<()> {
            p.check_len(n, "steering offsets")?;
            if p.iter_n(n).any(|b| b.len() != dim || b.iter().any(|x| !x.is_finite())) {
                return Err(FlockError::Dimension(format!(
                    "steering vectors must be finite with {dim} components"
                )));
            }
            Ok(())
        };
        match self {
            SteeringRule::None | SteeringRule::Schedule(_) => Ok(()),
            SteeringRule::Constant(b) => check_vecs(b),
            SteeringRule::Decaying { offsets, rate } => {
                check_vecs(offsets)?;
                if !(*rate > 0.0 && rate.is_finite()) {
                    return Err(FlockError::Domain("steering decay rate must be positive".into()));
                }
                Ok(())
            }
            SteeringRule::Tracking { gamma1, gamma2, target } => {
                if !(gamma1.is_finite() && gamma2.is_finite()) {
                    return Err(FlockError::Domain("tracking gains must be finite".into()));
                }
                if target.dim() != dim {
                    return Err(FlockError::Dimension(format!(
                        "target lives in {} dimensions but the swarm in {dim}",
                        target.dim()
                    )));
                }
                if let Target::Line { origin, velocity } = target {
                    if origin.len() != velocity.len() {
                        return Err(FlockError::Dimension("line target origin/velocity".into()));
                    }
                }
                Ok(())
            }
        }
    }

    /// Whether `β` depends on the state.
    pub fn is_feedback(&self) -> bool {
        matches!(self, SteeringRule::Tracking { .. })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SteeringRule::None => true,
            SteeringRule::Tracking { gamma1, gamma2, .. } => *gamma1 == 0.0 && *gamma2 == 0.0,
            _ => false,
        }
    }

    /// Writes `β_i(t)` for agent `i` at `(x_i, v_i)`.
    pub fn eval(&self, i: usize, x_i: &[f64], v_i: &[f64], t: f64, out: &mut [f64]) {
        match self {
            SteeringRule::None => out.fill(0.0),
            SteeringRule::Constant(b) => out.copy_from_slice(b.get(i)),
            SteeringRule::Decaying { offsets, rate } => {
                let s = (-rate * t).exp();
                for (o, b) in out.iter_mut().zip(offsets.get(i)) {
                    *o = b * s;
                }
            }
            SteeringRule::Schedule(f) => f(i, t, out),
            SteeringRule::Tracking { gamma1, gamma2, target } => {
                for (k, o) in out.iter_mut().enumerate() {
                    let (y, ydot) = target.component(t, k);
                    *o = gamma1 * (ydot - v_i[k]) + gamma2 * (y - x_i[k]);
                }
            }
        }
    }

    /// Closed-form `∫₀^∞ d_β dt` for open-loop rules where it is known.
    /// `Some(∞)` when `d_β` is a nonzero constant.
    pub fn steering_diameter_integral(&self, n: usize) -> Option<f64> {
        let diameter = |p: &PerAgent<Vec<f64>>| {
            let mut d: f64 = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    d = d.max(dist(p.get(i), p.get(j)));
                }
            }
            d
        };
        match self {
            SteeringRule::None => Some(0.0),
            SteeringRule::Constant(b) => {
                Some(if diameter(b) == 0.0 { 0.0 } else { f64::INFINITY })
            }
            SteeringRule::Decaying { offsets, rate } => Some(diameter(offsets) / rate),
            SteeringRule::Schedule(_) | SteeringRule::Tracking { .. } => {
                if self.is_zero() {
                    Some(0.0)
                } else {
                    None
                }
            }
        }
    }
}
