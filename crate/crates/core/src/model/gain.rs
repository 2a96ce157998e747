use std::fmt;
use std::sync::Arc;

use crate::error::{FlockError, Result};
use crate::state::norm_sq;

/// User-supplied gain `ξ(u)`, optionally with a routine returning
/// `min_{‖u‖≤M} ξ(u)`.
#[derive(Clone)]
pub struct CustomGain {
    pub func: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub ball_minimum: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    pub acceleration_bound: Option<f64>,
}

impl fmt::Debug for CustomGain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomGain")
            .field("ball_minimum", &self.ball_minimum.is_some())
            .field("acceleration_bound", &self.acceleration_bound)
            .finish_non_exhaustive()
    }
}

/// Scalar gain `α_i = ξ_i(v̄_i − v_i)`.
#[derive(Debug, Clone)]
pub enum GainRule {
    /// `ξ(u) = A / (c + ‖u‖²)^p`. With `p = ½` and `c = a²` this is the
    /// bounded default `A/√(a² + ‖u‖²)`.
    Saturating { accel: f64, offset: f64, power: f64 },
    /// Constant gain; carries no acceleration bound.
    Constant { value: f64 },
    Custom(CustomGain),
}

impl PartialEq for GainRule {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                GainRule::Saturating { accel, offset, power },
                GainRule::Saturating { accel: a2, offset: o2, power: p2 },
            ) => accel == a2 && offset == o2 && power == p2,
            (GainRule::Constant { value }, GainRule::Constant { value: v2 }) => value == v2,
            (GainRule::Custom(a), GainRule::Custom(b)) => Arc::ptr_eq(&a.func, &b.func),
            _ => false,
        }
    }
}

impl GainRule {
    /// `A/√(a² + ‖u‖²)`.
    pub fn saturating(accel: f64, a: f64) -> Self {
        GainRule::Saturating { accel, offset: a * a, power: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GainRule::Saturating { accel, offset, power } => {
                if !(accel > 0.0 && accel.is_finite())
                    || !(offset > 0.0 && offset.is_finite())
                    || !(power >= 0.0 && power.is_finite())
                {
                    return Err(FlockError::Domain(format!(
                        "saturating gain needs A > 0, offset > 0, power >= 0; got ({accel}, {offset}, {power})"
                    )));
                }
                Ok(())
            }
            GainRule::Constant { value } if value > 0.0 && value.is_finite() => Ok(()),
            GainRule::Constant { value } => {
                Err(FlockError::Domain(format!("constant gain must be positive, got {value}")))
            }
            GainRule::Custom(_) => Ok(()),
        }
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        match self {
            GainRule::Custom(c) => (c.func)(u),
            _ => self.eval_radial(norm_sq(u).sqrt()).expect("built-in gains are radial"),
        }
    }

    /// Gain as a function of `‖u‖` for radial rules.
    pub fn eval_radial(&self, r: f64) -> Option<f64> {
        match *self {
            GainRule::Saturating { accel, offset, power } => {
                let s = offset + r * r;
                Some(if power == 0.5 { accel / s.sqrt() } else { accel * s.powf(-power) })
            }
            GainRule::Constant { value } => Some(value),
            GainRule::Custom(_) => None,
        }
    }

    pub fn at_zero(&self, dim: usize) -> f64 {
        self.eval(&vec![0.0; dim])
    }

    /// `min_{‖u‖≤M} ξ(u)`; `None` when it cannot be certified.
    pub fn ball_minimum(&self, m: f64) -> Option<f64> {
        match self {
            // Both built-in forms are nonincreasing in ‖u‖.
            GainRule::Saturating { .. } | GainRule::Constant { .. } => self.eval_radial(m),
            GainRule::Custom(c) => c.ball_minimum.as_ref().map(|f| f(m)),
        }
    }

    /// `sup_u ξ(u)‖u‖`, if finite.
    pub fn acceleration_bound(&self) -> Option<f64> {
        match *self {
            GainRule::Saturating { accel, offset, power } => {
                if power == 0.5 {
                    Some(accel)
                } else if power > 0.5 {
                    let s2 = offset / (2.0 * power - 1.0);
                    Some(accel * s2.sqrt() * (offset + s2).powf(-power))
                } else {
                    None
                }
            }
            GainRule::Constant { .. } => None,
            GainRule::Custom(ref c) => c.acceleration_bound,
        }
    }
}
