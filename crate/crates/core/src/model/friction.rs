use crate::error::{FlockError, Result};
use crate::state::norm;

use super::PerAgent;

/// Velocity-power friction `−c_i‖v_i‖^r v_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrictionRule {
    pub coeffs: PerAgent<f64>,
    pub exponent: f64,
}

impl FrictionRule {
    pub fn new(coeffs: PerAgent<f64>, exponent: f64) -> Self {
        Self { coeffs, exponent }
    }

    pub fn none() -> Self {
        Self { coeffs: PerAgent::Uniform(0.0), exponent: 0.0 }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.coeffs.check_len(n, "friction coefficients")?;
        if self.coeffs.iter_n(n).any(|c| !(*c >= 0.0 && c.is_finite())) {
            return Err(FlockError::Domain("friction coefficients must be >= 0".into()));
        }
        if !(self.exponent >= 0.0 && self.exponent.is_finite()) {
            return Err(FlockError::Domain("friction exponent must be >= 0".into()));
        }
        Ok(())
    }

    pub fn is_active(&self, n: usize) -> bool {
        self.coeffs.iter_n(n).any(|c| *c > 0.0)
    }

    pub fn min_coeff(&self, n: usize) -> f64 {
        self.coeffs.iter_n(n).copied().fold(f64::INFINITY, f64::min)
    }

    /// Adds the friction acceleration of agent `i` to `out`.
    #[inline]
    pub fn accumulate(&self, i: usize, v: &[f64], out: &mut [f64]) {
        let c = *self.coeffs.get(i);
        if c == 0.0 {
            return;
        }
        let scale = if self.exponent == 0.0 { c } else { c * norm(v).powf(self.exponent) };
        for (o, vk) in out.iter_mut().zip(v) {
            *o -= scale * vk;
        }
    }
}
