//! Model ingredients: influence kernels and modifiers, gains, steering and
//! friction, bundled into a [`ModelConfig`].

mod friction;
mod gain;
mod kernel;
mod steering;

pub use friction::FrictionRule;
pub use gain::{CustomGain, GainRule};
pub use kernel::{InfluenceRule, Kernel, Masking, OrientationBias, OrientationMap};
pub use steering::{SteeringFn, SteeringRule, Target};

use crate::error::{FlockError, Result};

/// A per-agent parameter that is either shared by every agent or given
/// explicitly for each one.
#[derive(Debug, Clone, PartialEq)]
pub enum PerAgent<T> {
    Uniform(T),
    Each(Vec<T>),
}

impl<T> PerAgent<T> {
    pub fn get(&self, i: usize) -> &T {
        match self {
            PerAgent::Uniform(v) => v,
            PerAgent::Each(vs) => &vs[i],
        }
    }

    pub fn check_len(&self, n: usize, what: &str) -> Result<()> {
        match self {
            PerAgent::Each(vs) if vs.len() != n => Err(FlockError::Dimension(format!(
                "{what}: expected {n} per-agent entries, got {}",
                vs.len()
            ))),
            _ => Ok(()),
        }
    }

    pub fn iter_n(&self, n: usize) -> impl Iterator<Item = &T> + '_ {
        (0..n).map(move |i| self.get(i))
    }
}

impl<T> From<T> for PerAgent<T> {
    fn from(v: T) -> Self {
        PerAgent::Uniform(v)
    }
}

/// Full description of a closed-loop system
/// `ẋ_i = v_i`, `v̇_i = (α_i/ε)(v̄_i − v_i) + β_i − c_i‖v_i‖^r v_i`.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub n: usize,
    pub dim: usize,
    pub influence: InfluenceRule,
    pub orientation_map: OrientationMap,
    pub gain: PerAgent<GainRule>,
    pub steering: SteeringRule,
    pub friction: FrictionRule,
    /// Flocking-to-steering timescale ratio; 1 for the unscaled model.
    pub eps: f64,
}

impl ModelConfig {
    /// Plain normalized kernel, default saturating gain `1/√(1+‖u‖²)`, no
    /// steering, no friction, `ε = 1`.
    pub fn new(n: usize, dim: usize, kernel: Kernel) -> Self {
        Self {
            n,
            dim,
            influence: InfluenceRule::plain(kernel),
            orientation_map: OrientationMap::default(),
            gain: PerAgent::Uniform(GainRule::saturating(1.0, 1.0)),
            steering: SteeringRule::None,
            friction: FrictionRule::none(),
            eps: 1.0,
        }
    }

    pub fn with_influence(mut self, rule: InfluenceRule) -> Self {
        self.influence = rule;
        self
    }

    pub fn with_orientation_map(mut self, map: OrientationMap) -> Self {
        self.orientation_map = map;
        self
    }

    pub fn with_gain(mut self, gain: impl Into<PerAgent<GainRule>>) -> Self {
        self.gain = gain.into();
        self
    }

    pub fn with_steering(mut self, steering: SteeringRule) -> Self {
        self.steering = steering;
        self
    }

    pub fn with_friction(mut self, friction: FrictionRule) -> Self {
        self.friction = friction;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.dim == 0 {
            return Err(FlockError::Domain("model needs N >= 1 and d >= 1".into()));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(FlockError::Domain(format!("eps must be positive, got {}", self.eps)));
        }
        self.influence.validate()?;
        self.orientation_map.validate(self.n)?;
        self.gain.check_len(self.n, "gain")?;
        for g in self.gain.iter_n(self.n) {
            g.validate()?;
        }
        self.steering.validate(self.n, self.dim)?;
        self.friction.validate(self.n)?;
        Ok(())
    }

    /// Global acceleration bound `A` of the gain rules, if every agent has one.
    pub fn acceleration_bound(&self) -> Option<f64> {
        self.gain
            .iter_n(self.n)
            .map(GainRule::acceleration_bound)
            .try_fold(0.0_f64, |acc, a| a.map(|a| acc.max(a)))
    }

    /// `ξ_i(0)` for every agent.
    pub fn gains_at_zero(&self) -> Vec<f64> {
        let zero = vec![0.0; self.dim];
        self.gain.iter_n(self.n).map(|g| g.eval(&zero)).collect()
    }
}
