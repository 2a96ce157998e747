//! Declarative experiment files (TOML). Unknown keys are rejected at every
//! level so that typos fail loudly instead of silently using a default.

use flock_core::diagnostics::{SteeringBound, ThetaPolicy};
use flock_core::integrator::default_dt;
use flock_core::model::{
    FrictionRule, GainRule, InfluenceRule, Kernel, Masking, OrientationBias, OrientationMap, PerAgent, SteeringRule,
    Target,
};
use flock_core::reduced::{CompareOptions, ReducedInit, TransientGains};
use flock_core::{IntegratorConfig, Method, ModelConfig, SwarmState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub model: ModelSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub certificate: Option<CertificateSection>,
    #[serde(default)]
    pub compare: CompareSection,
    #[serde(default)]
    pub transient: TransientSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "one")]
    pub eps: f64,
    pub kernel: KernelSpec,
    #[serde(default)]
    pub masking: Option<MaskingSpec>,
    #[serde(default)]
    pub orientation: Option<OrientationSpec>,
    #[serde(default)]
    pub gain: Option<OneOrMany<GainSpec>>,
    #[serde(default)]
    pub steering: SteeringSpec,
    #[serde(default)]
    pub friction: Option<FrictionSpec>,
}

fn one() -> f64 {
    1.0
}

/// A single value for every agent, or one per agent.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn per_agent(&self) -> PerAgent<T> {
        match self {
            OneOrMany::One(v) => PerAgent::Uniform(v.clone()),
            OneOrMany::Many(v) => PerAgent::Each(v.clone()),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    InversePower { beta: f64 },
    Exponential { length: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskingSpec {
    pub kappa: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrientationSpec {
    pub eta: f64,
    pub delta: f64,
    #[serde(default)]
    pub b: Option<OneOrMany<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GainSpec {
    Saturating { accel: f64, offset: f64, power: f64 },
    Constant { value: f64 },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SteeringSpec {
    #[default]
    None,
    Constant { offsets: OneOrMany<Vec<f64>> },
    Decaying { offsets: OneOrMany<Vec<f64>>, rate: f64 },
    Tracking { gamma1: f64, gamma2: f64, target: TargetSpec },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Circle { center: [f64; 2], radius: f64, omega: f64 },
    Line { origin: Vec<f64>, velocity: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrictionSpec {
    pub coeff: OneOrMany<f64>,
    pub exponent: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub positions: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub velocities: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub random: Option<RandomInitial>,
}

/// Uniform draws in boxes `[-s, s]^d`, reproducible from the seed.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomInitial {
    pub n: usize,
    pub dim: usize,
    #[serde(default = "default_position_scale")]
    pub position_scale: f64,
    #[serde(default = "one")]
    pub velocity_scale: f64,
}

fn default_position_scale() -> f64 {
    5.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default = "default_method")]
    pub method: Method,
    /// Defaults to `min(1e-2, ε/20)`.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub sample_every: Option<usize>,
    /// Alternative to `sample_every`; `dt` is shrunk to divide it.
    #[serde(default)]
    pub sample_spacing: Option<f64>,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
}

fn default_method() -> Method {
    Method::Rk4
}
fn default_t_end() -> f64 {
    200.0
}
fn default_rtol() -> f64 {
    1e-8
}
fn default_atol() -> f64 {
    1e-10
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            method: default_method(),
            dt: None,
            t_end: default_t_end(),
            sample_every: None,
            sample_spacing: None,
            rtol: default_rtol(),
            atol: default_atol(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    Fixed(f64),
    Named(ThetaName),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaName {
    Psi,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    #[serde(default = "default_theta")]
    pub theta: ThetaSpec,
    /// Also run the contraction monitor after `run`.
    #[serde(default)]
    pub monitor: bool,
}

fn default_theta() -> ThetaSpec {
    ThetaSpec::Named(ThetaName::Psi)
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self { theta: default_theta(), monitor: false }
    }
}

/// User-asserted facts about the steering the certificate cannot derive.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSection {
    #[serde(default)]
    pub steering_integral: Option<f64>,
    #[serde(default)]
    pub steering_decays: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    #[serde(default = "default_eps_list")]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub t_skip: Option<f64>,
    #[serde(default = "default_spacing")]
    pub sample_spacing: f64,
    #[serde(default = "default_init")]
    pub init: ReducedInit,
    #[serde(default = "default_compare_method")]
    pub method: Method,
}

fn default_eps_list() -> Vec<f64> {
    vec![0.1, 0.01, 0.001]
}
fn default_spacing() -> f64 {
    1e-2
}
fn default_init() -> ReducedInit {
    ReducedInit::TransientLimit
}
fn default_compare_method() -> Method {
    Method::Rk45
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            eps: default_eps_list(),
            t_end: None,
            t_skip: None,
            sample_spacing: default_spacing(),
            init: default_init(),
            method: default_compare_method(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransientSection {
    #[serde(default = "default_tau_end")]
    pub tau_end: f64,
    #[serde(default = "default_gains")]
    pub gains: TransientGains,
}

fn default_tau_end() -> f64 {
    50.0
}
fn default_gains() -> TransientGains {
    TransientGains::FrozenAtZero
}

impl Default for TransientSection {
    fn default() -> Self {
        Self { tau_end: default_tau_end(), gains: default_gains() }
    }
}

fn field(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{path}: {msg}"))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Initial state; random draws use `seed_override`, then `seed`, then 0.
    pub fn initial_state(&self, seed_override: Option<u64>) -> Result<SwarmState, CliError> {
        let init = &self.initial;
        match (&init.positions, &init.velocities, &init.random) {
            (Some(x), Some(v), None) => {
                SwarmState::from_rows(0.0, x, v).map_err(|e| field("initial", e))
            }
            (None, None, Some(r)) => {
                if r.n == 0 || r.dim == 0 {
                    return Err(field("initial.random", "n and dim must be positive"));
                }
                if !(r.position_scale >= 0.0 && r.velocity_scale >= 0.0) {
                    return Err(field("initial.random", "scales must be nonnegative"));
                }
                let seed = seed_override.or(self.seed).unwrap_or(0);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let m = r.n * r.dim;
                let x: Vec<f64> = (0..m).map(|_| r.position_scale * rng.gen_range(-1.0..=1.0)).collect();
                let v: Vec<f64> = (0..m).map(|_| r.velocity_scale * rng.gen_range(-1.0..=1.0)).collect();
                SwarmState::new(0.0, r.n, r.dim, x, v).map_err(|e| field("initial.random", e))
            }
            _ => Err(field(
                "initial",
                "give either both `positions` and `velocities`, or a `random` table",
            )),
        }
    }

    pub fn model(&self, n: usize, dim: usize, eps_override: Option<f64>) -> Result<ModelConfig, CliError> {
        let m = &self.model;
        let kernel = match m.kernel {
            KernelSpec::InversePower { beta } => Kernel::InversePower { beta },
            KernelSpec::Exponential { length } => Kernel::Exponential { length },
        };
        let influence = InfluenceRule {
            kernel,
            masking: m.masking.as_ref().map(|s| Masking { kappa: s.kappa, width: s.width }),
            orientation: m.orientation.as_ref().map(|s| OrientationBias { eta: s.eta, delta: s.delta }),
        };
        let mut cfg = ModelConfig::new(n, dim, kernel)
            .with_influence(influence)
            .with_eps(eps_override.unwrap_or(m.eps));
        if let Some(b) = m.orientation.as_ref().and_then(|o| o.b.as_ref()) {
            cfg = cfg.with_orientation_map(OrientationMap { b: b.per_agent() });
        }
        if let Some(g) = &m.gain {
            let rule = |s: &GainSpec| match *s {
                GainSpec::Saturating { accel, offset, power } => GainRule::Saturating { accel, offset, power },
                GainSpec::Constant { value } => GainRule::Constant { value },
            };
            cfg = cfg.with_gain(match g {
                OneOrMany::One(s) => PerAgent::Uniform(rule(s)),
                OneOrMany::Many(v) => PerAgent::Each(v.iter().map(rule).collect()),
            });
        }
        cfg = cfg.with_steering(match &m.steering {
            SteeringSpec::None => SteeringRule::None,
            SteeringSpec::Constant { offsets } => SteeringRule::Constant(offsets.per_agent()),
            SteeringSpec::Decaying { offsets, rate } => {
                SteeringRule::Decaying { offsets: offsets.per_agent(), rate: *rate }
            }
            SteeringSpec::Tracking { gamma1, gamma2, target } => SteeringRule::Tracking {
                gamma1: *gamma1,
                gamma2: *gamma2,
                target: match target {
                    TargetSpec::Circle { center, radius, omega } => {
                        Target::Circle { center: *center, radius: *radius, omega: *omega }
                    }
                    TargetSpec::Line { origin, velocity } => {
                        Target::Line { origin: origin.clone(), velocity: velocity.clone() }
                    }
                },
            },
        });
        if let Some(f) = &m.friction {
            cfg = cfg.with_friction(FrictionRule::new(f.coeff.per_agent(), f.exponent));
        }
        cfg.validate().map_err(|e| field("model", e))?;
        Ok(cfg)
    }

    pub fn integrator(&self, eps: f64) -> Result<IntegratorConfig, CliError> {
        let s = &self.integrator;
        let mut dt = s.dt.unwrap_or_else(|| default_dt(eps));
        let every = match (s.sample_every, s.sample_spacing) {
            (Some(_), Some(_)) => {
                return Err(field("integrator", "set at most one of sample_every and sample_spacing"))
            }
            (Some(k), None) => k,
            (None, Some(h)) => {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(field("integrator.sample_spacing", "must be positive"));
                }
                let k = (h / dt).ceil().max(1.0) as usize;
                dt = h / k as f64;
                k
            }
            (None, None) => 1,
        };
        let icfg = IntegratorConfig {
            method: s.method,
            dt,
            rtol: s.rtol,
            atol: s.atol,
            t_end: s.t_end,
            sample_every: every,
            dt_min: 1e-12,
        };
        icfg.validate().map_err(|e| field("integrator", e))?;
        Ok(icfg)
    }

    pub fn theta_policy(&self) -> Result<ThetaPolicy, CliError> {
        match self.diagnostics.theta {
            ThetaSpec::Named(ThetaName::Psi) => Ok(ThetaPolicy::Psi),
            ThetaSpec::Fixed(t) if t > 0.0 && t.is_finite() => Ok(ThetaPolicy::Fixed(t)),
            ThetaSpec::Fixed(t) => Err(field("diagnostics.theta", format!("must be positive, got {t}"))),
        }
    }

    /// Steering facts for the certificate: the closed form when the rule
    /// has one, otherwise the values asserted in `[certificate]`.
    pub fn steering_bound(&self, cfg: &ModelConfig) -> Option<SteeringBound> {
        let asserted = self.certificate.as_ref().and_then(|c| {
            c.steering_integral.map(|integral| SteeringBound {
                integral,
                decays: c.steering_decays.unwrap_or(integral.is_finite()),
            })
        });
        asserted.or_else(|| SteeringBound::from_config(cfg))
    }

    pub fn compare_options(&self) -> CompareOptions {
        let c = &self.compare;
        CompareOptions {
            t_end: c.t_end.unwrap_or(self.integrator.t_end),
            t_skip: c.t_skip,
            sample_spacing: c.sample_spacing,
            init: c.init,
            method: c.method,
            rtol: self.integrator.rtol,
            atol: self.integrator.atol,
        }
    }
}
