//! Generators and invariant checks shared by the property tests and the
//! acceptance suite.
#![allow(dead_code)]

use std::sync::Arc;

use flock_core::diagnostics::{active_sets, diameter, hull_support_oracle, maximal_action_oracle};
use flock_core::influence_matrix;
use flock_core::model::{
    FrictionRule, GainRule, InfluenceRule, Kernel, Masking, OrientationBias, OrientationMap, PerAgent, SteeringRule,
    Target,
};
use flock_core::reduced::{
    initial_flock_velocity, integrate_reduced, rate_matrix, rate_spectrum, relative_residual, simulate_transient,
    stationary_distribution, stochastic_matrix, transient_limit, ReducedState, TransientGains,
};
use flock_core::{integrate, rhs_closed, InfluenceMatrix, IntegratorConfig, ModelConfig, SwarmState};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub type Check = std::result::Result<(), TestCaseError>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(TestCaseError::fail(format!($($fmt)*)));
        }
    };
}

fn ok<T, E: std::fmt::Debug>(r: std::result::Result<T, E>) -> std::result::Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(format!("{e:?}")))
}

#[derive(Debug, Clone)]
pub struct Swarm {
    pub n: usize,
    pub dim: usize,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl Swarm {
    pub fn state(&self) -> SwarmState {
        SwarmState::new(0.0, self.n, self.dim, self.x.clone(), self.v.clone()).unwrap()
    }
}

pub fn swarm(n: std::ops::RangeInclusive<usize>, dims: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Swarm> {
    (n, dims).prop_flat_map(|(n, dim)| {
        (
            prop::collection::vec(-10.0..10.0f64, n * dim),
            prop::collection::vec(-3.0..3.0f64, n * dim),
        )
            .prop_map(move |(x, v)| Swarm { n, dim, x, v })
    })
}

pub fn kernel() -> impl Strategy<Value = Kernel> {
    prop_oneof![
        (0.0..2.0f64).prop_map(|beta| Kernel::InversePower { beta }),
        (0.5..10.0f64).prop_map(|length| Kernel::Exponential { length }),
    ]
}

/// Kernels with optional masking and orientation bias.
pub fn influence_rule() -> impl Strategy<Value = InfluenceRule> {
    (
        kernel(),
        prop::option::of((0.0..0.9f64, 0.5..5.0f64)),
        prop::option::of((0.0..0.9f64, 0.1..2.0f64)),
    )
        .prop_map(|(kernel, m, o)| InfluenceRule {
            kernel,
            masking: m.map(|(kappa, width)| Masking { kappa, width }),
            orientation: o.map(|(eta, delta)| OrientationBias { eta, delta }),
        })
}

/// Position-only rules, as the reduced model requires.
pub fn position_rule() -> impl Strategy<Value = InfluenceRule> {
    (kernel(), prop::option::of((0.0..0.9f64, 0.5..5.0f64))).prop_map(|(kernel, m)| InfluenceRule {
        kernel,
        masking: m.map(|(kappa, width)| Masking { kappa, width }),
        orientation: None,
    })
}

/// Saturating gains with a finite acceleration bound.
pub fn bounded_gain() -> impl Strategy<Value = GainRule> {
    (0.5..10.0f64, 0.05..2.0f64, 0.5..1.5f64)
        .prop_map(|(accel, offset, power)| GainRule::Saturating { accel, offset, power })
}

pub fn gains(n: usize) -> impl Strategy<Value = Vec<GainRule>> {
    prop::collection::vec(bounded_gain(), n)
}

/// Strictly positive row-stochastic matrix.
pub fn stochastic(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = InfluenceMatrix> {
    n.prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(1e-3..1.0f64, n), n).prop_map(|rows| {
            let rows: Vec<Vec<f64>> = rows
                .into_iter()
                .map(|r| {
                    let s: f64 = r.iter().sum();
                    r.into_iter().map(|x| x / s).collect()
                })
                .collect();
            InfluenceMatrix::from_rows(&rows).unwrap()
        })
    })
}

pub fn stochastic_with_gains(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (InfluenceMatrix, Vec<f64>)> {
    stochastic(n).prop_flat_map(|p| {
        let n = p.n();
        (Just(p), prop::collection::vec(0.05..20.0f64, n))
    })
}

pub fn check_row_stochastic(rule: &InfluenceRule, s: &Swarm) -> Check {
    let a = ok(influence_matrix(&s.state(), rule, &OrientationMap::default()))?;
    for (i, row) in a.rows().enumerate() {
        let sum: f64 = row.iter().sum();
        ensure!((sum - 1.0).abs() <= 1e-12, "row {i} sums to {sum}");
        ensure!(row.iter().all(|&x| x > 0.0), "row {i} has a nonpositive entry: {row:?}");
    }
    Ok(())
}

pub fn check_shift_invariance(rule: &InfluenceRule, s: &Swarm, shift: &[f64]) -> Check {
    let a = ok(influence_matrix(&s.state(), rule, &OrientationMap::default()))?;
    let mut moved = s.clone();
    for (k, x) in moved.x.iter_mut().enumerate() {
        *x += shift[k % s.dim];
    }
    let b = ok(influence_matrix(&moved.state(), rule, &OrientationMap::default()))?;
    for (p, q) in a.as_slice().iter().zip(b.as_slice()) {
        ensure!((p - q).abs() <= 1e-12, "entry moved from {p} to {q}");
    }
    Ok(())
}

/// `‖α_i(v̄_i − v_i)‖ ≤ A` at every sample of a short closed-loop run.
pub fn check_acceleration_bound(rule: &InfluenceRule, s: &Swarm, g: &[GainRule]) -> Check {
    let cfg = ModelConfig::new(s.n, s.dim, rule.kernel)
        .with_influence(rule.clone())
        .with_gain(PerAgent::Each(g.to_vec()));
    let bound = cfg.acceleration_bound().expect("bounded gains");
    let mut worst = 0.0f64;
    ok(integrate(&s.state(), &cfg, &IntegratorConfig::rk4(0.02, 1.0).with_sample_every(5), |st| {
        let snap = flock_core::Dynamics::snapshot(&cfg, st)?;
        for i in 0..s.n {
            let mut a2 = 0.0;
            for k in 0..s.dim {
                let m = i * s.dim + k;
                let a = snap.alpha[i] * (snap.vbar[m] - st.velocities()[m]);
                a2 += a * a;
            }
            worst = worst.max(a2.sqrt());
        }
        Ok(None)
    }))?;
    ensure!(worst <= bound + 1e-9, "alignment acceleration {worst} exceeds A = {bound}");
    Ok(())
}

/// Every local mean lies between the supporting hyperplanes of the
/// velocity diameter.
pub fn check_convex_hull(rule: &InfluenceRule, s: &Swarm) -> Check {
    let a = ok(influence_matrix(&s.state(), rule, &OrientationMap::default()))?;
    let vbar = ok(flock_core::local_mean_velocity(&a, &s.v, s.dim))?;
    let (d, (p, q)) = diameter(&s.v, s.dim);
    let dim = s.dim;
    for i in 0..s.n {
        let mut ip = 0.0;
        for k in 0..dim {
            ip += (s.v[p * dim + k] - s.v[q * dim + k]) * (vbar[i * dim + k] - s.v[q * dim + k]);
        }
        ensure!(ip >= -1e-12 * d.max(1.0).powi(2), "local mean {i} leaves the hull: {ip}");
    }
    Ok(())
}

fn tracking(dim: usize) -> SteeringRule {
    SteeringRule::Tracking {
        gamma1: 1.5,
        gamma2: 0.2,
        target: Target::Line { origin: vec![1.0; dim], velocity: vec![0.3; dim] },
    }
}

pub fn check_permutation_equivariance(rule: &InfluenceRule, s: &Swarm, g: &[GainRule], perm: &[usize]) -> Check {
    let (n, dim) = (s.n, s.dim);
    let cfg = |gains: Vec<GainRule>, b: Vec<f64>| {
        ModelConfig::new(n, dim, rule.kernel)
            .with_influence(rule.clone())
            .with_gain(PerAgent::Each(gains))
            .with_friction(FrictionRule::new(PerAgent::Each(b), 1.0))
            .with_steering(tracking(dim))
            .with_eps(0.5)
    };
    let coeffs: Vec<f64> = (0..n).map(|i| 0.1 * i as f64).collect();
    let base = cfg(g.to_vec(), coeffs.clone());
    let permuted = cfg(perm.iter().map(|&i| g[i].clone()).collect(), perm.iter().map(|&i| coeffs[i]).collect());
    let take = |buf: &[f64]| -> Vec<f64> { perm.iter().flat_map(|&i| buf[i * dim..(i + 1) * dim].to_vec()).collect() };
    let ps = SwarmState::new(0.0, n, dim, take(&s.x), take(&s.v)).unwrap();
    let (_, dv) = ok(rhs_closed(&s.state(), &base))?;
    let (_, dvp) = ok(rhs_closed(&ps, &permuted))?;
    let expect = take(&dv);
    let scale = dv.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    for (a, b) in expect.iter().zip(&dvp) {
        ensure!((a - b).abs() <= 1e-12 * scale, "permuted rhs differs: {a} vs {b}");
    }
    Ok(())
}

pub fn check_active_set_nesting(a: &InfluenceMatrix, t1: f64, t2: f64) -> Check {
    let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
    let small = ok(active_sets(a, lo))?;
    let large = ok(active_sets(a, hi))?;
    for p in 0..a.n() {
        ensure!(large.per_agent[p].iter().all(|j| small.contains(p, *j)), "row {p} is not nested");
    }
    ensure!(large.global.iter().all(|j| small.global.contains(j)), "global set is not nested");
    Ok(())
}

pub fn check_stationary_residual(p: &InfluenceMatrix, g: &[f64]) -> Check {
    let q = ok(rate_matrix(p, g))?;
    let w = ok(stationary_distribution(&q))?;
    let rel = relative_residual(&q, &w);
    ensure!(rel <= 1e-12, "relative residual {rel}");
    let total: f64 = w.pi.iter().sum();
    ensure!((total - 1.0).abs() <= 1e-12 && w.pi.iter().all(|&x| x > 0.0), "pi is not a probability vector");
    Ok(())
}

pub fn check_spectrum(p: &InfluenceMatrix, g: &[f64]) -> Check {
    let q = ok(rate_matrix(p, g))?;
    let ev = rate_spectrum(&q);
    let zeros = ev.iter().filter(|z| z.norm() <= 1e-10).count();
    ensure!(zeros == 1, "{zeros} eigenvalues at zero: {ev:?}");
    ensure!(ev[1..].iter().all(|z| z.re < 0.0), "nonzero eigenvalue with re >= 0: {ev:?}");
    Ok(())
}

fn reduced_config(rule: &InfluenceRule, s: &Swarm, g: &[GainRule]) -> ModelConfig {
    ModelConfig::new(s.n, s.dim, rule.kernel)
        .with_influence(rule.clone())
        .with_gain(PerAgent::Each(g.to_vec()))
        .with_steering(tracking(s.dim))
}

/// `Σπ_i V_i(τ)` stays put along the frozen-gain layer.
pub fn check_transient_conservation(rule: &InfluenceRule, s: &Swarm, g: &[GainRule], tol: f64) -> Check {
    let cfg = reduced_config(rule, s, g);
    let p = ok(stochastic_matrix(&s.x, s.dim, rule))?;
    let w = ok(stationary_distribution(&ok(rate_matrix(&p, &cfg.gains_at_zero()))?))?;
    let traj = ok(simulate_transient(&s.state(), &cfg, 20.0, TransientGains::FrozenAtZero))?;
    let means = traj.weighted_means(&w.pi);
    for m in &means {
        for k in 0..s.dim {
            let drift = (m[k] - means[0][k]).abs();
            ensure!(drift < tol, "conserved quantity drifted by {drift}");
        }
    }
    Ok(())
}

pub fn check_transient_limit(rule: &InfluenceRule, s: &Swarm, g: &[GainRule], tol: f64) -> Check {
    let cfg = reduced_config(rule, s, g);
    let p = ok(stochastic_matrix(&s.x, s.dim, rule))?;
    let w = ok(stationary_distribution(&ok(rate_matrix(&p, &cfg.gains_at_zero()))?))?;
    let formula = ok(initial_flock_velocity(&s.v, s.dim, &w))?;
    let limit = ok(transient_limit(&s.state(), &cfg, TransientGains::FrozenAtZero))?;
    for k in 0..s.dim {
        let gap = (formula[k] - limit[k]).abs();
        ensure!(gap < tol, "formula {formula:?} vs limit {limit:?}");
    }
    Ok(())
}

pub fn check_rigid_reduced_motion(s: &Swarm, vf: &[f64]) -> Check {
    let w = flock_core::reduced::StationaryWeights { pi: vec![1.0 / s.n as f64; s.n], residual: 0.0 };
    let r0 = ok(ReducedState::new(0.0, s.dim, s.x.clone(), vf.to_vec()))?;
    let traj = ok(integrate_reduced(&r0, &tracking(s.dim), &FrictionRule::none(), &w, &IntegratorConfig::rk45(0.05, 10.0)))?;
    let dim = s.dim;
    for r in &traj.samples {
        for i in 0..s.n {
            for k in 0..dim {
                let now = r.x0[i * dim + k] - r.x0[k];
                let then = s.x[i * dim + k] - s.x[k];
                ensure!((now - then).abs() <= 1e-10, "relative position drifted at t = {}", r.t);
            }
        }
    }
    Ok(())
}

/// Directional derivative of every row sum of `P`, by central differences.
pub fn check_row_sum_derivative(rule: &InfluenceRule, s: &Swarm, dir: &[f64]) -> Check {
    let h = 1e-5;
    let sums = |sign: f64| -> std::result::Result<Vec<f64>, TestCaseError> {
        let x: Vec<f64> = s.x.iter().zip(dir).map(|(x, d)| x + sign * h * d).collect();
        let p = ok(stochastic_matrix(&x, s.dim, rule))?;
        Ok(p.rows().map(|r| r.iter().sum()).collect())
    };
    let (plus, minus) = (sums(1.0)?, sums(-1.0)?);
    for (a, b) in plus.iter().zip(&minus) {
        let d = (a - b) / (2.0 * h);
        ensure!(d.abs() <= 1e-9, "row sum derivative {d}");
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ActionInstance {
    pub s: Vec<f64>,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub theta: f64,
    pub m: f64,
}

/// Antisymmetric `S` with `|S_ij| ≤ M`, nonnegative `u`, `w`, and `θ` up to
/// `1/N`, sometimes with exact zeros and repeated entries.
pub fn action_instance() -> impl Strategy<Value = ActionInstance> {
    (1usize..=10).prop_flat_map(|n| {
        (
            prop::collection::vec(-1.0..1.0f64, n * n),
            prop::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.0..1.0f64], n),
            prop::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.0..1.0f64], n),
            0.01..1.0f64,
            prop::bool::ANY,
            0.1..5.0f64,
        )
            .prop_map(move |(raw, u, w, frac, saturate, m)| {
                let mut s = vec![0.0; n * n];
                for i in 0..n {
                    for j in i + 1..n {
                        let v = if saturate { m * raw[i * n + j].signum() } else { m * raw[i * n + j] };
                        s[i * n + j] = v;
                        s[j * n + i] = -v;
                    }
                }
                ActionInstance { s, u, w, theta: frac / n as f64, m }
            })
    })
}

pub fn check_maximal_action(inst: &ActionInstance) -> Check {
    let c = ok(maximal_action_oracle(&inst.s, &inst.u, &inst.w, inst.theta, inst.m))?;
    ensure!(c.holds, "|wᵀSu| = {} exceeds {} with λ = {}", c.lhs, c.bound, c.lambda);
    Ok(())
}

#[derive(Debug, Clone)]
pub struct HullInstance {
    pub dim: usize,
    pub points: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
}

pub fn hull_instance() -> impl Strategy<Value = HullInstance> {
    (2usize..=10, 1usize..=4).prop_flat_map(|(n, dim)| {
        (
            prop::collection::vec(-100.0..100.0f64, n * dim),
            prop::collection::vec(prop::collection::vec(prop_oneof![Just(0.0), 0.0..1.0f64], n), 1..8),
        )
            .prop_map(move |(points, mut weights)| {
                for w in &mut weights {
                    if w.iter().all(|x| *x == 0.0) {
                        w[0] = 1.0;
                    }
                }
                HullInstance { dim, points, weights }
            })
    })
}

pub fn check_hull(inst: &HullInstance) -> Check {
    let c = ok(hull_support_oracle(&inst.points, inst.dim, &inst.weights))?;
    ensure!(c.holds, "convex combination escapes the diameter slab: {}", c.worst);
    Ok(())
}

pub fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

/// Constant-gain open-loop influence used by the open-loop monitors.
pub fn open_loop_matrix(a: InfluenceMatrix) -> Arc<dyn Fn(f64) -> InfluenceMatrix + Send + Sync> {
    Arc::new(move |_| a.clone())
}
