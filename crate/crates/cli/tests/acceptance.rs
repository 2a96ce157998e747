//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any
//! criterion fails. Every random draw is seeded, so reruns are identical.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use common::*;
use flock_cli::commands::{self, Overrides};
use flock_cli::ExperimentConfig;
use flock_core::diagnostics::{
    diameter, energy_decay_check, flocking_certificate, monitor_contraction, SteeringBound, ThetaPolicy, Verdict,
};
use flock_core::integrator::default_dt;
use flock_core::model::{
    FrictionRule, GainRule, InfluenceRule, Kernel, Masking, OrientationBias, PerAgent, SteeringRule,
};
use flock_core::presets::{tracking_initial_state, tracking_model, tracking_target};
use flock_core::reduced::{
    compare_full_reduced, initial_flock_velocity, rate_matrix, stationary_distribution, stochastic_matrix,
    transient_limit, CompareOptions, TransientGains,
};
use flock_core::{integrate_plain, InfluenceMatrix, IntegratorConfig, ModelConfig, OpenLoop, SwarmState};
use proptest::strategy::Strategy;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Runs `check` on `cases` seeded draws of `strategy`.
fn suite<S, F>(cases: u32, strategy: S, check: F) -> Result<(), String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Check,
{
    let config = Config { cases, failure_persistence: None, max_shrink_iters: 256, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, check).map_err(|e| e.to_string())
}

fn with_gains(n: std::ops::RangeInclusive<usize>, d: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (Swarm, Vec<flock_core::model::GainRule>)> {
    swarm(n, d).prop_flat_map(|s| {
        let n = s.n;
        (proptest::strategy::Just(s), gains(n))
    })
}

fn criterion_1() -> Outcome {
    use proptest::prelude::*;
    let results = [
        ("row-stochastic", suite(500, (influence_rule(), swarm(1..=10, 1..=3)), |(r, s)| check_row_stochastic(&r, &s))),
        (
            "shift invariance",
            suite(500, (influence_rule(), swarm(1..=10, 1..=3), prop::collection::vec(-50.0..50.0f64, 3)), |(r, s, y)| {
                check_shift_invariance(&r, &s, &y)
            }),
        ),
        (
            "acceleration bound",
            suite(500, (influence_rule(), with_gains(1..=10, 1..=3)), |(r, (s, g))| check_acceleration_bound(&r, &s, &g)),
        ),
        (
            "active-set nesting",
            suite(500, (stochastic(1..=10), 1e-3..0.6f64, 1e-3..0.6f64), |(a, t1, t2)| check_active_set_nesting(&a, t1, t2)),
        ),
        ("piQ residual", suite(1000, stochastic_with_gains(1..=20), |(p, g)| check_stationary_residual(&p, &g))),
        ("Q spectrum", suite(500, stochastic_with_gains(2..=10), |(p, g)| check_spectrum(&p, &g))),
        (
            "rigid reduced motion",
            suite(500, (swarm(1..=10, 1..=3), prop::collection::vec(-2.0..2.0f64, 3)), |(s, vf)| {
                check_rigid_reduced_motion(&s, &vf[..s.dim])
            }),
        ),
        ("convex hull", suite(500, (influence_rule(), swarm(2..=10, 1..=3)), |(r, s)| check_convex_hull(&r, &s))),
        (
            "permutation equivariance",
            suite(
                500,
                (influence_rule(), swarm(1..=10, 1..=3).prop_flat_map(|s| {
                    let n = s.n;
                    (Just(s), gains(n), permutation(n))
                })),
                |(r, (s, g, p))| check_permutation_equivariance(&r, &s, &g, &p),
            ),
        ),
    ];
    let failed: Vec<String> = results
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    let names: Vec<&str> = results.iter().map(|(n, _)| *n).collect();
    if failed.is_empty() {
        outcome(true, format!("{} properties, 500 draws each (1000 for piQ)", names.len()))
    } else {
        outcome(false, failed.join("; "))
    }
}

fn criterion_2() -> Outcome {
    let a = suite(500, action_instance(), |i| check_maximal_action(&i));
    let b = suite(500, hull_instance(), |i| check_hull(&i));
    match (a, b) {
        (Ok(()), Ok(())) => outcome(true, "maximal action and hull support: 500 instances each, no violations"),
        (a, b) => outcome(false, format!("maximal action: {a:?}; hull support: {b:?}")),
    }
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for v0 in [0.5, 1.0, 3.0] {
        let cfg = ModelConfig::new(1, 1, Kernel::InversePower { beta: 0.3 })
            .with_friction(FrictionRule::new(PerAgent::Uniform(1.0), 1.0));
        let s = SwarmState::from_rows(0.0, &[vec![0.0]], &[vec![v0]]).unwrap();
        let traj = integrate_plain(&s, &cfg, &IntegratorConfig::rk4(1e-3, 10.0).with_sample_every(100)).unwrap();
        for st in traj.states() {
            worst = worst.max((st.velocity(0)[0] - v0 / (1.0 + v0 * st.t)).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bound_fail = 0;
    let mut max_excess = f64::NEG_INFINITY;
    let runs = 30;
    for _ in 0..runs {
        let coeffs: Vec<f64> = (0..3).map(|_| rng.gen_range(0.2..2.0)).collect();
        let r = rng.gen_range(0.5..2.0);
        let friction = FrictionRule::new(PerAgent::Each(coeffs), r);
        let cfg = ModelConfig::new(3, 2, Kernel::InversePower { beta: rng.gen_range(0.0..1.5) })
            .with_gain(GainRule::saturating(rng.gen_range(0.5..5.0), rng.gen_range(0.2..2.0)))
            .with_friction(friction.clone());
        let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let v: Vec<f64> = (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let s = SwarmState::new(0.0, 3, 2, x, v).unwrap();
        let traj = integrate_plain(&s, &cfg, &IntegratorConfig::rk4(1e-3, 20.0).with_sample_every(10)).unwrap();
        let rep = energy_decay_check(&traj, &friction, &SteeringRule::None, 1e-6).unwrap();
        max_excess = max_excess.max(rep.max_bound_excess);
        if !rep.bound_holds {
            bound_fail += 1;
        }
    }
    outcome(
        worst <= 1e-6 && bound_fail == 0,
        format!(
            "closed-form max error {worst:.3e} (<= 1e-6); energy bound held in {}/{runs} runs, max excess {max_excess:.3e}",
            runs - bound_fail
        ),
    )
}

fn criterion_4() -> Outcome {
    use rayon::prelude::*;
    let target = tracking_target();
    let rows: Vec<(f64, Option<f64>, f64, f64)> = [0.1, 0.01, 0.001]
        .par_iter()
        .map(|&eps| {
            let icfg = IntegratorConfig::rk45(0.01, 200.0);
            let traj = integrate_plain(&tracking_initial_state(), &tracking_model(eps), &icfg).unwrap();
            let (mut hit, mut after5, mut track) = (None, 0.0f64, 0.0f64);
            let (mut y, mut yd) = ([0.0; 2], [0.0; 2]);
            for st in traj.states() {
                let d_v = diameter(st.velocities(), 2).0;
                if hit.is_none() && d_v < 1e-2 {
                    hit = Some(st.t);
                }
                if st.t >= 5.0 {
                    after5 = after5.max(d_v);
                }
                if st.t >= 150.0 {
                    target.eval(st.t, &mut y, &mut yd);
                    let c = st.centroid();
                    track = track.max(((c[0] - y[0]).powi(2) + (c[1] - y[1]).powi(2)).sqrt());
                }
            }
            (eps, hit, after5, track)
        })
        .collect();
    let pass = rows.iter().all(|&(_, hit, after5, track)| hit.is_some_and(|t| t <= 5.0) && after5 < 1e-2 && track < 1.0);
    let detail: Vec<String> = rows
        .iter()
        .map(|(eps, hit, after5, track)| {
            format!("eps {eps}: d_V<1e-2 from t={}, max d_V on [5,200] {after5:.2e}, max centroid-target on [150,200] {track:.3}",
                hit.map_or("never".into(), |t| format!("{t:.2}")))
        })
        .collect();
    outcome(pass, detail.join("; "))
}

fn formula_vs_limit(s: &SwarmState, cfg: &ModelConfig) -> (f64, f64) {
    let dim = s.dim();
    let p = stochastic_matrix(s.positions(), dim, &cfg.influence).unwrap();
    let w = stationary_distribution(&rate_matrix(&p, &cfg.gains_at_zero()).unwrap()).unwrap();
    let formula = initial_flock_velocity(s.velocities(), dim, &w).unwrap();
    let limit = transient_limit(s, cfg, TransientGains::FrozenAtZero).unwrap();
    let gap = formula.iter().zip(&limit).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let traj = flock_core::reduced::simulate_transient(s, cfg, 50.0, TransientGains::FrozenAtZero).unwrap();
    let means = traj.weighted_means(&w.pi);
    let drift = means
        .iter()
        .flat_map(|m| m.iter().zip(&means[0]).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    (gap, drift)
}

fn criterion_5() -> Outcome {
    let (tracking_gap, tracking_drift) = formula_vs_limit(&tracking_initial_state(), &tracking_model(0.1));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_gap, mut worst_drift) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.gen_range(1..=8);
        let dim = rng.gen_range(1..=3);
        let kernel = Kernel::InversePower { beta: rng.gen_range(0.0..2.0) };
        let mut rule = InfluenceRule::plain(kernel);
        if rng.gen_bool(0.3) {
            rule.masking = Some(Masking { kappa: rng.gen_range(0.0..0.8), width: rng.gen_range(0.5..3.0) });
        }
        let gains: Vec<GainRule> = (0..n)
            .map(|_| GainRule::Saturating {
                accel: rng.gen_range(0.5..10.0),
                offset: rng.gen_range(0.05..2.0),
                power: rng.gen_range(0.5..1.5),
            })
            .collect();
        let cfg = ModelConfig::new(n, dim, kernel).with_influence(rule).with_gain(PerAgent::Each(gains));
        let x: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let v: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let (gap, drift) = formula_vs_limit(&SwarmState::new(0.0, n, dim, x, v).unwrap(), &cfg);
        worst_gap = worst_gap.max(gap);
        worst_drift = worst_drift.max(drift);
    }
    // The nonlinear layer leaves at a different velocity; reported, not graded.
    let s = tracking_initial_state();
    let nonlinear = transient_limit(&s, &tracking_model(0.1), TransientGains::StateDependent).unwrap();
    let p = stochastic_matrix(s.positions(), 2, &tracking_model(0.1).influence).unwrap();
    let w = stationary_distribution(&rate_matrix(&p, &tracking_model(0.1).gains_at_zero()).unwrap()).unwrap();
    let formula = initial_flock_velocity(s.velocities(), 2, &w).unwrap();
    let nl_gap = formula.iter().zip(&nonlinear).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    outcome(
        tracking_gap < 1e-6 && worst_gap < 1e-6 && tracking_drift < 1e-8 && worst_drift < 1e-8,
        format!(
            "preset gap {tracking_gap:.2e}, drift {tracking_drift:.2e}; 100 random: max gap {worst_gap:.2e}, max drift {worst_drift:.2e}; \
             state-dependent layer differs from the formula by {nl_gap:.3e} on the preset (info)"
        ),
    )
}

fn criterion_6() -> Outcome {
    let rows = compare_full_reduced(
        &tracking_initial_state(),
        &tracking_model(1.0),
        &[0.1, 0.01, 0.001],
        &CompareOptions::default(),
    )
    .unwrap();
    let v: Vec<f64> = rows.iter().map(|r| r.velocity_error).collect();
    let x: Vec<f64> = rows.iter().map(|r| r.position_error).collect();
    let decreasing = |e: &[f64]| e.windows(2).all(|w| w[1] < w[0]);
    let ratio = v[1] / v[2];
    outcome(
        decreasing(&v) && decreasing(&x) && (3.0..=30.0).contains(&ratio),
        format!(
            "velocity errors {:.3e}, {:.3e}, {:.3e}; position errors {:.3e}, {:.3e}, {:.3e}; err(0.01)/err(0.001) = {ratio:.2} (position {:.2})",
            v[0], v[1], v[2], x[0], x[1], x[2], x[1] / x[2]
        ),
    )
}

fn random_certificate_config(rng: &mut ChaCha8Rng) -> (SwarmState, ModelConfig) {
    let n = rng.gen_range(2..=8);
    let kernel = Kernel::InversePower { beta: rng.gen_range(0.1..1.5) };
    let mut rule = InfluenceRule::plain(kernel);
    if rng.gen_bool(0.3) {
        rule.masking = Some(Masking { kappa: rng.gen_range(0.0..0.5), width: rng.gen_range(0.5..3.0) });
    }
    if rng.gen_bool(0.3) {
        rule.orientation = Some(OrientationBias { eta: rng.gen_range(0.0..0.5), delta: rng.gen_range(0.1..1.0) });
    }
    let cfg = ModelConfig::new(n, 2, kernel)
        .with_influence(rule)
        .with_gain(GainRule::Saturating { accel: rng.gen_range(1.0..10.0), offset: rng.gen_range(0.05..1.0), power: 0.5 });
    let spread = rng.gen_range(0.5..5.0);
    let x: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-spread..spread)).collect();
    let v: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (SwarmState::new(0.0, n, 2, x, v).unwrap(), cfg)
}

fn criterion_7() -> Outcome {
    use rayon::prelude::*;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut certified = Vec::new();
    let mut attempts = 0;
    while certified.len() < 50 && attempts < 5000 {
        attempts += 1;
        let (s, cfg) = random_certificate_config(&mut rng);
        let cert = flocking_certificate(&s, &cfg, SteeringBound::ZERO).unwrap();
        if matches!(cert.verdict, Verdict::Unconditional | Verdict::ConditionalSatisfied) {
            certified.push((s, cfg, cert));
        }
    }
    let kinds = certified.iter().filter(|c| c.2.verdict == Verdict::Unconditional).count();
    let failures: Vec<String> = certified
        .par_iter()
        .enumerate()
        .filter_map(|(k, (s, cfg, cert))| {
            let traj = integrate_plain(s, cfg, &IntegratorConfig::rk4(1e-2, 200.0)).unwrap();
            let d_v0 = cert.d_v0;
            let d_star = cert.d_star.unwrap();
            let rate = cert.envelope_rate.unwrap();
            let mut max_dx = 0.0f64;
            let mut envelope_ok = true;
            for st in traj.states() {
                max_dx = max_dx.max(diameter(st.positions(), 2).0);
                let d_v = diameter(st.velocities(), 2).0;
                if d_v > (-rate * st.t).exp() * d_v0 + 1e-9 * d_v0.max(1.0) {
                    envelope_ok = false;
                }
            }
            let d_v_end = diameter(traj.last().velocities(), 2).0;
            let ok = d_v_end < 1e-3 * d_v0 && max_dx <= d_star + 1e-6 && envelope_ok;
            (!ok).then(|| {
                format!("config {k}: d_V(200)/d_V(0) = {:.2e}, max d_X {max_dx:.4} vs d_star {d_star:.4}, envelope {envelope_ok}", d_v_end / d_v0)
            })
        })
        .collect();
    outcome(
        certified.len() == 50 && failures.is_empty(),
        format!(
            "{} certified configs ({kinds} unconditional) from {attempts} draws; {} false positives{}",
            certified.len(),
            failures.len(),
            if failures.is_empty() { String::new() } else { format!(": {}", failures.join("; ")) }
        ),
    )
}

fn random_open_loop(rng: &mut ChaCha8Rng) -> (SwarmState, OpenLoop, f64) {
    let n = rng.gen_range(2..=8);
    let dim = rng.gen_range(1..=3);
    let base: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..3.0)).collect();
    let phase: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
    let omega = rng.gen_range(0.2..2.0);
    let c: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let cphase: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
    let alpha = Arc::new(move |t: f64| -> Vec<f64> {
        base.iter().zip(&phase).map(|(a, p)| a * (1.0 + 0.5 * (omega * t + p).sin())).collect()
    });
    let influence = Arc::new(move |t: f64| -> InfluenceMatrix {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let w: Vec<f64> = (0..n).map(|j| c[i * n + j] * (1.0 + 0.5 * (omega * t + cphase[i * n + j]).sin())).collect();
                let s: f64 = w.iter().sum();
                w.into_iter().map(|x| x / s).collect()
            })
            .collect();
        InfluenceMatrix::from_rows(&rows).unwrap()
    });
    let offsets: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let sys = OpenLoop::new(n, dim, alpha, influence)
        .with_steering(SteeringRule::Decaying { offsets: PerAgent::Each(offsets), rate: rng.gen_range(0.1..1.0) });
    let x: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let v: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let theta = rng.gen_range(0.02..1.0 / n as f64);
    (SwarmState::new(0.0, n, dim, x, v).unwrap(), sys, theta)
}

fn criterion_8() -> Outcome {
    let eps = 0.1;
    let dt = default_dt(eps);
    let every = (1e-2 / dt).round() as usize;
    let traj = integrate_plain(&tracking_initial_state(), &tracking_model(eps), &IntegratorConfig::rk4(dt, 100.0).with_sample_every(every)).unwrap();
    let circle = monitor_contraction(&traj, &tracking_model(eps), ThetaPolicy::Psi).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut open_fail = Vec::new();
    let mut worst_slack = f64::INFINITY;
    for k in 0..20 {
        let (s, sys, theta) = random_open_loop(&mut rng);
        let traj = integrate_plain(&s, &sys, &IntegratorConfig::rk4(1e-3, 20.0).with_sample_every(10)).unwrap();
        let rep = monitor_contraction(&traj, &sys, ThetaPolicy::Fixed(theta)).unwrap();
        worst_slack = worst_slack.min(rep.worst_slack);
        if !rep.holds {
            open_fail.push(format!("run {k}: {} violations, worst slack {:.3e}", rep.violations, rep.worst_slack));
        }
    }
    outcome(
        circle.holds && open_fail.is_empty(),
        format!(
            "preset: {} samples, {} violations, worst slack {:.3e} (max tol {:.3e}); 20 open-loop runs: {} failing, worst slack {worst_slack:.3e}{}",
            circle.samples,
            circle.violations,
            circle.worst_slack,
            circle.max_tol,
            open_fail.len(),
            if open_fail.is_empty() { String::new() } else { format!(" ({})", open_fail.join("; ")) }
        ),
    )
}

fn criterion_9() -> Outcome {
    // Rows (1/2, 1/2) and gain 2: d_V(t) = 2e^{-2t}.
    let sys = OpenLoop::new(2, 1, Arc::new(|_| vec![2.0; 2]), Arc::new(|_| InfluenceMatrix::uniform(2)));
    let s = SwarmState::from_rows(0.0, &[vec![0.0], vec![0.0]], &[vec![0.0], vec![2.0]]).unwrap();
    let exact = 2.0 * (-2.0f64).exp();
    let errs: Vec<f64> = (0..5)
        .map(|k| {
            let dt = 0.1 / 2f64.powi(k);
            let last = integrate_plain(&s, &sys, &IntegratorConfig::rk4(dt, 1.0)).unwrap().last().clone();
            ((last.velocity(1)[0] - last.velocity(0)[0]) - exact).abs()
        })
        .collect();
    let factors: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    outcome(
        factors.iter().all(|f| (14.0..=18.0).contains(f)),
        format!(
            "dt 0.1 to 0.00625, factors per halving: {}",
            factors.iter().map(|f| format!("{f:.3}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn artifacts(exp: &ExperimentConfig, ov: &Overrides, threads: usize, dir: &Path) -> Vec<Vec<u8>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        commands::run(exp, ov, dir).unwrap();
        commands::transient(exp, ov, None, dir).unwrap();
    });
    ["trajectory.csv", "transient.csv"].iter().map(|f| std::fs::read(dir.join(f)).unwrap()).collect()
}

const LARGE_RANDOM: &str = r#"
[model]
eps = 0.5
kernel = { kind = "inverse_power", beta = 0.6 }
masking = { kappa = 0.3, width = 1.5 }
gain = { kind = "saturating", accel = 4.0, offset = 0.5, power = 0.5 }

[initial]
random = { n = 80, dim = 2, position_scale = 10.0 }

[integrator]
t_end = 0.5
sample_spacing = 0.05
"#;

fn criterion_10() -> Outcome {
    let circle_cfg = ExperimentConfig::parse(flock_cli::presets::preset("circle-tracking").unwrap()).unwrap();
    let large = ExperimentConfig::parse(LARGE_RANDOM).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let mut details = Vec::new();
    let mut pass = true;
    for (name, exp, ov) in [
        ("circle-tracking", &circle_cfg, Overrides::default()),
        ("random N=80", &large, Overrides { seed: Some(42), eps: None }),
    ] {
        let runs: Vec<Vec<Vec<u8>>> = [1, 1, 4, 8]
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                let dir = tmp.path().join(format!("{}-{k}", name.replace(' ', "_")));
                std::fs::create_dir_all(&dir).unwrap();
                artifacts(exp, &ov, t, &dir)
            })
            .collect();
        let same = runs.iter().all(|r| r == &runs[0]);
        pass &= same;
        details.push(format!("{name}: {} bytes, identical across 4 runs at 1/1/4/8 threads: {same}", runs[0][0].len()));
    }
    outcome(pass, details.join("; "))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("invariant suite", criterion_1),
        ("lemma oracles", criterion_2),
        ("friction decay", criterion_3),
        ("tracking flock at three eps", criterion_4),
        ("transient-layer consistency", criterion_5),
        ("reduced-model agreement", criterion_6),
        ("certificate soundness", criterion_7),
        ("contraction monitor", criterion_8),
        ("rk4 order", criterion_9),
        ("determinism", criterion_10),
    ];
    let start = Instant::now();
    let handles: Vec<_> = criteria
        .iter()
        .map(|&(name, f)| {
            std::thread::spawn(move || {
                let t = Instant::now();
                let o = std::panic::catch_unwind(f).unwrap_or_else(|e| {
                    let msg = e
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_default();
                    outcome(false, format!("panicked: {msg}"))
                });
                (name, o, t.elapsed().as_secs_f64())
            })
        })
        .collect();
    let mut failed = 0;
    for (k, h) in handles.into_iter().enumerate() {
        let (name, o, secs) = h.join().unwrap();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} [{name}] {} ({secs:.1} s)",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {}/10 passed in {:.1} s", 10 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
