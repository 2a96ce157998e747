//! Fixed-step RK4 and adaptive Dormand–Prince 5(4) time integration.

use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsRecord;
use crate::dynamics::{Dynamics, LoopSnapshot};
use crate::error::{FlockError, Result};
use crate::state::SwarmState;

/// Any state component beyond this magnitude counts as a blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Rk45,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Step for rk4; initial step for rk45. Samples are spaced
    /// `dt * sample_every` apart for both methods.
    pub dt: f64,
    pub rtol: f64,
    pub atol: f64,
    pub t_end: f64,
    pub sample_every: usize,
    /// Smallest step rk45 may take before giving up.
    pub dt_min: f64,
}

impl IntegratorConfig {
    pub fn rk4(dt: f64, t_end: f64) -> Self {
        Self { method: Method::Rk4, dt, rtol: 1e-8, atol: 1e-10, t_end, sample_every: 1, dt_min: 1e-12 }
    }

    pub fn rk45(dt: f64, t_end: f64) -> Self {
        Self { method: Method::Rk45, ..Self::rk4(dt, t_end) }
    }

    /// rk4 with `dt = min(1e-2, ε/20)`.
    pub fn for_eps(eps: f64, t_end: f64) -> Self {
        Self::rk4(default_dt(eps), t_end)
    }

    pub fn with_sample_every(mut self, k: usize) -> Self {
        self.sample_every = k;
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.dt) || !pos(self.t_end) || !pos(self.rtol) || !pos(self.atol) || !pos(self.dt_min) {
            return Err(FlockError::Domain(
                "integrator needs dt, t_end, rtol, atol, dt_min all positive".into(),
            ));
        }
        if self.sample_every == 0 {
            return Err(FlockError::Domain("sample_every must be >= 1".into()));
        }
        Ok(())
    }

    pub fn sample_spacing(&self) -> f64 {
        self.dt * self.sample_every as f64
    }
}

/// Default step for an ε-scaled model: ≥ 20 steps per fast time constant.
pub fn default_dt(eps: f64) -> f64 {
    (eps / 20.0).min(1e-2)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub steps: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

/// First-order system `ẏ = f(t, y)` on a flat vector.
pub trait OdeSystem {
    fn len(&self) -> usize;
    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

fn check_state(y: &[f64], last_valid_t: f64) -> Result<()> {
    if y.iter().any(|v| !(v.abs() <= BLOW_UP_THRESHOLD)) {
        return Err(FlockError::BlowUp { last_valid_t });
    }
    Ok(())
}

struct Rk4Work {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Work {
    fn new(m: usize) -> Self {
        Self { k1: vec![0.0; m], k2: vec![0.0; m], k3: vec![0.0; m], k4: vec![0.0; m], tmp: vec![0.0; m] }
    }
}

fn rk4_advance<S: OdeSystem + ?Sized>(sys: &mut S, t: f64, y: &mut [f64], h: f64, w: &mut Rk4Work) -> Result<()> {
    let m = y.len();
    sys.rhs(t, y, &mut w.k1)?;
    for i in 0..m {
        w.tmp[i] = y[i] + 0.5 * h * w.k1[i];
    }
    check_state(&w.tmp, t)?;
    sys.rhs(t + 0.5 * h, &w.tmp, &mut w.k2)?;
    for i in 0..m {
        w.tmp[i] = y[i] + 0.5 * h * w.k2[i];
    }
    check_state(&w.tmp, t)?;
    sys.rhs(t + 0.5 * h, &w.tmp, &mut w.k3)?;
    for i in 0..m {
        w.tmp[i] = y[i] + h * w.k3[i];
    }
    check_state(&w.tmp, t)?;
    sys.rhs(t + h, &w.tmp, &mut w.k4)?;
    for i in 0..m {
        y[i] += h / 6.0 * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
    }
    check_state(y, t)
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b* (error weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct DpWork {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    ynew: Vec<f64>,
}

impl DpWork {
    fn new(m: usize) -> Self {
        Self { k: std::array::from_fn(|_| vec![0.0; m]), tmp: vec![0.0; m], ynew: vec![0.0; m] }
    }
}

/// One trial step; `k[0]` must hold `f(t, y)` on entry. Returns the scaled
/// error norm; on return `ynew` holds the 5th-order solution and `k[6]`
/// holds `f(t+h, ynew)` (FSAL).
fn dp_trial<S: OdeSystem + ?Sized>(
    sys: &mut S,
    t: f64,
    y: &[f64],
    h: f64,
    rtol: f64,
    atol: f64,
    w: &mut DpWork,
) -> Result<f64> {
    let m = y.len();
    macro_rules! stage {
        ($dst:expr, $c:expr, $($a:expr => $kk:expr),+) => {{
            for i in 0..m {
                w.tmp[i] = y[i] + h * (0.0 $(+ $a * w.k[$kk][i])+);
            }
            check_state(&w.tmp, t)?;
            let (head, tail) = w.k.split_at_mut($dst);
            let _ = head;
            sys.rhs(t + $c * h, &w.tmp, &mut tail[0])?;
        }};
    }
    stage!(1, C2, A21 => 0);
    stage!(2, C3, A31 => 0, A32 => 1);
    stage!(3, C4, A41 => 0, A42 => 1, A43 => 2);
    stage!(4, C5, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
    stage!(5, 1.0, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
    for i in 0..m {
        w.ynew[i] = y[i]
            + h * (B1 * w.k[0][i] + B3 * w.k[2][i] + B4 * w.k[3][i] + B5 * w.k[4][i] + B6 * w.k[5][i]);
    }
    check_state(&w.ynew, t)?;
    {
        let (head, tail) = w.k.split_at_mut(6);
        let _ = head;
        sys.rhs(t + h, &w.ynew, &mut tail[0])?;
    }
    let mut acc = 0.0;
    for i in 0..m {
        let e = h
            * (E1 * w.k[0][i] + E3 * w.k[2][i] + E4 * w.k[3][i] + E5 * w.k[4][i] + E6 * w.k[5][i]
                + E7 * w.k[6][i]);
        let sc = atol + rtol * y[i].abs().max(w.ynew[i].abs());
        acc += (e / sc) * (e / sc);
    }
    Ok((acc / m.max(1) as f64).sqrt())
}

/// Integrates `sys` from `t0` to `icfg.t_end`, calling `observer(t, y)` at
/// `t0` and at every sample time (the last one at `t_end`).
pub fn solve<S, F>(sys: &mut S, t0: f64, y0: &[f64], icfg: &IntegratorConfig, mut observer: F) -> Result<IntegratorStats>
where
    S: OdeSystem + ?Sized,
    F: FnMut(f64, &[f64]) -> Result<()>,
{
    icfg.validate()?;
    if y0.len() != sys.len() {
        return Err(FlockError::Dimension(format!(
            "initial vector has {} entries, system expects {}",
            y0.len(),
            sys.len()
        )));
    }
    if !(icfg.t_end > t0) {
        return Err(FlockError::Domain(format!("t_end = {} must exceed t0 = {t0}", icfg.t_end)));
    }
    check_state(y0, t0)?;
    observer(t0, y0)?;
    match icfg.method {
        Method::Rk4 => solve_rk4(sys, t0, y0, icfg, observer),
        Method::Rk45 => solve_dp45(sys, t0, y0, icfg, observer),
    }
}

fn step_count(span: f64, dt: f64) -> u64 {
    let q = span / dt;
    let r = q.round();
    if (q - r).abs() <= 1e-9 * r.max(1.0) {
        r.max(1.0) as u64
    } else {
        q.ceil() as u64
    }
}

fn solve_rk4<S, F>(sys: &mut S, t0: f64, y0: &[f64], icfg: &IntegratorConfig, mut observer: F) -> Result<IntegratorStats>
where
    S: OdeSystem + ?Sized,
    F: FnMut(f64, &[f64]) -> Result<()>,
{
    let steps = step_count(icfg.t_end - t0, icfg.dt);
    let mut y = y0.to_vec();
    let mut w = Rk4Work::new(y.len());
    let mut stats = IntegratorStats::default();
    let mut t = t0;
    for k in 1..=steps {
        let t_next = if k == steps { icfg.t_end } else { t0 + k as f64 * icfg.dt };
        rk4_advance(sys, t, &mut y, t_next - t, &mut w)?;
        t = t_next;
        stats.steps += 1;
        stats.rhs_evals += 4;
        if k % icfg.sample_every as u64 == 0 || k == steps {
            observer(t, &y)?;
        }
    }
    Ok(stats)
}

fn solve_dp45<S, F>(sys: &mut S, t0: f64, y0: &[f64], icfg: &IntegratorConfig, mut observer: F) -> Result<IntegratorStats>
where
    S: OdeSystem + ?Sized,
    F: FnMut(f64, &[f64]) -> Result<()>,
{
    let spacing = icfg.sample_spacing();
    let n_samples = step_count(icfg.t_end - t0, spacing);
    let sample_time = |j: u64| if j == n_samples { icfg.t_end } else { t0 + j as f64 * spacing };
    let mut y = y0.to_vec();
    let mut w = DpWork::new(y.len());
    let mut stats = IntegratorStats::default();
    sys.rhs(t0, &y, &mut w.k[0])?;
    stats.rhs_evals += 1;
    let mut t = t0;
    let mut h = icfg.dt;
    let mut next = 1;
    while next <= n_samples {
        let target = sample_time(next);
        let remaining = target - t;
        let landing = h >= remaining * (1.0 - 1e-12);
        let h_try = if landing { remaining } else { h };
        // An overflowing trial only says the step was too long; the run has
        // blown up once no step above dt_min stays finite.
        let err = match dp_trial(sys, t, &y, h_try, icfg.rtol, icfg.atol, &mut w) {
            Ok(e) if e.is_finite() => e,
            Ok(_) | Err(FlockError::BlowUp { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        stats.rhs_evals += 6;
        if err == f64::INFINITY {
            stats.rejected += 1;
            h = 0.1 * h_try;
            if h < icfg.dt_min {
                return Err(FlockError::BlowUp { last_valid_t: t });
            }
        } else if err <= 1.0 {
            t = if landing { target } else { t + h_try };
            std::mem::swap(&mut y, &mut w.ynew);
            w.k.swap(0, 6);
            stats.steps += 1;
            if landing {
                observer(t, &y)?;
                next += 1;
            }
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // A clipped landing step says nothing about the usable step size.
            if !(landing && h_try < h) {
                h = h_try * grow;
            }
        } else {
            stats.rejected += 1;
            h = h_try * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            if h < icfg.dt_min {
                return Err(FlockError::StepUnderflow { t, dt: h });
            }
        }
    }
    Ok(stats)
}

/// [`OdeSystem`] view of a flocking system on packed `[x, v]`.
pub struct SwarmSystem<'a, D: Dynamics + ?Sized> {
    dynamics: &'a D,
    snap: LoopSnapshot,
    m: usize,
}

impl<'a, D: Dynamics + ?Sized> SwarmSystem<'a, D> {
    pub fn new(dynamics: &'a D) -> Self {
        Self { dynamics, snap: LoopSnapshot::default(), m: dynamics.n() * dynamics.dim() }
    }
}

impl<D: Dynamics + ?Sized> OdeSystem for SwarmSystem<'_, D> {
    fn len(&self) -> usize {
        2 * self.m
    }

    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let (x, v) = y.split_at(self.m);
        self.dynamics.snapshot_into(t, x, v, &mut self.snap)?;
        let (dx, dv) = dy.split_at_mut(self.m);
        dx.copy_from_slice(v);
        self.snap.acceleration(v, dv);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub state: SwarmState,
    pub record: Option<DiagnosticsRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub stats: IntegratorStats,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.state.t).collect()
    }

    pub fn states(&self) -> impl Iterator<Item = &SwarmState> {
        self.samples.iter().map(|s| &s.state)
    }

    pub fn last(&self) -> &SwarmState {
        &self.samples.last().expect("trajectories hold at least the initial sample").state
    }
}

/// Integrates a flocking system. `observer` runs on every sample on the
/// integrating thread and may attach a diagnostics record.
pub fn integrate<D, O>(initial: &SwarmState, dynamics: &D, icfg: &IntegratorConfig, mut observer: O) -> Result<Trajectory>
where
    D: Dynamics + ?Sized,
    O: FnMut(&SwarmState) -> Result<Option<DiagnosticsRecord>>,
{
    let (n, dim) = (initial.n(), initial.dim());
    if n != dynamics.n() || dim != dynamics.dim() {
        return Err(FlockError::Dimension(format!(
            "initial state is {n}x{dim}, system is {}x{}",
            dynamics.n(),
            dynamics.dim()
        )));
    }
    let mut sys = SwarmSystem::new(dynamics);
    let mut samples = Vec::new();
    let stats = solve(&mut sys, initial.t, &initial.pack(), icfg, |t, y| {
        let state = SwarmState::unpack(t, n, dim, y);
        let record = observer(&state)?;
        samples.push(Sample { state, record });
        Ok(())
    })?;
    Ok(Trajectory { samples, stats })
}

/// Integrates without diagnostics.
pub fn integrate_plain<D: Dynamics + ?Sized>(initial: &SwarmState, dynamics: &D, icfg: &IntegratorConfig) -> Result<Trajectory> {
    integrate(initial, dynamics, icfg, |_| Ok(None))
}

/// One classical RK4 step of a flocking system.
pub fn step_rk4<D: Dynamics + ?Sized>(state: &SwarmState, dynamics: &D, dt: f64) -> Result<SwarmState> {
    if !(dt >= 0.0) {
        return Err(FlockError::Domain(format!("step must be >= 0, got {dt}")));
    }
    if dt == 0.0 {
        return Ok(state.clone());
    }
    let mut sys = SwarmSystem::new(dynamics);
    let mut y = state.pack();
    let mut w = Rk4Work::new(y.len());
    rk4_advance(&mut sys, state.t, &mut y, dt, &mut w)?;
    Ok(SwarmState::unpack(state.t + dt, state.n(), state.dim(), &y))
}
