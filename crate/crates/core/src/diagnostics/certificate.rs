//! A priori flocking certificate.
//!
//! Along any solution with `‖v̄_i − v_i‖ ≤ M` the velocity diameter obeys
//! `d_V' ≤ −(α̲/ε)·N·ψ(d_X)·d_V + d_β`, because two rows of a stochastic
//! matrix whose entries are all at least `ψ` overlap in mass `Nψ`. The
//! functional `d_V + (α̲/ε)N∫_{d_X(0)}^{d_X}ψ − ∫d_β` is then nonincreasing,
//! which bounds `d_X` by the `d_star` solving
//! `(α̲/ε)N∫_{d_X(0)}^{d_star}ψ = d_V(0) + ∫₀^∞d_β`.

use serde::{Deserialize, Serialize};

use super::{alpha_lower_bound, diameter, psi_lower_bound};
use crate::error::Result;
use crate::model::{InfluenceRule, ModelConfig};
use crate::state::SwarmState;

/// Fitted tail exponents within this distance of −1 are not classified.
pub const EXPONENT_MARGIN: f64 = 0.05;

const QUAD_TOL: f64 = 1e-12;
const QUAD_DEPTH: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Unconditional,
    ConditionalSatisfied,
    ConditionalViolated,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailClass {
    Divergent,
    Convergent,
    Inconclusive,
}

/// What is known about the steering diameter `d_β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringBound {
    /// `∫₀^∞ d_β dt`, analytic or user-asserted.
    pub integral: f64,
    /// Whether `d_β(t) → 0`.
    pub decays: bool,
}

impl SteeringBound {
    pub const ZERO: SteeringBound = SteeringBound { integral: 0.0, decays: true };

    /// Closed-form bound for open-loop rules, when one exists.
    pub fn from_config(cfg: &ModelConfig) -> Option<Self> {
        cfg.steering
            .steering_diameter_integral(cfg.n)
            .map(|integral| SteeringBound { integral, decays: integral.is_finite() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlockingCertificate {
    pub n: usize,
    pub d_x0: f64,
    pub d_v0: f64,
    pub steering_integral: f64,
    /// `d_V(0) + ∫d_β`, also the radius of the gain ball.
    pub lhs: f64,
    /// `α̲/ε` over the ball of radius `lhs`.
    pub alpha_lower: Option<f64>,
    pub tail_exponent: f64,
    pub tail_class: TailClass,
    pub r_max: f64,
    /// `∫_{d_X(0)}^{r_max} ψ` by quadrature.
    pub psi_integral_truncated: Option<f64>,
    /// Truncated integral plus the fitted tail; `None` when divergent or
    /// unknown.
    pub psi_integral_from_dx0: Option<f64>,
    pub verdict: Verdict,
    pub d_star: Option<f64>,
    /// `(α̲/ε)·N·ψ(d_star)`, the exponential decay rate of `d_V`.
    pub envelope_rate: Option<f64>,
    pub notes: Vec<String>,
}

/// Log-log slope of `ψ` on `[r, 10r]`, and its classification.
pub fn classify_psi_tail(rule: &InfluenceRule, n: usize, r: f64) -> (f64, TailClass) {
    let r = r.max(1.0);
    let k = 16;
    let pts: Vec<(f64, f64)> = (0..=k)
        .map(|i| {
            let s = r * 10f64.powf(i as f64 / k as f64);
            (s.ln(), psi_lower_bound(rule, n, s))
        })
        .collect();
    if pts.iter().any(|&(_, p)| !(p > 0.0) || !p.is_finite()) {
        // ψ underflows: faster than any power.
        return (f64::NEG_INFINITY, TailClass::Convergent);
    }
    let pts: Vec<(f64, f64)> = pts.into_iter().map(|(x, p)| (x, p.ln())).collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let class = if slope >= -1.0 + EXPONENT_MARGIN {
        TailClass::Divergent
    } else if slope <= -1.0 - EXPONENT_MARGIN {
        TailClass::Convergent
    } else {
        TailClass::Inconclusive
    };
    (slope, class)
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Option<f64> {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (b - a) <= f64::EPSILON * a.abs().max(b.abs()) {
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    Some(
        adaptive(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)?
            + adaptive(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)?,
    )
}

fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Option<f64> {
    if b <= a {
        return Some(0.0);
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    adaptive(f, a, fa, b, fb, m, fm, whole, tol, QUAD_DEPTH)
}

/// `∫_a^b ψ(r) dr` by adaptive Simpson, linear below `r = 1` and in `ln r`
/// above. `None` if the quadrature does not converge.
pub fn psi_integral(rule: &InfluenceRule, n: usize, a: f64, b: f64) -> Option<f64> {
    if !(b > a) {
        return Some(0.0);
    }
    let psi = |r: f64| psi_lower_bound(rule, n, r);
    let scale = psi(a) * (b - a).min(1.0).max(1e-300);
    let tol = QUAD_TOL * scale.max(f64::MIN_POSITIVE);
    let split = a.max(1.0).min(b);
    let low = integrate(&psi, a, split, tol)?;
    let high = if b > split {
        let g = |s: f64| {
            let r = s.exp();
            psi(r) * r
        };
        integrate(&g, split.ln(), b.ln(), tol)?
    } else {
        0.0
    };
    Some(low + high)
}

/// Smallest `d ≥ a` with `c·∫_a^d ψ ≥ target`, searching up to `hi`;
/// returns the upper end of the final bracket.
fn solve_d_star(rule: &InfluenceRule, n: usize, c: f64, a: f64, target: f64, hi: f64) -> Option<f64> {
    if target <= 0.0 {
        return Some(a);
    }
    let mut lo = a;
    let mut acc_lo = 0.0;
    let mut up = hi;
    if c * psi_integral(rule, n, lo, up)? < target {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + up);
        if mid <= lo || mid >= up || (up - lo) <= 1e-14 * up {
            break;
        }
        let acc_mid = acc_lo + psi_integral(rule, n, lo, mid)?;
        if c * acc_mid >= target {
            up = mid;
        } else {
            lo = mid;
            acc_lo = acc_mid;
        }
    }
    Some(up)
}

/// Divergent case: grow the bracket geometrically until it holds the root.
fn solve_d_star_unbounded(rule: &InfluenceRule, n: usize, c: f64, a: f64, target: f64) -> Option<f64> {
    if target <= 0.0 {
        return Some(a);
    }
    let mut lo = a;
    let mut acc = 0.0;
    let mut hi = 10.0 * a.max(1.0);
    while hi.is_finite() && hi < 1e300 {
        let piece = psi_integral(rule, n, lo, hi)?;
        if c * (acc + piece) >= target {
            return solve_d_star(rule, n, c, lo, target - c * acc, hi);
        }
        acc += piece;
        lo = hi;
        hi *= 10.0;
    }
    None
}

/// Evaluates the flocking certificate at `initial`.
///
/// "Satisfied" is declared only on the truncated integral, which
/// underestimates the full one. "Violated" uses the truncated integral
/// plus the fitted tail. Anything in between is inconclusive.
pub fn flocking_certificate(
    initial: &SwarmState,
    cfg: &ModelConfig,
    steering: SteeringBound,
) -> Result<FlockingCertificate> {
    cfg.validate()?;
    let n = initial.n();
    let dim = initial.dim();
    let (d_x0, _) = diameter(initial.positions(), dim);
    let (d_v0, _) = diameter(initial.velocities(), dim);
    let rule = &cfg.influence;
    let r_max = 1e3 * d_x0.max(1.0);
    let (tail_exponent, tail_class) = classify_psi_tail(rule, n, r_max);
    let lhs = d_v0 + steering.integral;
    let mut cert = FlockingCertificate {
        n,
        d_x0,
        d_v0,
        steering_integral: steering.integral,
        lhs,
        alpha_lower: None,
        tail_exponent,
        tail_class,
        r_max,
        psi_integral_truncated: None,
        psi_integral_from_dx0: None,
        verdict: Verdict::Inconclusive,
        d_star: None,
        envelope_rate: None,
        notes: Vec::new(),
    };

    if !(steering.integral >= 0.0 && steering.integral.is_finite()) || !steering.decays {
        cert.notes.push("steering diameter is not known to be integrable and decaying".into());
        return Ok(cert);
    }
    if cfg.friction.is_active(n) {
        cert.notes.push("friction is not covered by the certificate".into());
        return Ok(cert);
    }
    let alpha = match alpha_lower_bound(&cfg.gain, n, lhs) {
        Some(a) if a > 0.0 => a / cfg.eps,
        _ => {
            cert.notes.push("no certified gain minimum over the velocity ball".into());
            return Ok(cert);
        }
    };
    cert.alpha_lower = Some(alpha);
    let c = alpha * n as f64;

    let truncated = match psi_integral(rule, n, d_x0, r_max) {
        Some(v) => v,
        None => {
            cert.notes.push("quadrature of the influence bound did not converge".into());
            return Ok(cert);
        }
    };
    cert.psi_integral_truncated = Some(truncated);

    match tail_class {
        TailClass::Divergent => {
            cert.verdict = Verdict::Unconditional;
            cert.d_star = solve_d_star_unbounded(rule, n, c, d_x0, lhs);
            if cert.d_star.is_none() {
                cert.notes.push("d_star exceeds the representable range".into());
            }
        }
        TailClass::Convergent | TailClass::Inconclusive => {
            let tail = if tail_class == TailClass::Convergent {
                let slope = tail_exponent;
                if slope == f64::NEG_INFINITY {
                    Some(0.0)
                } else {
                    Some(psi_lower_bound(rule, n, r_max) * r_max / (-slope - 1.0))
                }
            } else {
                None
            };
            cert.psi_integral_from_dx0 = tail.map(|t| truncated + t);
            if lhs < c * truncated {
                cert.verdict = Verdict::ConditionalSatisfied;
                cert.d_star = solve_d_star(rule, n, c, d_x0, lhs, r_max);
            } else if let Some(total) = cert.psi_integral_from_dx0 {
                if lhs >= c * total {
                    cert.verdict = Verdict::ConditionalViolated;
                } else {
                    cert.notes.push("condition falls within the tail estimate".into());
                }
            } else {
                cert.notes.push("tail exponent too close to -1 to classify".into());
            }
        }
    }
    cert.envelope_rate = cert.d_star.map(|d| c * psi_lower_bound(rule, n, d));
    if matches!(cert.verdict, Verdict::Unconditional | Verdict::ConditionalSatisfied) && cert.d_star.is_none() {
        cert.verdict = Verdict::Inconclusive;
    }
    Ok(cert)
}
