use crate::model::{GainRule, InfluenceRule, PerAgent};

/// Certified lower bound on every normalized influence weight over all
/// configurations whose pairwise distances are at most `r`:
/// `φ(r)/((N−1)φ(0) + φ(r))`, times `(1−κ)^{N−2}` with masking and
/// `(1−η)/(1+η)` with an orientation bias.
pub fn psi_lower_bound(rule: &InfluenceRule, n: usize, r: f64) -> f64 {
    let phi_r = rule.kernel.eval(r.max(0.0));
    let phi_0 = rule.kernel.at_zero();
    let mut psi = phi_r / ((n.max(1) - 1) as f64 * phi_0 + phi_r);
    if let Some(m) = &rule.masking {
        psi *= m.floor(n);
    }
    if let Some(o) = &rule.orientation {
        psi *= o.floor();
    }
    psi
}

/// `min_i min_{‖u‖≤M} ξ_i(u)`, or `None` if some gain cannot be minimized
/// with certainty.
pub fn alpha_lower_bound(gain: &PerAgent<GainRule>, n: usize, m: f64) -> Option<f64> {
    let m = m.max(0.0);
    gain.iter_n(n)
        .map(|g| g.ball_minimum(m))
        .try_fold(f64::INFINITY, |acc, v| v.map(|v| acc.min(v)))
}
