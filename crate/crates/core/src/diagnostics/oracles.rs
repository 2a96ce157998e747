//! Brute-force checks of the two inequalities behind the contraction
//! estimates: the antisymmetric-form bound with active entries, and the
//! supporting-hyperplane property of a diameter pair.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::diameter;
use crate::error::{ensure_finite, FlockError, Result};
use crate::state::{dot, norm_sq};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximalActionCheck {
    /// `|⟨Su, w⟩|`, rounded from the exact value.
    pub lhs: f64,
    /// `M·Ū·W̄·(1 − λ²θ²)`, rounded from the exact value.
    pub bound: f64,
    pub lambda: usize,
    /// Decided in exact arithmetic.
    pub holds: bool,
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite inputs are checked before conversion")
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Checks `|⟨Su, w⟩| ≤ M·Ū·W̄·(1 − λ(θ)²θ²)` exactly, where `S` is the
/// row-major `N×N` antisymmetric matrix with `|S_ij| ≤ M`, `Ū = Σu_j`,
/// `W̄ = Σw_j` and `λ(θ)` counts `j` with `u_j ≥ θŪ` and `w_j ≥ θW̄`.
pub fn maximal_action_oracle(s: &[f64], u: &[f64], w: &[f64], theta: f64, m: f64) -> Result<MaximalActionCheck> {
    let n = u.len();
    if s.len() != n * n || w.len() != n {
        return Err(FlockError::Dimension("S must be N x N with u, w of length N".into()));
    }
    ensure_finite(s, "S")?;
    ensure_finite(u, "u")?;
    ensure_finite(w, "w")?;
    if !(theta > 0.0 && theta.is_finite()) || !(m >= 0.0 && m.is_finite()) {
        return Err(FlockError::Domain("need theta > 0 and M >= 0".into()));
    }
    if u.iter().chain(w).any(|x| *x < 0.0) {
        return Err(FlockError::Domain("u and w must be nonnegative".into()));
    }
    for i in 0..n {
        for j in 0..n {
            if s[i * n + j] != -s[j * n + i] {
                return Err(FlockError::Domain(format!("S is not antisymmetric at ({i}, {j})")));
            }
            if s[i * n + j].abs() > m {
                return Err(FlockError::Domain(format!("|S_{i}{j}| exceeds M")));
            }
        }
    }
    let su: Vec<BigRational> = u.iter().map(|&x| exact(x)).collect();
    let sw: Vec<BigRational> = w.iter().map(|&x| exact(x)).collect();
    let mut form = BigRational::zero();
    for i in 0..n {
        let mut row = BigRational::zero();
        for j in 0..n {
            if s[i * n + j] != 0.0 {
                row += exact(s[i * n + j]) * &su[j];
            }
        }
        form += row * &sw[i];
    }
    let ubar: BigRational = su.iter().sum();
    let wbar: BigRational = sw.iter().sum();
    let th = exact(theta);
    let lambda = (0..n)
        .filter(|&j| su[j] >= &th * &ubar && sw[j] >= &th * &wbar)
        .count();
    let lt = BigRational::from_integer(BigInt::from(lambda)) * &th;
    let one = BigRational::from_integer(BigInt::from(1));
    let bound = exact(m) * &ubar * &wbar * (one - &lt * &lt);
    let lhs = form.abs();
    Ok(MaximalActionCheck { lhs: to_f64(&lhs), bound: to_f64(&bound), lambda, holds: lhs <= bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullCheck {
    /// Diameter pair `(p, q)` with `p < q`.
    pub pair: (usize, usize),
    /// Smallest `⟨v_p − v_q, v − v_q⟩` over the sampled hull points, and
    /// likewise with `p` and `q` swapped.
    pub worst: f64,
    pub holds: bool,
}

/// For each weight vector (nonnegative, normalized here) forms the hull
/// point `v = Σ w_k v_k` and checks it lies on the inner side of both
/// supporting hyperplanes through the diameter pair.
pub fn hull_support_oracle(points: &[f64], dim: usize, weights: &[Vec<f64>]) -> Result<HullCheck> {
    if dim == 0 || points.len() % dim != 0 || points.len() < 2 * dim {
        return Err(FlockError::Dimension("need at least two points of dimension d".into()));
    }
    ensure_finite(points, "points")?;
    let n = points.len() / dim;
    let (d, (p, q)) = diameter(points, dim);
    let vp = &points[p * dim..(p + 1) * dim];
    let vq = &points[q * dim..(q + 1) * dim];
    let pq: Vec<f64> = vp.iter().zip(vq).map(|(a, b)| a - b).collect();
    let mut worst = f64::INFINITY;
    let mut v = vec![0.0; dim];
    let mut check = |v: &[f64]| {
        let from_q: Vec<f64> = v.iter().zip(vq).map(|(a, b)| a - b).collect();
        let from_p: Vec<f64> = v.iter().zip(vp).map(|(a, b)| a - b).collect();
        worst = worst.min(dot(&pq, &from_q)).min(-dot(&pq, &from_p));
    };
    for k in 0..n {
        check(&points[k * dim..(k + 1) * dim]);
    }
    for wts in weights {
        if wts.len() != n || wts.iter().any(|x| !(*x >= 0.0)) {
            return Err(FlockError::Domain("hull weights must be N nonnegative numbers".into()));
        }
        let total: f64 = wts.iter().sum();
        if !(total > 0.0) {
            return Err(FlockError::Domain("hull weights must not all vanish".into()));
        }
        v.fill(0.0);
        for (k, wk) in wts.iter().enumerate() {
            for c in 0..dim {
                v[c] += wk / total * points[k * dim + c];
            }
        }
        check(&v);
    }
    let tol = 1e-12 * (d * d).max(norm_sq(vp).max(norm_sq(vq))).max(1.0);
    Ok(HullCheck { pair: (p, q), worst, holds: worst >= -tol })
}
