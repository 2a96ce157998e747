use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, FlockError, Result};
use crate::influence::{fill_influence, InfluenceMatrix};
use crate::model::{InfluenceRule, OrientationMap};

/// Stationary distribution of a rate matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryWeights {
    pub pi: Vec<f64>,
    /// `‖πQ‖∞`.
    pub residual: f64,
}

/// Frozen-configuration influence `P_ij = φ_ij(x0)`. Orientation bias is
/// rejected because it makes `P` depend on velocities.
pub fn stochastic_matrix(x0: &[f64], dim: usize, rule: &InfluenceRule) -> Result<InfluenceMatrix> {
    rule.validate()?;
    if rule.uses_orientation() {
        return Err(FlockError::Unsupported(
            "the reduced model needs position-only influence; disable the orientation bias".into(),
        ));
    }
    if dim == 0 || x0.is_empty() || x0.len() % dim != 0 {
        return Err(FlockError::Dimension("positions must be a nonempty N x d buffer".into()));
    }
    let n = x0.len() / dim;
    let mut data = vec![0.0; n * n];
    let v = vec![0.0; n * dim];
    fill_influence(x0, &v, n, dim, rule, &OrientationMap::default(), &mut data)?;
    Ok(InfluenceMatrix::from_raw(n, data))
}

/// Generator `q_ij = ξ_i(0)·P_ij` for `i ≠ j`; the diagonal is minus the
/// off-diagonal row sum, i.e. `ξ_i(0)(P_ii − 1)`.
pub fn rate_matrix(p: &InfluenceMatrix, gains_at_zero: &[f64]) -> Result<DMatrix<f64>> {
    let n = p.n();
    if gains_at_zero.len() != n {
        return Err(FlockError::Dimension(format!("expected {n} gains, got {}", gains_at_zero.len())));
    }
    if gains_at_zero.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
        return Err(FlockError::Domain("gains at zero must be positive and finite".into()));
    }
    p.check_stochastic(1e-12)?;
    let mut q = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut off = 0.0;
        for j in 0..n {
            if j != i {
                let v = gains_at_zero[i] * p.get(i, j);
                q[(i, j)] = v;
                off += v;
            }
        }
        q[(i, i)] = -off;
    }
    Ok(q)
}

fn inf_norm(q: &DMatrix<f64>) -> f64 {
    q.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn left_residual(q: &DMatrix<f64>, pi: &DVector<f64>) -> f64 {
    (q.transpose() * pi).amax()
}

/// The probability vector with `πQ = 0`, from `Qᵀπ = 0` with the last
/// equation replaced by `Σπ_i = 1`, plus one step of iterative refinement.
pub fn stationary_distribution(q: &DMatrix<f64>) -> Result<StationaryWeights> {
    let n = q.nrows();
    if n == 0 || q.ncols() != n {
        return Err(FlockError::Dimension("rate matrix must be square and nonempty".into()));
    }
    ensure_finite(q.as_slice(), "rate matrix")?;
    let mut a = q.transpose();
    a.row_mut(n - 1).fill(1.0);
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let lu = a.clone().lu();
    let mut pi = lu
        .solve(&b)
        .ok_or_else(|| FlockError::Singular("stationary system is singular; Q is not irreducible".into()))?;
    let r = &b - &a * &pi;
    if let Some(d) = lu.solve(&r) {
        pi += d;
    }
    if pi.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
        return Err(FlockError::Singular(format!(
            "stationary vector is not strictly positive: {:?}",
            pi.as_slice()
        )));
    }
    let total = pi.sum();
    pi /= total;
    Ok(StationaryWeights { residual: left_residual(q, &pi), pi: pi.iter().copied().collect() })
}

/// Relative residual `‖πQ‖∞ / ‖Q‖∞`.
pub fn relative_residual(q: &DMatrix<f64>, w: &StationaryWeights) -> f64 {
    let norm = inf_norm(q);
    if norm == 0.0 {
        0.0
    } else {
        w.residual / norm
    }
}

/// Eigenvalues of a rate matrix, sorted by decreasing real part.
pub fn rate_spectrum(q: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let mut ev: Vec<Complex<f64>> = q.clone().complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.re.total_cmp(&a.re));
    ev
}

/// `V^f(0) = Σ_i π_i v_i(0)`, per component.
pub fn initial_flock_velocity(v_init: &[f64], dim: usize, weights: &StationaryWeights) -> Result<Vec<f64>> {
    let n = weights.pi.len();
    if dim == 0 || v_init.len() != n * dim {
        return Err(FlockError::Dimension(format!("velocities must be {n} x {dim}")));
    }
    let mut out = vec![0.0; dim];
    for (i, p) in weights.pi.iter().enumerate() {
        for k in 0..dim {
            out[k] += p * v_init[i * dim + k];
        }
    }
    Ok(out)
}
