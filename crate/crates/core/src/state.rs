//! Agent state storage.
//!
//! Positions and velocities are stored row-major as flat `N*d` buffers so the
//! integrator can treat the whole swarm as one vector without copying.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, FlockError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmState {
    pub t: f64,
    n: usize,
    dim: usize,
    x: Vec<f64>,
    v: Vec<f64>,
}

impl SwarmState {
    pub fn new(t: f64, n: usize, dim: usize, x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if n == 0 || dim == 0 {
            return Err(FlockError::Domain(format!(
                "swarm needs N >= 1 and d >= 1, got N = {n}, d = {dim}"
            )));
        }
        if x.len() != n * dim || v.len() != n * dim {
            return Err(FlockError::Dimension(format!(
                "expected {} position and velocity entries, got {} and {}",
                n * dim,
                x.len(),
                v.len()
            )));
        }
        if !t.is_finite() {
            return Err(FlockError::Domain("time is not finite".into()));
        }
        ensure_finite(&x, "positions")?;
        ensure_finite(&v, "velocities")?;
        Ok(Self { t, n, dim, x, v })
    }

    /// Builds a state from per-agent rows.
    pub fn from_rows(t: f64, x: &[Vec<f64>], v: &[Vec<f64>]) -> Result<Self> {
        let n = x.len();
        let dim = x.first().map_or(0, Vec::len);
        if v.len() != n || x.iter().chain(v).any(|r| r.len() != dim) {
            return Err(FlockError::Dimension(
                "position/velocity rows must all have the same length".into(),
            ));
        }
        Self::new(
            t,
            n,
            dim,
            x.iter().flatten().copied().collect(),
            v.iter().flatten().copied().collect(),
        )
    }

    /// Unchecked constructor used on integrator outputs that were already
    /// screened for finiteness.
    pub(crate) fn from_parts(t: f64, n: usize, dim: usize, x: Vec<f64>, v: Vec<f64>) -> Self {
        debug_assert_eq!(x.len(), n * dim);
        debug_assert_eq!(v.len(), n * dim);
        Self { t, n, dim, x, v }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn positions(&self) -> &[f64] {
        &self.x
    }

    pub fn velocities(&self) -> &[f64] {
        &self.v
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.v[i * self.dim..(i + 1) * self.dim]
    }

    /// Concatenated `[x, v]` vector.
    pub fn pack(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(2 * self.x.len());
        y.extend_from_slice(&self.x);
        y.extend_from_slice(&self.v);
        y
    }

    pub(crate) fn unpack(t: f64, n: usize, dim: usize, y: &[f64]) -> Self {
        let m = n * dim;
        Self::from_parts(t, n, dim, y[..m].to_vec(), y[m..2 * m].to_vec())
    }

    /// Mean position over agents.
    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for i in 0..self.n {
            for (ck, xk) in c.iter_mut().zip(self.position(i)) {
                *ck += xk;
            }
        }
        c.iter_mut().for_each(|ck| *ck /= self.n as f64);
        c
    }

    /// `max_i ½‖v_i‖²`.
    pub fn max_kinetic_energy(&self) -> f64 {
        (0..self.n)
            .map(|i| 0.5 * norm_sq(self.velocity(i)))
            .fold(0.0, f64::max)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}
