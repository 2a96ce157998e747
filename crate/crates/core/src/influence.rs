//! Row-stochastic influence matrices and local mean velocities.

use rayon::prelude::*;

use crate::error::{ensure_finite, FlockError, Result};
use crate::model::{InfluenceRule, OrientationMap};
use crate::state::SwarmState;

/// Rows are filled in parallel above this agent count.
const PARALLEL_ROWS_FROM: usize = 64;

/// Dense `N × N` matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl InfluenceMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn uniform(n: usize) -> Self {
        Self { n, data: vec![1.0 / n as f64; n * n] }
    }

    /// Builds a matrix that must be row-stochastic with nonnegative entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(FlockError::Dimension("influence matrix must be square".into()));
        }
        let m = Self { n, data: rows.iter().flatten().copied().collect() };
        m.check_stochastic(1e-12)?;
        Ok(m)
    }

    /// Wraps row-major data without checks.
    pub fn from_raw(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n.max(1))
    }

    /// Rejects negative entries and rows whose sum differs from 1 by more
    /// than `tol`.
    pub fn check_stochastic(&self, tol: f64) -> Result<()> {
        ensure_finite(&self.data, "influence matrix")?;
        for (i, row) in self.rows().enumerate() {
            if let Some(j) = row.iter().position(|a| *a < 0.0) {
                return Err(FlockError::Domain(format!("negative influence a[{i}][{j}]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > tol {
                return Err(FlockError::Domain(format!("row {i} of influence sums to {s}, not 1")));
            }
        }
        Ok(())
    }
}

/// Normalized influence `a_ij = w_ij / Σ_k w_ik` at a state.
pub fn influence_matrix(
    state: &SwarmState,
    rule: &InfluenceRule,
    orient: &OrientationMap,
) -> Result<InfluenceMatrix> {
    let (n, dim) = (state.n(), state.dim());
    let mut data = vec![0.0; n * n];
    fill_influence(state.positions(), state.velocities(), n, dim, rule, orient, &mut data)?;
    Ok(InfluenceMatrix { n, data })
}

/// Writes the normalized influence matrix for flat `x`, `v` into `out`.
pub(crate) fn fill_influence(
    x: &[f64],
    v: &[f64],
    n: usize,
    dim: usize,
    rule: &InfluenceRule,
    orient: &OrientationMap,
    out: &mut [f64],
) -> Result<()> {
    ensure_finite(x, "positions")?;
    ensure_finite(v, "velocities")?;
    let fill_row = |i: usize, row: &mut [f64]| -> Result<()> {
        let mut heading = [0.0f64; 16];
        let mut heading_vec;
        let heading: &mut [f64] = if dim <= 16 {
            &mut heading[..dim]
        } else {
            heading_vec = vec![0.0; dim];
            &mut heading_vec
        };
        if rule.orientation.is_some() {
            orient.heading(i, &v[i * dim..(i + 1) * dim], heading);
        }
        let mut sum = 0.0;
        for (j, w) in row.iter_mut().enumerate() {
            *w = rule.raw_weight(x, n, dim, i, j, heading);
            sum += *w;
        }
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(FlockError::DegenerateRow { row: i });
        }
        let inv = 1.0 / sum;
        row.iter_mut().for_each(|w| *w *= inv);
        Ok(())
    };
    if n >= PARALLEL_ROWS_FROM {
        out.par_chunks_mut(n).enumerate().try_for_each(|(i, row)| fill_row(i, row))
    } else {
        out.chunks_mut(n).enumerate().try_for_each(|(i, row)| fill_row(i, row))
    }
}

/// `v̄_i = Σ_j a_ij v_j`, row-major `N × d`.
pub fn local_mean_velocity(a: &InfluenceMatrix, v: &[f64], dim: usize) -> Result<Vec<f64>> {
    let n = a.n();
    if dim == 0 || v.len() != n * dim {
        return Err(FlockError::Dimension(format!(
            "velocity buffer of length {} does not match N = {n}, d = {dim}",
            v.len()
        )));
    }
    let mut out = vec![0.0; n * dim];
    mean_into(a.as_slice(), v, n, dim, &mut out);
    Ok(out)
}

#[inline]
pub(crate) fn mean_into(a: &[f64], v: &[f64], n: usize, dim: usize, out: &mut [f64]) {
    for i in 0..n {
        let o = &mut out[i * dim..(i + 1) * dim];
        o.fill(0.0);
        for j in 0..n {
            let aij = a[i * n + j];
            for k in 0..dim {
                o[k] += aij * v[j * dim + k];
            }
        }
    }
}
