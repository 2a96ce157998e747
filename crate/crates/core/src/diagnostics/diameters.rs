use serde::{Deserialize, Serialize};

use crate::error::{FlockError, Result};
use crate::state::{dist_sq, SwarmState};

/// Position, velocity and steering diameters at one instant. Pairs are
/// 0-based agent indices with `i <= j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiameterSample {
    pub t: f64,
    pub d_x: f64,
    pub d_v: f64,
    pub d_beta: f64,
    pub pair_x: (usize, usize),
    pub pair_v: (usize, usize),
    pub pair_beta: (usize, usize),
}

/// Largest pairwise distance among `n` points of dimension `dim`; ties go to
/// the lexicographically smallest pair.
pub fn diameter(points: &[f64], dim: usize) -> (f64, (usize, usize)) {
    let n = points.len() / dim.max(1);
    let mut best = (0.0, (0, 0));
    for i in 0..n {
        let pi = &points[i * dim..(i + 1) * dim];
        for j in i + 1..n {
            let d2 = dist_sq(pi, &points[j * dim..(j + 1) * dim]);
            if d2 > best.0 {
                best = (d2, (i, j));
            }
        }
    }
    (best.0.sqrt(), best.1)
}

pub fn diameters(state: &SwarmState, beta: &[f64]) -> Result<DiameterSample> {
    if beta.len() != state.n() * state.dim() {
        return Err(FlockError::Dimension("steering buffer must be N x d".into()));
    }
    let dim = state.dim();
    let (d_x, pair_x) = diameter(state.positions(), dim);
    let (d_v, pair_v) = diameter(state.velocities(), dim);
    let (d_beta, pair_beta) = diameter(beta, dim);
    Ok(DiameterSample { t: state.t, d_x, d_v, d_beta, pair_x, pair_v, pair_beta })
}
