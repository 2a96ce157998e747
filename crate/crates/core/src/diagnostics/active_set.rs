use crate::error::{FlockError, Result};
use crate::influence::InfluenceMatrix;

/// Threshold sets `Λ_p(θ) = { j : a_pj ≥ θ }` and their intersections.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSetReport {
    pub theta: f64,
    membership: Vec<Vec<bool>>,
    pub per_agent: Vec<Vec<usize>>,
    pub global: Vec<usize>,
}

impl ActiveSetReport {
    pub fn contains(&self, p: usize, j: usize) -> bool {
        self.membership[p][j]
    }

    /// Common active set `Λ_pq(θ)`.
    pub fn pair(&self, p: usize, q: usize) -> Vec<usize> {
        (0..self.membership.len())
            .filter(|&j| self.membership[p][j] && self.membership[q][j])
            .collect()
    }

    pub fn lambda_pair(&self, p: usize, q: usize) -> usize {
        (0..self.membership.len())
            .filter(|&j| self.membership[p][j] && self.membership[q][j])
            .count()
    }

    pub fn lambda(&self) -> usize {
        self.global.len()
    }
}

pub fn active_sets(a: &InfluenceMatrix, theta: f64) -> Result<ActiveSetReport> {
    if !(theta > 0.0) {
        return Err(FlockError::Domain(format!("active-set threshold must be positive, got {theta}")));
    }
    let n = a.n();
    let membership: Vec<Vec<bool>> = a.rows().map(|row| row.iter().map(|&x| x >= theta).collect()).collect();
    let per_agent = membership
        .iter()
        .map(|m| (0..n).filter(|&j| m[j]).collect())
        .collect();
    let global = (0..n).filter(|&j| membership.iter().all(|m| m[j])).collect();
    Ok(ActiveSetReport { theta, membership, per_agent, global })
}
