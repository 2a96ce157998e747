use crate::error::{FlockError, Result};
use crate::state::norm_sq;

use super::PerAgent;

/// Sharpness of the soft clamp used to project onto a segment.
const SOFT_CLAMP_SHARPNESS: f64 = 25.0;

/// Radial influence kernel `φ(r)`; nonincreasing with `φ(0) > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// `φ(r) = (1 + r²)^(−β)`.
    InversePower { beta: f64 },
    /// `φ(r) = exp(−r/ℓ)`.
    Exponential { length: f64 },
}

impl Kernel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::InversePower { beta } if beta >= 0.0 && beta.is_finite() => Ok(()),
            Kernel::Exponential { length } if length > 0.0 && length.is_finite() => Ok(()),
            k => Err(FlockError::Domain(format!("invalid kernel parameters: {k:?}"))),
        }
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        self.eval_sq(r * r)
    }

    /// Kernel evaluated from the squared distance.
    #[inline]
    pub fn eval_sq(&self, r2: f64) -> f64 {
        match *self {
            Kernel::InversePower { beta } => (1.0 + r2).powf(-beta),
            Kernel::Exponential { length } => (-r2.sqrt() / length).exp(),
        }
    }

    pub fn at_zero(&self) -> f64 {
        self.eval_sq(0.0)
    }
}

/// Line-of-sight attenuation:
/// `m_ij = Π_{l≠i,j} (1 − κ·exp(−s_l²/ς²))` where `s_l` is a smoothed
/// distance from `x_l` to the segment `[x_i, x_j]`. Self-weights are not
/// masked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Masking {
    pub kappa: f64,
    /// Length scale `ς` of the attenuation profile.
    pub width: f64,
}

impl Masking {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.kappa) {
            return Err(FlockError::Domain(format!(
                "masking strength kappa must lie in [0, 1), got {}",
                self.kappa
            )));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(FlockError::Domain("masking width must be positive".into()));
        }
        Ok(())
    }

    /// Lower bound of a single masking factor product over `n` agents.
    pub fn floor(&self, n: usize) -> f64 {
        (1.0 - self.kappa).powi(n.saturating_sub(2) as i32)
    }

    /// Masking factor for the pair `(i, j)`, `x` row-major `n × dim`.
    pub fn factor(&self, x: &[f64], n: usize, dim: usize, i: usize, j: usize) -> f64 {
        if i == j || self.kappa == 0.0 {
            return 1.0;
        }
        let xi = &x[i * dim..(i + 1) * dim];
        let xj = &x[j * dim..(j + 1) * dim];
        // The regularizer keeps the projection smooth when x_i and x_j coincide.
        let reg = (1e-3 * self.width).powi(2);
        let mut seg_sq = reg;
        for k in 0..dim {
            let e = xj[k] - xi[k];
            seg_sq += e * e;
        }
        let inv_w2 = 1.0 / (self.width * self.width);
        let mut m = 1.0;
        for l in 0..n {
            if l == i || l == j {
                continue;
            }
            let xl = &x[l * dim..(l + 1) * dim];
            let mut proj = 0.0;
            for k in 0..dim {
                proj += (xl[k] - xi[k]) * (xj[k] - xi[k]);
            }
            let s = soft_clamp01(proj / seg_sq);
            let mut d2 = 0.0;
            for k in 0..dim {
                let r = xl[k] - xi[k] - s * (xj[k] - xi[k]);
                d2 += r * r;
            }
            m *= 1.0 - self.kappa * (-d2 * inv_w2).exp();
        }
        m
    }
}

/// Smooth version of `clamp(t, 0, 1)`.
fn soft_clamp01(t: f64) -> f64 {
    let k = SOFT_CLAMP_SHARPNESS;
    (softplus(k * t) - softplus(k * (t - 1.0))) / k
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Heading bias `g(c) = (1 + η c)/(1 + η)`, with
/// `c = ⟨σ_i(v_i), (x_j − x_i)/√(‖x_j − x_i‖² + δ²)⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationBias {
    pub eta: f64,
    pub delta: f64,
}

impl OrientationBias {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.eta) {
            return Err(FlockError::Domain(format!(
                "orientation strength eta must lie in [0, 1), got {}",
                self.eta
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(FlockError::Domain("orientation delta must be positive".into()));
        }
        Ok(())
    }

    pub fn floor(&self) -> f64 {
        (1.0 - self.eta) / (1.0 + self.eta)
    }

    pub fn factor(&self, heading: &[f64], xi: &[f64], xj: &[f64]) -> f64 {
        let mut e2 = 0.0;
        let mut c = 0.0;
        for k in 0..xi.len() {
            let e = xj[k] - xi[k];
            e2 += e * e;
            c += heading[k] * e;
        }
        c /= (e2 + self.delta * self.delta).sqrt();
        (1.0 + self.eta * c) / (1.0 + self.eta)
    }
}

/// Smooth heading map `σ_i(u) = u/√(‖u‖² + b_i²)` into the closed unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationMap {
    pub b: PerAgent<f64>,
}

impl Default for OrientationMap {
    fn default() -> Self {
        Self { b: PerAgent::Uniform(1.0) }
    }
}

impl OrientationMap {
    pub fn validate(&self, n: usize) -> Result<()> {
        self.b.check_len(n, "orientation b")?;
        if self.b.iter_n(n).any(|b| *b == 0.0 || !b.is_finite()) {
            return Err(FlockError::Domain("orientation parameters b_i must be nonzero".into()));
        }
        Ok(())
    }

    pub fn heading(&self, i: usize, u: &[f64], out: &mut [f64]) {
        let b = *self.b.get(i);
        let s = 1.0 / (norm_sq(u) + b * b).sqrt();
        for (o, uk) in out.iter_mut().zip(u) {
            *o = uk * s;
        }
    }
}

/// Raw pairwise weight `φ(‖x_j−x_i‖)·m(x,i,j)·g(·)` before row normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceRule {
    pub kernel: Kernel,
    pub masking: Option<Masking>,
    pub orientation: Option<OrientationBias>,
}

impl InfluenceRule {
    pub fn plain(kernel: Kernel) -> Self {
        Self { kernel, masking: None, orientation: None }
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if let Some(m) = &self.masking {
            m.validate()?;
        }
        if let Some(o) = &self.orientation {
            o.validate()?;
        }
        Ok(())
    }

    pub fn uses_orientation(&self) -> bool {
        self.orientation.is_some_and(|o| o.eta != 0.0)
    }

    /// Raw weight of agent `j` on agent `i`. `heading` is `σ_i(v_i)` and is
    /// only read when an orientation bias is configured.
    pub fn raw_weight(
        &self,
        x: &[f64],
        n: usize,
        dim: usize,
        i: usize,
        j: usize,
        heading: &[f64],
    ) -> f64 {
        let xi = &x[i * dim..(i + 1) * dim];
        let xj = &x[j * dim..(j + 1) * dim];
        let mut r2 = 0.0;
        for k in 0..dim {
            let e = xj[k] - xi[k];
            r2 += e * e;
        }
        let mut w = self.kernel.eval_sq(r2);
        if let Some(m) = &self.masking {
            w *= m.factor(x, n, dim, i, j);
        }
        if let Some(o) = &self.orientation {
            w *= o.factor(heading, xi, xj);
        }
        w
    }
}
