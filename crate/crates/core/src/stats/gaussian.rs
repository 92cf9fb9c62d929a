//! Lab colour distributions as 3-D Gaussians, and the KL divergence between them.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::lab::rgb_to_lab;

/// Ridge added to fitted colour covariances.
pub const COLOR_EPSILON: f64 = 1e-6;
pub const MIN_COLOR_SAMPLES: usize = 1000;
/// Fits whose regularized covariance is worse conditioned than this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian3 {
    pub mean: [f64; 3],
    pub cov: [[f64; 3]; 3],
}

impl Gaussian3 {
    pub fn mean_vector(&self) -> Vector3<f64> {
        Vector3::from(self.mean)
    }

    pub fn cov_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| self.cov[r][c])
    }

    pub fn condition_number(&self) -> f64 {
        let eig = SymmetricEigen::new(self.cov_matrix()).eigenvalues;
        let (lo, hi) = (eig.min(), eig.max());
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }
}

/// Streaming mean and co-moment accumulator (Welford).
#[derive(Debug, Clone, Default)]
pub struct MomentAccumulator {
    n: usize,
    mean: [f64; 3],
    comoment: [[f64; 3]; 3],
}

impl MomentAccumulator {
    pub fn push(&mut self, x: [f64; 3]) {
        self.n += 1;
        let n = self.n as f64;
        let delta: [f64; 3] = std::array::from_fn(|i| x[i] - self.mean[i]);
        for i in 0..3 {
            self.mean[i] += delta[i] / n;
        }
        for i in 0..3 {
            for j in 0..3 {
                self.comoment[i][j] += delta[i] * (x[j] - self.mean[j]);
            }
        }
    }

    /// Combines two accumulators (Chan et al. pairwise update).
    pub fn merge(&mut self, other: &MomentAccumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta: [f64; 3] = std::array::from_fn(|i| other.mean[i] - self.mean[i]);
        for i in 0..3 {
            for j in 0..3 {
                self.comoment[i][j] += other.comoment[i][j] + delta[i] * delta[j] * na * nb / n;
            }
        }
        for i in 0..3 {
            self.mean[i] += delta[i] * nb / n;
        }
        self.n += other.n;
    }

    pub fn count(&self) -> usize {
        self.n
    }

    /// Sample mean and unbiased covariance plus `epsilon·I`.
    pub fn finish(&self, epsilon: f64) -> Gaussian3 {
        let denom = (self.n.max(2) - 1) as f64;
        let mut cov = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                // symmetrize the accumulated co-moment
                cov[i][j] = 0.5 * (self.comoment[i][j] + self.comoment[j][i]) / denom;
            }
            cov[i][i] += epsilon;
        }
        Gaussian3 { mean: self.mean, cov }
    }
}

/// Gaussian fit of arbitrary 3-D samples (already in Lab units).
pub fn fit_gaussian(samples: impl IntoIterator<Item = [f64; 3]>) -> Result<Gaussian3> {
    let mut acc = MomentAccumulator::default();
    samples.into_iter().for_each(|s| acc.push(s));
    finish_color(&acc)
}

/// The regularized Gaussian of accumulated Lab samples.
pub fn finish_color(acc: &MomentAccumulator) -> Result<Gaussian3> {
    if acc.count() < MIN_COLOR_SAMPLES {
        return Err(Error::SampleTooSmall { needed: MIN_COLOR_SAMPLES, got: acc.count() });
    }
    let g = acc.finish(COLOR_EPSILON);
    let cond = g.condition_number();
    if cond > MAX_CONDITION {
        return Err(Error::DegenerateDistribution(cond));
    }
    Ok(g)
}

/// Lab Gaussian of 8-bit sRGB pixels.
pub fn fit_color_gaussian(pixels: impl IntoIterator<Item = [u8; 3]>) -> Result<Gaussian3> {
    fit_gaussian(pixels.into_iter().map(rgb_to_lab))
}

fn cholesky(g: &Gaussian3) -> Result<nalgebra::Cholesky<f64, nalgebra::U3>> {
    let m = g.cov_matrix();
    if (0..3).any(|i| (0..3).any(|j| !m[(i, j)].is_finite())) {
        return Err(Error::SingularCovariance);
    }
    m.cholesky().ok_or(Error::SingularCovariance)
}

/// `KL(p ‖ q) = ½[tr(Σq⁻¹Σp) + (μq−μp)ᵀΣq⁻¹(μq−μp) − 3 + ln(det Σq / det Σp)]`.
pub fn kl_divergence(p: &Gaussian3, q: &Gaussian3) -> Result<f64> {
    let cp = cholesky(p)?;
    let cq = cholesky(q)?;
    let ln_det = |c: &nalgebra::Cholesky<f64, nalgebra::U3>| 2.0 * c.l_dirty().diagonal().map(f64::ln).sum();
    let trace = cq.solve(&p.cov_matrix()).trace();
    let d = q.mean_vector() - p.mean_vector();
    let maha = d.dot(&cq.solve(&d));
    Ok(0.5 * (trace + maha - 3.0 + ln_det(&cq) - ln_det(&cp)))
}

/// `½[KL(p‖q) + KL(q‖p)]`.
pub fn symmetric_kl(p: &Gaussian3, q: &Gaussian3) -> Result<f64> {
    let v = 0.5 * (kl_divergence(p, q)? + kl_divergence(q, p)?);
    Ok(v.max(0.0))
}
