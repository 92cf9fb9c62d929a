//! Log-determinant of the feature covariance as a diversity score.

use std::path::PathBuf;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ridge added to the covariance before taking logs.
pub const DIVERSITY_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSource {
    Builtin,
    External(PathBuf),
}

/// `n × d` feature rows, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
    pub source: FeatureSource,
}

impl FeatureMatrix {
    pub fn new(rows: usize, dim: usize, data: Vec<f64>, source: FeatureSource) -> Result<Self> {
        if dim == 0 || data.len() != rows * dim {
            return Err(Error::DimensionMismatch(format!("{rows}×{dim} features with {} values", data.len())));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidShape(format!("feature row {} has a non-finite entry", i / dim)));
        }
        Ok(Self { rows, dim, data, source })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, source: FeatureSource) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch("feature rows differ in length".into()));
        }
        let n = rows.len();
        Self::new(n, dim, rows.concat(), source)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for r in 0..self.rows {
            for (acc, v) in m.iter_mut().zip(self.row(r)) {
                *acc += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= self.rows as f64);
        m
    }

    /// Centred scatter matrix `Σ (x − x̄)(x − x̄)ᵀ`.
    pub fn scatter(&self) -> DMatrix<f64> {
        let mean = self.mean();
        let centred = DMatrix::from_fn(self.rows, self.dim, |r, c| self.data[r * self.dim + c] - mean[c]);
        let s = centred.transpose() * &centred;
        // exact symmetry for the eigen solver
        (&s + s.transpose()) * 0.5
    }

    pub fn require_more_rows_than_dims(&self) -> Result<()> {
        if self.rows <= self.dim {
            return Err(Error::SampleTooSmall { needed: self.dim + 1, got: self.rows });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogDet {
    pub value: f64,
    /// Numerical rank of the covariance before regularization.
    pub rank: usize,
    pub dim: usize,
}

impl LogDet {
    pub fn rank_deficient(&self) -> bool {
        self.rank < self.dim
    }
}

/// `ln det(Σ + εI)` with `Σ` the population (1/n) covariance, so repeating
/// every row leaves the value unchanged.
pub fn diversity_logdet(features: &FeatureMatrix) -> Result<LogDet> {
    features.require_more_rows_than_dims()?;
    let cov = features.scatter() / features.rows() as f64;
    let eig = SymmetricEigen::new(cov).eigenvalues;
    let top = eig.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    // eigenvalues below rounding noise of the raw entries count as zero
    let scale = features.as_slice().iter().fold(top, |a, &v| a.max(v * v));
    let tol = scale * features.dim() as f64 * f64::EPSILON;
    let rank = eig.iter().filter(|&&l| l > tol).count();
    let value = eig.iter().map(|&l| (l.max(0.0) + DIVERSITY_EPSILON).ln()).sum();
    if rank < features.dim() {
        log::warn!("feature covariance is rank deficient ({rank} of {})", features.dim());
    }
    Ok(LogDet { value, rank, dim: features.dim() })
}
