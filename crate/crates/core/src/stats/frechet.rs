//! Fréchet distance between Gaussians fitted to feature vectors.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::stats::diversity::FeatureMatrix;

/// Relative asymmetry above which a covariance is rejected.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGaussian {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl FeatureGaussian {
    /// Mean and unbiased covariance of the rows.
    pub fn fit(features: &FeatureMatrix) -> Result<Self> {
        if features.rows() < 2 {
            return Err(Error::SampleTooSmall { needed: 2, got: features.rows() });
        }
        let mean = DVector::from_vec(features.mean());
        let cov = features.scatter() / (features.rows() - 1) as f64;
        Ok(Self { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn distance(&self, other: &FeatureGaussian) -> Result<f64> {
        frechet_distance(&self.mean, &self.cov, &other.mean, &other.cov)
    }
}

fn check_symmetric(c: &DMatrix<f64>) -> Result<()> {
    let scale = c.amax().max(1.0);
    let asym = (c - c.transpose()).amax();
    if asym > SYMMETRY_TOLERANCE * scale {
        return Err(Error::NonSymmetric(asym));
    }
    Ok(())
}

/// Principal square root of a symmetric PSD matrix; negative eigenvalues
/// are treated as zero.
pub fn psd_sqrt(c: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(c.clone());
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

/// `‖m1 − m2‖² + tr(C1 + C2 − 2(C1^½ C2 C1^½)^½)`.
pub fn frechet_distance(m1: &DVector<f64>, c1: &DMatrix<f64>, m2: &DVector<f64>, c2: &DMatrix<f64>) -> Result<f64> {
    let d = m1.len();
    if m2.len() != d || c1.shape() != (d, d) || c2.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "means {} and {}, covariances {:?} and {:?}",
            d,
            m2.len(),
            c1.shape(),
            c2.shape()
        )));
    }
    check_symmetric(c1)?;
    check_symmetric(c2)?;
    let s1 = psd_sqrt(c1);
    let inner = &s1 * c2 * &s1;
    let inner = (&inner + inner.transpose()) * 0.5;
    let cross: f64 = SymmetricEigen::new(inner).eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum();
    let dist = (m1 - m2).norm_squared() + c1.trace() + c2.trace() - 2.0 * cross;
    Ok(dist.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn one_dimensional_unit_shift() {
        let c = DMatrix::from_element(1, 1, 1.0);
        let d = frechet_distance(&v(&[0.0]), &c, &v(&[1.0]), &c).unwrap();
        assert!((d - 1.0).abs() < 1e-8);
    }

    #[test]
    fn diagonal_closed_form() {
        let (va, vb): ([f64; 4], [f64; 4]) = ([1.0, 4.0, 0.25, 9.0], [2.0, 1.0, 0.5, 16.0]);
        let (ma, mb): ([f64; 4], [f64; 4]) = ([0.0, 1.0, -2.0, 3.0], [0.5, 1.0, 1.0, -1.0]);
        let oracle: f64 = (0..4).map(|i| (ma[i] - mb[i]).powi(2) + va[i] + vb[i] - 2.0 * (va[i] * vb[i]).sqrt()).sum();
        let ca = DMatrix::from_diagonal(&v(&va));
        let cb = DMatrix::from_diagonal(&v(&vb));
        let d = frechet_distance(&v(&ma), &ca, &v(&mb), &cb).unwrap();
        assert!((d - oracle).abs() < 1e-9, "{d} vs {oracle}");
    }

    #[test]
    fn asymmetric_covariance_rejected() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        let i = DMatrix::identity(2, 2);
        assert!(matches!(frechet_distance(&v(&[0.0, 0.0]), &c, &v(&[0.0, 0.0]), &i), Err(Error::NonSymmetric(_))));
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let c = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let s = psd_sqrt(&c);
        assert!((&s * &s - c).amax() < 1e-12);
    }

    fn arb_cov(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
        prop::collection::vec(-2.0..2.0f64, d * d).prop_map(move |xs| {
            let a = DMatrix::from_vec(d, d, xs);
            &a * a.transpose() + DMatrix::identity(d, d) * 0.1
        })
    }

    proptest! {
        #[test]
        fn symmetric_with_zero_self_distance(
            c1 in arb_cov(4), c2 in arb_cov(4),
            m1 in prop::collection::vec(-3.0..3.0f64, 4), m2 in prop::collection::vec(-3.0..3.0f64, 4),
        ) {
            let (m1, m2) = (v(&m1), v(&m2));
            let ab = frechet_distance(&m1, &c1, &m2, &c2).unwrap();
            let ba = frechet_distance(&m2, &c2, &m1, &c1).unwrap();
            prop_assert!((ab - ba).abs() < 1e-8 * ab.max(1.0));
            prop_assert!(frechet_distance(&m1, &c1, &m1, &c1).unwrap() < 1e-8);
        }
    }
}
