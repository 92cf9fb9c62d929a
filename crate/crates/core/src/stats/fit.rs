//! Least-squares polynomial fits.

use nalgebra::{Matrix3, Vector3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let ss_res = syy - slope * sxy;
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    LineFit { slope, intercept: my - slope * mx, r2 }
}

/// Coefficients `[c0, c1, c2]` of `y ≈ c0 + c1·x + c2·x²`.
pub fn fit_quadratic(xs: &[f64], ys: &[f64]) -> [f64; 3] {
    assert_eq!(xs.len(), ys.len());
    // Fit in centred, scaled x for conditioning, then expand.
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let sx = xs.iter().map(|x| (x - mx).abs()).fold(0.0, f64::max).max(1e-300);
    let mut ata = Matrix3::zeros();
    let mut aty = Vector3::zeros();
    for (&x, &y) in xs.iter().zip(ys) {
        let u = (x - mx) / sx;
        let row = Vector3::new(1.0, u, u * u);
        ata += row * row.transpose();
        aty += row * y;
    }
    let c = ata.lu().solve(&aty).unwrap_or_else(Vector3::zeros);
    let (a, b, q) = (c[0], c[1] / sx, c[2] / (sx * sx));
    [a - b * mx + q * mx * mx, b - 2.0 * q * mx, q]
}

fn quadratic_residuals(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let [c0, c1, c2] = fit_quadratic(xs, ys);
    xs.iter().zip(ys).map(|(x, y)| y - (c0 + c1 * x + c2 * x * x)).collect()
}

pub fn quadratic_r2(xs: &[f64], ys: &[f64]) -> f64 {
    let res = quadratic_residuals(xs, ys);
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = res.iter().map(|r| r * r).sum();
    if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    }
}

pub fn quadratic_rms_residual(xs: &[f64], ys: &[f64]) -> f64 {
    let res = quadratic_residuals(xs, ys);
    (res.iter().map(|r| r * r).sum::<f64>() / res.len() as f64).sqrt()
}
