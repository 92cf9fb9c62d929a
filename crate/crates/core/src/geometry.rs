//! Planar vectors and affine maps.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(radius * c, radius * s)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// Row-major 2×3 affine map `p ↦ A·p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine2 {
    pub m: [[f64; 3]; 2],
}

impl Default for Affine2 {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Affine2 {
    pub const IDENTITY: Affine2 = Affine2 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
    };

    pub const fn linear(a: f64, b: f64, c: f64, d: f64) -> Self {
        Affine2 {
            m: [[a, b, 0.0], [c, d, 0.0]],
        }
    }

    pub const fn translation(t: Vec2) -> Self {
        Affine2 {
            m: [[1.0, 0.0, t.x], [0.0, 1.0, t.y]],
        }
    }

    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::linear(c, -s, s, c)
    }

    pub const fn scale(sx: f64, sy: f64) -> Self {
        Self::linear(sx, 0.0, 0.0, sy)
    }

    /// `x += hx·y`.
    pub const fn shear_x(hx: f64) -> Self {
        Self::linear(1.0, hx, 0.0, 1.0)
    }

    /// `y += hy·x`.
    pub const fn shear_y(hy: f64) -> Self {
        Self::linear(1.0, 0.0, hy, 1.0)
    }

    /// `shear_x(hx) · shear_y(hy)`; area-preserving.
    pub fn shear(hx: f64, hy: f64) -> Self {
        Self::shear_x(hx).then_after(&Self::shear_y(hy))
    }

    /// Composition `self ∘ inner`: applies `inner` first.
    pub fn then_after(&self, inner: &Affine2) -> Affine2 {
        let a = &self.m;
        let b = &inner.m;
        let mut m = [[0.0; 3]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            row[0] = a[r][0] * b[0][0] + a[r][1] * b[1][0];
            row[1] = a[r][0] * b[0][1] + a[r][1] * b[1][1];
            row[2] = a[r][0] * b[0][2] + a[r][1] * b[1][2] + a[r][2];
        }
        Affine2 { m }
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        let m = &self.m;
        Vec2::new(
            m[0][0] * p.x + m[0][1] * p.y + m[0][2],
            m[1][0] * p.x + m[1][1] * p.y + m[1][2],
        )
    }

    /// The linear part applied to `v` (translation ignored).
    pub fn apply_linear(&self, v: Vec2) -> Vec2 {
        let m = &self.m;
        Vec2::new(m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y)
    }

    pub fn determinant(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn inverse(&self) -> Option<Affine2> {
        let det = self.determinant();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let [[a, b, tx], [c, d, ty]] = self.m;
        let inv = 1.0 / det;
        let (ia, ib, ic, id) = (d * inv, -b * inv, -c * inv, a * inv);
        Some(Affine2 {
            m: [
                [ia, ib, -(ia * tx + ib * ty)],
                [ic, id, -(ic * tx + id * ty)],
            ],
        })
    }

    pub fn max_abs_diff(&self, other: &Affine2) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn shear_is_unimodular() {
        assert!((Affine2::shear(0.3, -0.7).determinant() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn composition_order() {
        let s = Affine2::scale(2.0, 1.0);
        let r = Affine2::rotation(std::f64::consts::FRAC_PI_2);
        // rotate after scaling: (1,0) -> (2,0) -> (0,2)
        let p = r.then_after(&s).apply(Vec2::new(1.0, 0.0));
        assert!((p.x).abs() < 1e-12 && (p.y - 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn inverse_round_trips(a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64,
                               d in -3.0..3.0f64, tx in -50.0..50.0f64, ty in -50.0..50.0f64,
                               px in -100.0..100.0f64, py in -100.0..100.0f64) {
            let mut m = Affine2::linear(a, b, c, d);
            m.m[0][2] = tx;
            m.m[1][2] = ty;
            prop_assume!(m.determinant().abs() > 1e-2);
            let inv = m.inverse().unwrap();
            let p = Vec2::new(px, py);
            let q = inv.apply(m.apply(p));
            prop_assert!((q - p).norm() < 1e-8);
        }
    }
}
