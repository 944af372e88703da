//! Minimal 2x2 complex and real matrix arithmetic.
//!
//! The model is strictly two-dimensional (one cavity mode and its conjugate
//! or doubled partner), so the handful of operations needed — products,
//! inverses, eigenvalues, Cholesky-style factors — are written out directly.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

/// Dense 2x2 complex matrix in row-major order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexMat2 {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl ComplexMat2 {
    pub const fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn zero() -> Self {
        let z = Complex64::ZERO;
        Self::new(z, z, z, z)
    }

    pub fn identity() -> Self {
        let z = Complex64::ZERO;
        let o = Complex64::ONE;
        Self::new(o, z, z, o)
    }

    pub fn diag(a: Complex64, b: Complex64) -> Self {
        let z = Complex64::ZERO;
        Self::new(a, z, z, b)
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> Complex64 {
        self.m11 + self.m22
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m11, self.m21, self.m12, self.m22)
    }

    /// Largest entry magnitude; used for scale-aware tolerances.
    pub fn max_abs(&self) -> f64 {
        self.m11
            .norm()
            .max(self.m12.norm())
            .max(self.m21.norm())
            .max(self.m22.norm())
    }

    /// Inverse, or `None` when the determinant is negligible relative to the
    /// squared entry scale.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        let scale = self.max_abs();
        if det.norm() <= 1e-14 * scale * scale {
            return None;
        }
        Some(Self::new(
            self.m22 / det,
            -self.m12 / det,
            -self.m21 / det,
            self.m11 / det,
        ))
    }

    /// Eigenvalues from the quadratic formula, unordered.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let half_tr = 0.5 * self.trace();
        let disc = (half_tr * half_tr - self.det()).sqrt();
        (half_tr + disc, half_tr - disc)
    }

    pub fn mul_vec(&self, v: (Complex64, Complex64)) -> (Complex64, Complex64) {
        (
            self.m11 * v.0 + self.m12 * v.1,
            self.m21 * v.0 + self.m22 * v.1,
        )
    }
}

impl Add for ComplexMat2 {
    type Output = Self;
    fn add(self, r: Self) -> Self {
        Self::new(
            self.m11 + r.m11,
            self.m12 + r.m12,
            self.m21 + r.m21,
            self.m22 + r.m22,
        )
    }
}

impl Sub for ComplexMat2 {
    type Output = Self;
    fn sub(self, r: Self) -> Self {
        Self::new(
            self.m11 - r.m11,
            self.m12 - r.m12,
            self.m21 - r.m21,
            self.m22 - r.m22,
        )
    }
}

impl Mul for ComplexMat2 {
    type Output = Self;
    fn mul(self, r: Self) -> Self {
        Self::new(
            self.m11 * r.m11 + self.m12 * r.m21,
            self.m11 * r.m12 + self.m12 * r.m22,
            self.m21 * r.m11 + self.m22 * r.m21,
            self.m21 * r.m12 + self.m22 * r.m22,
        )
    }
}

impl Mul<Complex64> for ComplexMat2 {
    type Output = Self;
    fn mul(self, c: Complex64) -> Self {
        Self::new(self.m11 * c, self.m12 * c, self.m21 * c, self.m22 * c)
    }
}

impl Mul<f64> for ComplexMat2 {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        Self::new(self.m11 * c, self.m12 * c, self.m21 * c, self.m22 * c)
    }
}

/// Dense 2x2 real matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealMat2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl RealMat2 {
    pub const fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn max_abs(&self) -> f64 {
        self.m11
            .abs()
            .max(self.m12.abs())
            .max(self.m21.abs())
            .max(self.m22.abs())
    }

    /// Eigenvalues of a symmetric matrix, returned as (larger, smaller).
    pub fn sym_eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.m11 + self.m22);
        let half_diff = 0.5 * (self.m11 - self.m22);
        let r = (half_diff * half_diff + self.m12 * self.m21).sqrt();
        (mean + r, mean - r)
    }

    /// Lower-triangular Cholesky factor of a symmetric PSD matrix.
    ///
    /// Entries within `tol` of zero are clamped, so matrices that are PSD up
    /// to rounding still factor. Returns `None` when the matrix is genuinely
    /// indefinite at that tolerance.
    pub fn cholesky(&self, tol: f64) -> Option<RealMat2> {
        let d11 = self.m11;
        let d21 = self.m21;
        let d22 = self.m22;
        if d11 < -tol || d22 < -tol {
            return None;
        }
        if d11 <= tol {
            // zero pivot: PSD only if the off-diagonal vanishes too
            if d21.abs() > tol.sqrt() * (1.0 + d22.abs()).sqrt() {
                return None;
            }
            return Some(RealMat2::new(0.0, 0.0, 0.0, d22.max(0.0).sqrt()));
        }
        let l11 = d11.sqrt();
        let l21 = d21 / l11;
        let rem = d22 - l21 * l21;
        if rem < -tol {
            return None;
        }
        Some(RealMat2::new(l11, 0.0, l21, rem.max(0.0).sqrt()))
    }

    pub fn mul_vec(&self, v: (f64, f64)) -> (f64, f64) {
        (
            self.m11 * v.0 + self.m12 * v.1,
            self.m21 * v.0 + self.m22 * v.1,
        )
    }

    pub fn matmul(&self, r: &RealMat2) -> RealMat2 {
        RealMat2::new(
            self.m11 * r.m11 + self.m12 * r.m21,
            self.m11 * r.m12 + self.m12 * r.m22,
            self.m21 * r.m11 + self.m22 * r.m21,
            self.m21 * r.m12 + self.m22 * r.m22,
        )
    }

    pub fn transpose(&self) -> RealMat2 {
        RealMat2::new(self.m11, self.m21, self.m12, self.m22)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inverse_roundtrip() {
        let m = ComplexMat2::new(c(1.0, 2.0), c(-0.5, 0.1), c(0.3, -0.7), c(2.0, -1.0));
        let inv = m.inverse().unwrap();
        let id = m * inv;
        assert!((id - ComplexMat2::identity()).max_abs() < 1e-14);
    }

    #[test]
    fn singular_inverse_is_none() {
        let m = ComplexMat2::new(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0));
        assert!(m.inverse().is_none());
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let m = ComplexMat2::diag(c(3.0, 1.0), c(-2.0, 0.5));
        let (a, b) = m.eigenvalues();
        let mut got = [a, b];
        got.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        assert!((got[0] - c(-2.0, 0.5)).norm() < 1e-12);
        assert!((got[1] - c(3.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn sym_eigenvalues_match_trace_det() {
        let m = RealMat2::new(2.0, -0.3, -0.3, 0.5);
        let (dp, dm) = m.sym_eigenvalues();
        assert!((dp + dm - m.trace()).abs() < 1e-12);
        assert!((dp * dm - (m.m11 * m.m22 - m.m12 * m.m21)).abs() < 1e-12);
        assert!(dp >= dm);
    }

    #[test]
    fn cholesky_reconstructs() {
        let m = RealMat2::new(2.0, 0.7, 0.7, 1.1);
        let l = m.cholesky(1e-14).unwrap();
        let back = l.matmul(&l.transpose());
        assert!((back.m11 - m.m11).abs() < 1e-14);
        assert!((back.m21 - m.m21).abs() < 1e-14);
        assert!((back.m22 - m.m22).abs() < 1e-14);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = RealMat2::new(1.0, 2.0, 2.0, 1.0);
        assert!(m.cholesky(1e-14).is_none());
    }
}
