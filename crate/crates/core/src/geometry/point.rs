//! Points of C^N with the Hermitian inner product and Euclidean norm.

use crate::scalar::{czero, Real, C};
use num_complex::Complex;

/// A point (or vector) of C^N, stored as its coordinate list.
#[derive(Clone, Debug, PartialEq)]
pub struct CPoint<R: Real> {
    pub coords: Vec<C<R>>,
}

impl<R: Real> std::fmt::Display for CPoint<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:.6}{:+.6}i", c.re.as_f64(), c.im.as_f64())?;
        }
        write!(f, ")")
    }
}

impl<R: Real> CPoint<R> {
    pub fn new(coords: Vec<C<R>>) -> Self {
        CPoint { coords }
    }

    /// Origin of C^n.
    pub fn zero(n: usize) -> Self {
        CPoint {
            coords: vec![czero(); n],
        }
    }

    /// Point from `(re, im)` pairs given as f64 literals.
    pub fn from_f64_pairs(pairs: &[(f64, f64)]) -> Self {
        CPoint {
            coords: pairs
                .iter()
                .map(|&(re, im)| Complex::new(R::of(re), R::of(im)))
                .collect(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Hermitian inner product `<self, other> = sum_i self_i * conj(other_i)`,
    /// linear in `self`, conjugate-linear in `other`.
    pub fn inner(&self, other: &Self) -> C<R> {
        debug_assert_eq!(self.dim(), other.dim());
        let mut acc = czero();
        for (a, b) in self.coords.iter().zip(&other.coords) {
            acc = acc + a * b.conj();
        }
        acc
    }

    /// Squared Euclidean norm.
    pub fn norm_sq(&self) -> R {
        self.coords
            .iter()
            .map(|z| z.re * z.re + z.im * z.im)
            .fold(R::zero(), |a, b| a + b)
    }

    /// Euclidean norm.
    pub fn norm(&self) -> R {
        self.norm_sq().sqrt()
    }

    /// Euclidean distance to another point.
    pub fn dist(&self, other: &Self) -> R {
        debug_assert_eq!(self.dim(), other.dim());
        let mut acc = R::zero();
        for (a, b) in self.coords.iter().zip(&other.coords) {
            let d = a - b;
            acc = acc + d.re * d.re + d.im * d.im;
        }
        acc.sqrt()
    }

    pub fn add(&self, other: &Self) -> Self {
        CPoint::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        CPoint::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scale(&self, s: C<R>) -> Self {
        CPoint::new(self.coords.iter().map(|a| a * s).collect())
    }

    pub fn scale_re(&self, s: R) -> Self {
        CPoint::new(
            self.coords
                .iter()
                .map(|a| Complex::new(a.re * s, a.im * s))
                .collect(),
        )
    }

    /// `self + t * dir`.
    pub fn add_scaled(&self, dir: &Self, t: C<R>) -> Self {
        CPoint::new(
            self.coords
                .iter()
                .zip(&dir.coords)
                .map(|(a, b)| a + b * t)
                .collect(),
        )
    }

    /// Unit vector in the direction of `self`, or `None` for (near-)zero input.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n <= R::of(1e-300) {
            return None;
        }
        Some(self.scale_re(R::one() / n))
    }

    /// Largest coordinate modulus (used for the overflow guard).
    pub fn max_coord_abs(&self) -> R {
        self.coords
            .iter()
            .map(|z| z.re.abs().max(z.im.abs()))
            .fold(R::zero(), |a, b| a.max(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c64;

    #[test]
    fn inner_product_is_hermitian() {
        let x: CPoint<f64> = CPoint::new(vec![c64(1.0, 2.0), c64(0.0, -1.0)]);
        let y: CPoint<f64> = CPoint::new(vec![c64(3.0, 0.5), c64(2.0, 2.0)]);
        let a = x.inner(&y);
        let b = y.inner(&x);
        assert!((a - b.conj()).norm() < 1e-15);
    }

    #[test]
    fn norm_and_dist() {
        let x: CPoint<f64> = CPoint::from_f64_pairs(&[(3.0, 0.0), (0.0, 4.0)]);
        assert!((x.norm() - 5.0).abs() < 1e-15);
        let y = CPoint::zero(2);
        assert!((x.dist(&y) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn normalized_rejects_zero() {
        let z: CPoint<f64> = CPoint::zero(3);
        assert!(z.normalized().is_none());
    }
}
