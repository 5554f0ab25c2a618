//! Closed discs in the complex plane.
//!
//! Discs show up in two roles: as parameter domains for graph pieces, and as
//! the images of compact sets under linear functionals (every control estimate
//! for a shear is phrased on such a projection disc).

use crate::scalar::{Real, C};
use num_complex::Complex;

/// Closed disc `{ t : |t - center| <= radius }`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disc<R: Real> {
    pub center: C<R>,
    pub radius: R,
}

impl<R: Real> Disc<R> {
    pub fn new(center: C<R>, radius: R) -> Self {
        Disc { center, radius }
    }

    pub fn centered(radius: R) -> Self {
        Disc {
            center: Complex::new(R::zero(), R::zero()),
            radius,
        }
    }

    pub fn contains(&self, t: C<R>, tol: R) -> bool {
        (t - self.center).norm() <= self.radius + tol
    }

    /// Signed distance from `t` to the disc (negative inside).
    pub fn signed_dist(&self, t: C<R>) -> R {
        (t - self.center).norm() - self.radius
    }

    /// Smallest disc containing `self` and `other`.
    pub fn hull(&self, other: &Disc<R>) -> Disc<R> {
        let d = (other.center - self.center).norm();
        if d + other.radius <= self.radius {
            return *self;
        }
        if d + self.radius <= other.radius {
            return *other;
        }
        let r = (d + self.radius + other.radius) * R::of(0.5);
        // Center sits on the segment between the two centers, placed so both
        // boundary extremes are at distance r.
        let t = (r - self.radius) / d;
        let center = self.center + (other.center - self.center) * Complex::new(t, R::zero());
        Disc { center, radius: r }
    }

    /// Smallest disc containing every disc of a nonempty slice.
    pub fn hull_all(discs: &[Disc<R>]) -> Disc<R> {
        assert!(!discs.is_empty(), "hull of an empty disc family");
        let mut acc = discs[0];
        for d in &discs[1..] {
            acc = acc.hull(d);
        }
        acc
    }

    /// `n` evenly spaced boundary points, starting at angle 0.
    pub fn boundary_points(&self, n: usize) -> Vec<C<R>> {
        let two_pi = R::of(std::f64::consts::TAU);
        (0..n)
            .map(|k| {
                let th = two_pi * R::of(k as f64) / R::of(n as f64);
                self.center + Complex::new(th.cos(), th.sin()) * Complex::new(self.radius, R::zero())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c64;

    #[test]
    fn hull_of_nested_discs_is_outer() {
        let a: Disc<f64> = Disc::new(c64(0.0, 0.0), 3.0);
        let b: Disc<f64> = Disc::new(c64(1.0, 0.0), 1.0);
        assert_eq!(a.hull(&b), a);
        assert_eq!(b.hull(&a), a);
    }

    #[test]
    fn hull_of_disjoint_discs_touches_both_extremes() {
        let a: Disc<f64> = Disc::new(c64(-2.0, 0.0), 1.0);
        let b: Disc<f64> = Disc::new(c64(4.0, 0.0), 2.0);
        let h = a.hull(&b);
        // Extremes at -3 and 6, so center 1.5 and radius 4.5.
        assert!((h.center.re - 1.5).abs() < 1e-14);
        assert!(h.center.im.abs() < 1e-14);
        assert!((h.radius - 4.5).abs() < 1e-14);
        // Hull contains both generators with zero slack at the extremes.
        assert!(h.contains(c64(-3.0, 0.0), 1e-12));
        assert!(h.contains(c64(6.0, 0.0), 1e-12));
    }

    #[test]
    fn boundary_points_sit_on_the_circle() {
        let d: Disc<f64> = Disc::new(c64(1.0, -2.0), 2.5);
        for p in d.boundary_points(37) {
            assert!(((p - d.center).norm() - 2.5).abs() < 1e-13);
        }
    }
}
