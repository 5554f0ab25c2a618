//! Closed Euclidean balls of C^N.

use super::disc::Disc;
use super::point::CPoint;
use crate::scalar::Real;

/// Closed ball `{ z : |z - center| <= radius }` in C^N.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball<R: Real> {
    pub center: CPoint<R>,
    pub radius: R,
}

impl<R: Real> Ball<R> {
    pub fn new(center: CPoint<R>, radius: R) -> Self {
        assert!(radius >= R::zero(), "ball radius must be nonnegative");
        Ball { center, radius }
    }

    /// Ball centered at the origin of C^n.
    pub fn centered(n: usize, radius: R) -> Self {
        Ball::new(CPoint::zero(n), radius)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn contains(&self, z: &CPoint<R>, tol: R) -> bool {
        z.dist(&self.center) <= self.radius + tol
    }

    /// Signed distance to the ball (negative inside).
    pub fn signed_dist(&self, z: &CPoint<R>) -> R {
        z.dist(&self.center) - self.radius
    }

    /// Image under a unit functional `z -> <z, u>`: a disc of the same radius.
    pub fn project(&self, u: &CPoint<R>) -> Disc<R> {
        Disc::new(self.center.inner(u), self.radius)
    }

    pub fn inflate(&self, pad: R) -> Ball<R> {
        Ball::new(self.center.clone(), self.radius + pad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c64;

    #[test]
    fn projection_of_a_ball_is_a_disc_of_equal_radius() {
        let b: Ball<f64> = Ball::new(CPoint::from_f64_pairs(&[(1.0, 0.0), (0.0, 2.0)]), 3.0);
        let u: CPoint<f64> = CPoint::new(vec![c64(1.0, 0.0), c64(0.0, 0.0)]);
        let d = b.project(&u);
        assert!((d.center - c64(1.0, 0.0)).norm() < 1e-15);
        assert!((d.radius - 3.0).abs() < 1e-15);
    }

    #[test]
    fn signed_dist_sign_convention() {
        let b: Ball<f64> = Ball::centered(2, 2.0);
        assert!(b.signed_dist(&CPoint::from_f64_pairs(&[(1.0, 0.0), (0.0, 0.0)])) < 0.0);
        assert!(b.signed_dist(&CPoint::from_f64_pairs(&[(3.0, 0.0), (0.0, 0.0)])) > 0.0);
    }
}
