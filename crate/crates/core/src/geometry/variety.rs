//! Algebraic models of the subvarieties we interpolate along.
//!
//! Two shapes cover everything the pipeline handles: affine subspaces (given
//! by a base point and an orthonormal tangent basis) and polynomial graph
//! curves `t -> (t, p(t), 0, ..., 0)`. The moving-between-stages machinery
//! only ever parametrizes one-dimensional models; higher-rank subspaces still
//! participate in membership tests (normalization starts from them).

use super::point::CPoint;
use crate::automorphism::Poly;
use crate::scalar::{czero, Real, C};
use num_complex::Complex;

#[derive(Clone, Debug)]
pub enum VarietyModel<R: Real> {
    /// `base + span(basis)` with `basis` orthonormal.
    AffineSubspace {
        base: CPoint<R>,
        basis: Vec<CPoint<R>>,
    },
    /// `{ (t, p(t), 0, ..., 0) : t in C }` inside C^ambient_dim.
    GraphCurve { ambient_dim: usize, p: Poly<R> },
}

impl<R: Real> VarietyModel<R> {
    /// The coordinate axis `{ z_2 = ... = z_n = 0 }`, the normal form all
    /// tame sequences are carried to.
    pub fn coordinate_axis(n: usize) -> Self {
        let mut e1 = vec![czero(); n];
        e1[0] = Complex::new(R::one(), R::zero());
        VarietyModel::AffineSubspace {
            base: CPoint::zero(n),
            basis: vec![CPoint::new(e1)],
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            VarietyModel::AffineSubspace { base, .. } => base.dim(),
            VarietyModel::GraphCurve { ambient_dim, .. } => *ambient_dim,
        }
    }

    /// True when the model is one-dimensional and can be parametrized by a
    /// single complex variable.
    pub fn is_curve(&self) -> bool {
        match self {
            VarietyModel::AffineSubspace { basis, .. } => basis.len() == 1,
            VarietyModel::GraphCurve { .. } => true,
        }
    }

    /// Point with parameter `t`; panics if the model is not a curve.
    pub fn param_point(&self, t: C<R>) -> CPoint<R> {
        match self {
            VarietyModel::AffineSubspace { base, basis } => {
                assert_eq!(basis.len(), 1, "parametrization needs a curve model");
                base.add_scaled(&basis[0], t)
            }
            VarietyModel::GraphCurve { ambient_dim, p } => {
                let mut coords = vec![czero(); *ambient_dim];
                coords[0] = t;
                coords[1] = p.eval(t);
                CPoint::new(coords)
            }
        }
    }

    /// Parameter of a point assumed to lie on (or near) a curve model: the
    /// tangential coordinate for a line, the first coordinate for a graph.
    pub fn param_of(&self, z: &CPoint<R>) -> C<R> {
        match self {
            VarietyModel::AffineSubspace { base, basis } => {
                assert_eq!(basis.len(), 1, "parametrization needs a curve model");
                z.sub(base).inner(&basis[0])
            }
            VarietyModel::GraphCurve { .. } => z.coords[0],
        }
    }

    /// Defect functional measuring how far `z` is from the variety. For a
    /// subspace this is the exact Euclidean distance; for a graph curve it is
    /// the residual of the defining equations (`|z_2 - p(z_1)|` plus the
    /// moduli of the trailing coordinates), which vanishes exactly on the
    /// curve and is what the membership tolerance is quoted against.
    pub fn membership_defect(&self, z: &CPoint<R>) -> R {
        match self {
            VarietyModel::AffineSubspace { base, basis } => {
                let mut w = z.sub(base);
                for u in basis {
                    let c = w.inner(u);
                    w = w.add_scaled(u, -c);
                }
                w.norm()
            }
            VarietyModel::GraphCurve { p, .. } => {
                let mut defect = (z.coords[1] - p.eval(z.coords[0])).norm();
                for c in &z.coords[2..] {
                    defect = defect + c.norm();
                }
                defect
            }
        }
    }

    pub fn contains(&self, z: &CPoint<R>, tol: R) -> bool {
        self.membership_defect(z) <= tol
    }
}
