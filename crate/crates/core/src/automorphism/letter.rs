//! Elementary polynomial automorphisms of C^N: shears, overshears, and
//! affine unitary maps.
//!
//! Every shear-type letter carries a unitary frame. The letter acts along one
//! frame column (`dir`) and reads its argument through another (`func`):
//!
//! * shear:      `z -> z + e_dir * h(<z, e_func>)`          with `dir != func`
//! * overshear:  `z -> z + e_dir * (exp(h(<z, e_func>)) - 1) * <z, e_dir>`
//!
//! Because `e_dir` is orthogonal to `e_func`, applying a shear does not change
//! the functional value, so the inverse is the same letter with `-h`; an
//! overshear likewise scales its `e_dir`-component by `exp(h)` where `h` only
//! depends on coordinates the letter leaves fixed, so the inverse scales by
//! `exp(-h)`. Both inverses are evaluated, not symbolically composed.

use super::poly::Poly;
use crate::geometry::CPoint;
use crate::scalar::{czero, Real, C};
use num_complex::Complex;

/// A unitary matrix stored column-major; columns form an orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame<R: Real> {
    pub cols: Vec<CPoint<R>>,
}

impl<R: Real> Frame<R> {
    /// Standard coordinate frame of C^n.
    pub fn standard(n: usize) -> Self {
        let cols = (0..n)
            .map(|j| {
                let mut v = vec![czero(); n];
                v[j] = Complex::new(R::one(), R::zero());
                CPoint::new(v)
            })
            .collect();
        Frame { cols }
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    pub fn col(&self, j: usize) -> &CPoint<R> {
        &self.cols[j]
    }

    /// Largest deviation of `F^H F` from the identity.
    pub fn unitary_defect(&self) -> R {
        let n = self.dim();
        let mut worst = R::zero();
        for i in 0..n {
            for j in 0..n {
                let g = self.cols[i].inner(&self.cols[j]);
                let target = if i == j {
                    Complex::new(R::one(), R::zero())
                } else {
                    czero()
                };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }

    /// `F z` (change of basis from frame coordinates to ambient).
    pub fn apply(&self, z: &CPoint<R>) -> CPoint<R> {
        let n = self.dim();
        let mut out = CPoint::zero(n);
        for (j, col) in self.cols.iter().enumerate() {
            let zj = z.coords[j];
            for i in 0..n {
                out.coords[i] = out.coords[i] + col.coords[i] * zj;
            }
        }
        out
    }

    /// `F^H z` (ambient to frame coordinates); exact inverse of `apply` for a
    /// unitary frame, up to rounding.
    pub fn apply_adjoint(&self, z: &CPoint<R>) -> CPoint<R> {
        CPoint::new(self.cols.iter().map(|c| z.inner(c)).collect())
    }

    /// Completes the given orthonormal list to a full unitary frame, placing
    /// the prescribed vectors at the requested column indices and filling the
    /// remaining columns by Gram-Schmidt over the standard basis.
    pub fn complete(n: usize, fixed: &[(usize, CPoint<R>)]) -> Self {
        let mut cols: Vec<Option<CPoint<R>>> = vec![None; n];
        for (j, v) in fixed {
            debug_assert!((v.norm() - R::one()).abs() < R::of(1e-9));
            cols[*j] = Some(v.clone());
        }
        let mut chosen: Vec<CPoint<R>> = fixed.iter().map(|(_, v)| v.clone()).collect();
        let std = Frame::standard(n);
        let mut std_iter = 0usize;
        for slot in cols.iter_mut() {
            if slot.is_some() {
                continue;
            }
            // Next standard vector with a healthy component orthogonal to
            // everything chosen so far.
            loop {
                assert!(std_iter < n + chosen.len(), "frame completion exhausted candidates");
                let mut v = std.cols[std_iter % n].clone();
                std_iter += 1;
                for u in &chosen {
                    let c = v.inner(u);
                    v = v.add_scaled(u, -c);
                }
                if let Some(unit) = v.normalized() {
                    if v.norm() > R::of(1e-6) {
                        chosen.push(unit.clone());
                        *slot = Some(unit);
                        break;
                    }
                }
            }
        }
        Frame {
            cols: cols.into_iter().map(|c| c.unwrap()).collect(),
        }
    }
}

/// One letter of an automorphism word.
#[derive(Clone, Debug)]
pub enum ElementaryAut<R: Real> {
    Shear {
        frame: Frame<R>,
        dir: usize,
        func: usize,
        h: Poly<R>,
    },
    Overshear {
        frame: Frame<R>,
        dir: usize,
        func: usize,
        h: Poly<R>,
    },
    AffineUnitary {
        q: Frame<R>,
        v: CPoint<R>,
    },
}

impl<R: Real> ElementaryAut<R> {
    pub fn dim(&self) -> usize {
        match self {
            ElementaryAut::Shear { frame, .. } | ElementaryAut::Overshear { frame, .. } => {
                frame.dim()
            }
            ElementaryAut::AffineUnitary { q, .. } => q.dim(),
        }
    }

    /// The functional value this letter reads, if it is a shear type.
    pub fn functional_value(&self, z: &CPoint<R>) -> Option<C<R>> {
        match self {
            ElementaryAut::Shear { frame, func, .. }
            | ElementaryAut::Overshear { frame, func, .. } => Some(z.inner(frame.col(*func))),
            ElementaryAut::AffineUnitary { .. } => None,
        }
    }

    pub fn apply(&self, z: &CPoint<R>) -> CPoint<R> {
        match self {
            ElementaryAut::Shear {
                frame, dir, func, h, ..
            } => {
                let t = z.inner(frame.col(*func));
                z.add_scaled(frame.col(*dir), h.eval(t))
            }
            ElementaryAut::Overshear {
                frame, dir, func, h, ..
            } => {
                let t = z.inner(frame.col(*func));
                let a = z.inner(frame.col(*dir));
                let factor = h.eval(t).exp() - Complex::new(R::one(), R::zero());
                z.add_scaled(frame.col(*dir), a * factor)
            }
            ElementaryAut::AffineUnitary { q, v } => q.apply(z).add(v),
        }
    }

    pub fn apply_inverse(&self, z: &CPoint<R>) -> CPoint<R> {
        match self {
            ElementaryAut::Shear {
                frame, dir, func, h, ..
            } => {
                // <z', e_func> equals <z, e_func> because e_dir _|_ e_func.
                let t = z.inner(frame.col(*func));
                z.add_scaled(frame.col(*dir), -h.eval(t))
            }
            ElementaryAut::Overshear {
                frame, dir, func, h, ..
            } => {
                let t = z.inner(frame.col(*func));
                let a = z.inner(frame.col(*dir));
                // Forward map sent the dir-component a0 to a0 * exp(h); undo.
                let factor = (-h.eval(t)).exp() - Complex::new(R::one(), R::zero());
                z.add_scaled(frame.col(*dir), a * factor)
            }
            ElementaryAut::AffineUnitary { q, v } => q.apply_adjoint(&z.sub(v)),
        }
    }

    /// Volume neutrality decided from the letter structure alone, no
    /// numerical integration: a shear displaces along a direction that its
    /// profile cannot see (the functional is orthogonal to the direction up
    /// to the frame defect), so its Jacobian determinant is identically 1;
    /// an affine unitary scales volume by `|det Q| = 1`; an overshear is
    /// neutral only when its profile vanishes identically.
    pub fn is_volume_neutral(&self) -> bool {
        match self {
            ElementaryAut::Shear { .. } => self.frame_defect() <= R::of(1e-9),
            ElementaryAut::Overshear { h, .. } => {
                h.coefficients().iter().all(|c| c.norm() == R::zero())
            }
            ElementaryAut::AffineUnitary { q, .. } => q.unitary_defect() <= R::of(1e-9),
        }
    }

    /// Unit Jacobian determinant holds for shears by orthogonality; an
    /// overshear has Jacobian `exp(h)`, an affine unitary `det Q`. Nothing in
    /// the pipeline needs determinants, but the orthogonality that makes the
    /// shear volume-preserving is worth asserting when debugging.
    pub fn frame_defect(&self) -> R {
        match self {
            ElementaryAut::Shear { frame, dir, func, .. }
            | ElementaryAut::Overshear { frame, dir, func, .. } => {
                let orth = frame.col(*dir).inner(frame.col(*func)).norm();
                frame.unitary_defect().max(orth)
            }
            ElementaryAut::AffineUnitary { q, .. } => q.unitary_defect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c64;

    fn tilted_frame() -> Frame<f64> {
        // Unit direction with both coordinates active, completed to a frame.
        // Second column is (-conj(d2), conj(d1)), the canonical complex
        // normal to d in C^2.
        let d = CPoint::new(vec![c64(0.6, 0.0), c64(0.0, 0.8)]);
        let f = CPoint::new(vec![c64(0.0, 0.8), c64(0.6, 0.0)]);
        Frame {
            cols: vec![d, f],
        }
    }

    #[test]
    fn tilted_frame_is_unitary_and_orthogonal() {
        let f = tilted_frame();
        assert!(f.unitary_defect() < 1e-15);
    }

    #[test]
    fn shear_roundtrip_is_tight() {
        let h = Poly::Dense {
            coeffs: vec![c64(0.5, 0.0), c64(0.0, 0.0), c64(1.0, -0.25)],
        };
        let letter = ElementaryAut::Shear {
            frame: tilted_frame(),
            dir: 0,
            func: 1,
            h,
        };
        let z = CPoint::from_f64_pairs(&[(1.7, -0.4), (0.3, 2.1)]);
        let w = letter.apply(&z);
        let back = letter.apply_inverse(&w);
        assert!(back.dist(&z) < 1e-13);
    }

    #[test]
    fn shear_preserves_the_functional() {
        let h = Poly::Dense {
            coeffs: vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(2.0, 1.0)],
        };
        let letter = ElementaryAut::Shear {
            frame: tilted_frame(),
            dir: 0,
            func: 1,
            h,
        };
        let z = CPoint::from_f64_pairs(&[(0.2, 0.9), (-1.0, 0.5)]);
        let before = letter.functional_value(&z).unwrap();
        let after = letter.functional_value(&letter.apply(&z)).unwrap();
        assert!((before - after).norm() < 1e-14);
    }

    #[test]
    fn overshear_roundtrip_is_tight() {
        let h = Poly::Dense {
            coeffs: vec![c64(0.0, 0.0), c64(0.3, 0.1)],
        };
        let letter = ElementaryAut::Overshear {
            frame: tilted_frame(),
            dir: 0,
            func: 1,
            h,
        };
        let z = CPoint::from_f64_pairs(&[(0.9, -1.2), (0.4, 0.8)]);
        let w = letter.apply(&z);
        let back = letter.apply_inverse(&w);
        assert!(back.dist(&z) < 1e-13);
    }

    #[test]
    fn affine_unitary_roundtrip() {
        let q = tilted_frame();
        let v = CPoint::from_f64_pairs(&[(2.0, 0.0), (0.0, -1.0)]);
        let letter = ElementaryAut::AffineUnitary { q, v };
        let z = CPoint::from_f64_pairs(&[(0.1, 0.2), (0.3, 0.4)]);
        let w = letter.apply(&z);
        let back = letter.apply_inverse(&w);
        assert!(back.dist(&z) < 1e-14);
    }

    #[test]
    fn frame_completion_fills_missing_columns() {
        let d: CPoint<f64> = CPoint::new(vec![c64(0.6, 0.0), c64(0.0, 0.8)]).normalized().unwrap();
        let f = Frame::complete(2, &[(0, d)]);
        assert!(f.unitary_defect() < 1e-12);
    }

    #[test]
    fn volume_neutrality_is_structural() {
        let h = Poly::Dense {
            coeffs: vec![c64(0.0, 0.0), c64(0.3, 0.1)],
        };
        let shear = ElementaryAut::Shear {
            frame: tilted_frame(),
            dir: 0,
            func: 1,
            h: h.clone(),
        };
        assert!(shear.is_volume_neutral());

        // A nontrivial overshear multiplies volume by exp(Re h) ≠ 1.
        let over = ElementaryAut::Overshear {
            frame: tilted_frame(),
            dir: 0,
            func: 1,
            h,
        };
        assert!(!over.is_volume_neutral());

        let rigid = ElementaryAut::AffineUnitary {
            q: tilted_frame(),
            v: CPoint::from_f64_pairs(&[(1.0, 0.0), (0.0, 0.0)]),
        };
        assert!(rigid.is_volume_neutral());
    }
}
