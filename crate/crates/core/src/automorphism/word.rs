//! Words of elementary automorphisms.
//!
//! A word is a finite composition, applied left to right: `letters[0]` acts
//! first. Words are never flattened into a single polynomial map — the whole
//! point of the construction is that the composition stays represented as a
//! sequence of letters whose individual behaviour is controlled. Stage
//! boundaries partition the letter list so that any prefix corresponding to a
//! stage of the outer iteration can be evaluated on its own.

use super::letter::ElementaryAut;
use crate::geometry::CPoint;
use crate::scalar::Real;
use std::ops::Range;
use thiserror::Error;

/// Modulus threshold beyond which evaluation is reported as an overflow
/// instead of continuing into meaningless floating-point territory.
pub const ESCAPE_THRESHOLD: f64 = 1e100;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApplyError {
    /// A coordinate passed the escape threshold after applying the given
    /// letter (index into the word's letter list).
    #[error("coordinate modulus passed 1e100 after letter {letter}")]
    Overflow { letter: usize },
}

#[derive(Clone, Debug)]
pub struct AutWord<R: Real> {
    dim: usize,
    letters: Vec<ElementaryAut<R>>,
    /// Half-open ranges into `letters`, one per completed stage, in order and
    /// contiguous from 0.
    stages: Vec<Range<usize>>,
}

impl<R: Real> AutWord<R> {
    pub fn identity(dim: usize) -> Self {
        AutWord {
            dim,
            letters: Vec::new(),
            stages: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[ElementaryAut<R>] {
        &self.letters
    }

    pub fn stages(&self) -> &[Range<usize>] {
        &self.stages
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn push(&mut self, letter: ElementaryAut<R>) {
        debug_assert_eq!(letter.dim(), self.dim);
        self.letters.push(letter);
    }

    pub fn extend(&mut self, letters: impl IntoIterator<Item = ElementaryAut<R>>) {
        for l in letters {
            self.push(l);
        }
    }

    /// Closes the current stage at the present end of the letter list.
    /// Stages must be closed in order; an empty stage (no new letters) is
    /// legal and records an identity step.
    pub fn close_stage(&mut self) {
        let start = self.stages.last().map(|r| r.end).unwrap_or(0);
        self.stages.push(start..self.letters.len());
    }

    /// Restores externally recorded stage boundaries (wire loading).
    pub fn with_stages(mut self, stages: Vec<Range<usize>>) -> Self {
        self.stages = stages;
        self
    }

    fn overflowed(z: &CPoint<R>) -> bool {
        !z.coords
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
            || z.max_coord_abs() > R::of(ESCAPE_THRESHOLD)
    }

    /// Applies letters `range` in order.
    pub fn apply_range(&self, z: &CPoint<R>, range: Range<usize>) -> Result<CPoint<R>, ApplyError> {
        let mut w = z.clone();
        for idx in range {
            w = self.letters[idx].apply(&w);
            if Self::overflowed(&w) {
                return Err(ApplyError::Overflow { letter: idx });
            }
        }
        Ok(w)
    }

    /// Full word, left to right.
    pub fn apply(&self, z: &CPoint<R>) -> Result<CPoint<R>, ApplyError> {
        self.apply_range(z, 0..self.letters.len())
    }

    /// Prefix of the word through the end of stage `k` (1-based; `k == 0`
    /// gives the identity).
    pub fn apply_through_stage(&self, z: &CPoint<R>, k: usize) -> Result<CPoint<R>, ApplyError> {
        let end = if k == 0 {
            0
        } else {
            self.stages
                .get(k - 1)
                .map(|r| r.end)
                .unwrap_or(self.letters.len())
        };
        self.apply_range(z, 0..end)
    }

    /// The word truncated to its first `k` closed stages (1-based; `k == 0`
    /// gives the identity).  Evaluating the truncation agrees with
    /// [`apply_through_stage`](Self::apply_through_stage); having it as a
    /// standalone word lets stage prefixes feed anything that consumes a
    /// whole word, like level sweeps.
    pub fn truncated_to_stage(&self, k: usize) -> AutWord<R> {
        let k = k.min(self.stages.len());
        let end = if k == 0 { 0 } else { self.stages[k - 1].end };
        AutWord {
            dim: self.dim,
            letters: self.letters[..end].to_vec(),
            stages: self.stages[..k].to_vec(),
        }
    }

    /// Inverse word: letters reversed, each inverted exactly.
    pub fn apply_inverse(&self, z: &CPoint<R>) -> Result<CPoint<R>, ApplyError> {
        let mut w = z.clone();
        for (idx, letter) in self.letters.iter().enumerate().rev() {
            w = letter.apply_inverse(&w);
            if Self::overflowed(&w) {
                return Err(ApplyError::Overflow { letter: idx });
            }
        }
        Ok(w)
    }

    /// Appends all letters of `other` (stage markers of `other` are dropped;
    /// the caller owns stage bookkeeping of the combined word).
    pub fn concat(&mut self, other: AutWord<R>) {
        debug_assert_eq!(other.dim, self.dim);
        self.letters.extend(other.letters);
    }

    /// Largest frame/orthogonality defect over all letters; a structural
    /// sanity measure for loaded words.
    pub fn worst_frame_defect(&self) -> R {
        self.letters
            .iter()
            .map(|l| l.frame_defect())
            .fold(R::zero(), |a, b| a.max(b))
    }

    /// True when every letter is volume-neutral by structure (see
    /// [`ElementaryAut::is_volume_neutral`]); the composition then preserves
    /// volume without any determinant ever being computed.
    pub fn is_volume_neutral(&self) -> bool {
        self.letters.iter().all(|l| l.is_volume_neutral())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::letter::Frame;
    use crate::automorphism::poly::Poly;
    use crate::scalar::c64;

    fn small_word() -> AutWord<f64> {
        let mut w = AutWord::identity(2);
        w.push(ElementaryAut::Shear {
            frame: Frame::standard(2),
            dir: 1,
            func: 0,
            h: Poly::Dense {
                coeffs: vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)],
            },
        });
        w.close_stage();
        w.push(ElementaryAut::Shear {
            frame: Frame::standard(2),
            dir: 0,
            func: 1,
            h: Poly::Dense {
                coeffs: vec![c64(0.5, 0.0), c64(-1.0, 0.0)],
            },
        });
        w.close_stage();
        w
    }

    #[test]
    fn word_roundtrip_forward_then_inverse() {
        let w = small_word();
        let z = CPoint::from_f64_pairs(&[(0.3, -0.2), (1.1, 0.7)]);
        let img = w.apply(&z).unwrap();
        let back = w.apply_inverse(&img).unwrap();
        assert!(back.dist(&z) < 1e-13);
    }

    #[test]
    fn stage_prefixes_nest() {
        let w = small_word();
        let z = CPoint::from_f64_pairs(&[(1.0, 0.0), (0.0, 0.0)]);
        let p0 = w.apply_through_stage(&z, 0).unwrap();
        assert!(p0.dist(&z) == 0.0);
        let p1 = w.apply_through_stage(&z, 1).unwrap();
        // First letter: z2 += z1^2, so (1,0) -> (1,1).
        assert!(p1.dist(&CPoint::from_f64_pairs(&[(1.0, 0.0), (1.0, 0.0)])) < 1e-15);
        let p2 = w.apply_through_stage(&z, 2).unwrap();
        assert!(p2.dist(&w.apply(&z).unwrap()) == 0.0);
    }

    #[test]
    fn truncation_agrees_with_stage_prefix_application() {
        let w = small_word();
        let z = CPoint::from_f64_pairs(&[(0.7, 0.2), (-0.4, 1.0)]);
        for k in 0..=2 {
            let t = w.truncated_to_stage(k);
            assert_eq!(t.stage_count(), k);
            assert_eq!(
                t.apply(&z).unwrap().coords,
                w.apply_through_stage(&z, k).unwrap().coords,
                "stage {k} prefix"
            );
        }
        // Truncating past the end just clones the word.
        assert_eq!(w.truncated_to_stage(9).len(), w.len());
    }

    #[test]
    fn overflow_reports_the_letter() {
        let mut w: AutWord<f64> = AutWord::identity(2);
        for _ in 0..3 {
            w.push(ElementaryAut::Shear {
                frame: Frame::standard(2),
                dir: 1,
                func: 0,
                h: Poly::Dense {
                    // z2 += z1^9: iterating from a large start blows past 1e100.
                    coeffs: vec![c64(0.0, 0.0); 9]
                        .into_iter()
                        .chain([c64(1.0, 0.0)])
                        .collect(),
                },
            });
            w.push(ElementaryAut::AffineUnitary {
                // swap coordinates so the growth feeds back into z1
                q: Frame {
                    cols: vec![
                        CPoint::from_f64_pairs(&[(0.0, 0.0), (1.0, 0.0)]),
                        CPoint::from_f64_pairs(&[(1.0, 0.0), (0.0, 0.0)]),
                    ],
                },
                v: CPoint::zero(2),
            });
        }
        let z = CPoint::from_f64_pairs(&[(1e20, 0.0), (0.0, 0.0)]);
        match w.apply(&z) {
            Err(ApplyError::Overflow { letter }) => assert!(letter < 6),
            other => panic!("expected overflow, got {other:?}"),
        }
    }
}
