//! Finite truncations of discrete sequences, and the discreteness check every
//! entry point runs before doing anything else.

use super::point::CPoint;
use super::GeometryError;
use crate::scalar::Real;

/// Two points closer than this are treated as the same point.
pub const DUPLICATE_TOL: f64 = 1e-12;

/// A finite truncation `a_1, ..., a_J` of a discrete sequence.
#[derive(Clone, Debug)]
pub struct SequenceSpec<R: Real> {
    pub points: Vec<CPoint<R>>,
}

impl<R: Real> SequenceSpec<R> {
    pub fn new(points: Vec<CPoint<R>>) -> Self {
        SequenceSpec { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map(|p| p.dim()).unwrap_or(0)
    }

    /// Appends a zero coordinate to every point (C^N into C^(N+1)), the
    /// standard dodge when the ambient dimension is too small for shears to
    /// have room to work.
    pub fn lift(&self) -> SequenceSpec<R> {
        SequenceSpec {
            points: self
                .points
                .iter()
                .map(|p| {
                    let mut coords = p.coords.clone();
                    coords.push(crate::scalar::czero());
                    CPoint::new(coords)
                })
                .collect(),
        }
    }
}

/// Outcome of the pairwise separation scan.
#[derive(Clone, Debug)]
pub struct DiscretenessReport {
    pub count: usize,
    pub min_separation: f64,
    /// Indices realizing the minimum (0-based).
    pub closest_pair: (usize, usize),
}

/// Scans all pairs, reporting the minimal separation. Fails with
/// `DuplicatePoint` when two entries coincide within 1e-12, and with
/// `SeparationBelowFloor` when the minimum falls under the caller's floor
/// (pass `0.0` to disable the floor).
pub fn check_discrete<R: Real>(
    seq: &SequenceSpec<R>,
    floor: R,
) -> Result<DiscretenessReport, GeometryError> {
    assert!(!seq.is_empty(), "discreteness check on an empty sequence");
    let n = seq.len();
    if n == 1 {
        return Ok(DiscretenessReport {
            count: 1,
            min_separation: f64::INFINITY,
            closest_pair: (0, 0),
        });
    }
    let mut min = R::infinity();
    let mut pair = (0usize, 1usize);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = seq.points[i].dist(&seq.points[j]);
            if d < min {
                min = d;
                pair = (i, j);
            }
        }
    }
    if min < R::of(DUPLICATE_TOL) {
        return Err(GeometryError::DuplicatePoint {
            i: pair.0,
            j: pair.1,
            dist: min.as_f64(),
        });
    }
    if min < floor {
        return Err(GeometryError::SeparationBelowFloor {
            i: pair.0,
            j: pair.1,
            found: min.as_f64(),
            floor: floor.as_f64(),
        });
    }
    Ok(DiscretenessReport {
        count: n,
        min_separation: min.as_f64(),
        closest_pair: pair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(points: &[(f64, f64)]) -> SequenceSpec<f64> {
        SequenceSpec::new(
            points
                .iter()
                .map(|&(a, b)| CPoint::from_f64_pairs(&[(a, 0.0), (b, 0.0)]))
                .collect(),
        )
    }

    #[test]
    fn reports_the_closest_pair() {
        let s = seq(&[(0.0, 0.0), (5.0, 0.0), (5.25, 0.0)]);
        let rep = check_discrete(&s, 0.0).unwrap();
        assert_eq!(rep.closest_pair, (1, 2));
        assert!((rep.min_separation - 0.25).abs() < 1e-14);
    }

    #[test]
    fn duplicate_detection() {
        let s = seq(&[(1.0, 2.0), (1.0, 2.0 + 1e-14)]);
        match check_discrete(&s, 0.0) {
            Err(GeometryError::DuplicatePoint { i: 0, j: 1, .. }) => {}
            other => panic!("expected DuplicatePoint, got {other:?}"),
        }
    }

    #[test]
    fn floor_violation() {
        let s = seq(&[(0.0, 0.0), (0.1, 0.0)]);
        match check_discrete(&s, 0.5) {
            Err(GeometryError::SeparationBelowFloor { found, floor, .. }) => {
                assert!((found - 0.1).abs() < 1e-14);
                assert!((floor - 0.5).abs() < 1e-14);
            }
            other => panic!("expected SeparationBelowFloor, got {other:?}"),
        }
    }

    #[test]
    fn lift_appends_zero_coordinate() {
        let s = seq(&[(1.0, 2.0)]);
        let l = s.lift();
        assert_eq!(l.dim(), 3);
        assert_eq!(l.points[0].coords[2], crate::scalar::czero());
    }
}
