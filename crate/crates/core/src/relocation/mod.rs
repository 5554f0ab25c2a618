//! Moving marked points exactly while holding everything else still.
//!
//! This is the workhorse the staged construction leans on: given finitely
//! many `source → target` moves, a list of points that must not move at all,
//! and a protected compact region on which the whole word has to stay within
//! `epsilon` of the identity, produce a word of shears that does all three.
//! The exactness split is deliberate and worth stating up front:
//!
//! * **exact** — pinned points do not move, bit for bit.  Every letter's
//!   profile has each pin's functional value as a polynomial root, and the
//!   factored evaluation turns `t - root` into a hard zero;
//! * **exact to residual** — moved points land within `1e-9` of their
//!   targets (each segment lands to relative roundoff, and a carry has only
//!   a handful of segments);
//! * **approximate with a measured bound** — the deviation on the region is
//!   controlled by per-letter sup bounds that are *summed*, then verified by
//!   sampling.  The sampled figure is a lower bound for the true sup, the
//!   summed shares an upper bound; both are reported honestly.
//!
//! On top of the task runner sit the sequence-level conveniences: carrying a
//! tame sequence to the normal positions `(j, 0, …, 0)` on the first axis,
//! lifting a sequence one dimension up when it is not tame where it lives,
//! and nudging a variety off unmatched targets that happen to sit on it.

mod carry;

pub use carry::CarryPlan;
pub(crate) use carry::{carry_plan, nudge_letters};

use crate::automorphism::{sup_deviation, ApplyError, AutWord};
use crate::geometry::{CPoint, CertifiedCompact, GraphPiece, SequenceSpec, VarietyModel};
use crate::scalar::{Real, C};
use num_complex::Complex;

/// Default ambient gap a nudge establishes between a variety and the
/// unmatched targets sitting on it.
pub const NUDGE_GAP: f64 = 1e-6;

/// Everything that can go wrong while relocating points.
#[derive(Debug, thiserror::Error)]
pub enum RelocationError {
    /// No frame/waypoint combination separates the named point's moves from
    /// the protected region (or from the pins) well enough to damp.
    #[error("no admissible frame separates {point} from the protected region")]
    SeparationFailure { point: String },
    /// A task point sits closer to the region than the task's clearance.
    #[error("{what} lies {dist:.3e} from the region, below the clearance {required:.3e}")]
    ClearanceViolation {
        what: String,
        dist: f64,
        required: f64,
    },
    /// The sequence does not fit in any proper affine subspace.
    #[error("sequence does not lie in a proper affine subspace (best fit residual {residual:.3e})")]
    NotInSubspace { residual: f64 },
    #[error("the sequence is empty")]
    EmptySequence,
    /// A constructed word missed one of its own exactness obligations; this
    /// indicates a numerical breakdown, not a user error.
    #[error("{what} residual {residual:.3e} exceeds its tolerance")]
    ResidualTooLarge { what: String, residual: f64 },
    /// The sampled deviation came out above the budget the construction was
    /// supposed to enforce.
    #[error("measured deviation {measured:.3e} exceeds the budget {budget:.3e}")]
    DeviationExceeded { measured: f64, budget: f64 },
    #[error("invalid task: {reason}")]
    InvalidTask { reason: String },
    #[error(transparent)]
    Apply(#[from] ApplyError),
}

/// A batch relocation request.  All sources, targets and pins must keep
/// `clearance` from the region; sources may coincide with other moves'
/// targets (that is the swap case, resolved by parking), but each list is
/// individually duplicate-free and pins are disjoint from everything.
#[derive(Clone, Debug)]
pub struct RelocationTask<R: Real> {
    pub moves: Vec<(CPoint<R>, CPoint<R>)>,
    pub pinned: Vec<CPoint<R>>,
    pub region: CertifiedCompact<R>,
    pub epsilon: R,
    pub clearance: R,
}

/// Runs a relocation task.  `budget` is the sample density (grid points per
/// unit) used for the final deviation measurement; the construction itself
/// does not depend on it.
///
/// On success the word satisfies, and has been checked to satisfy:
/// every move lands within `1e-9`, every pin stays within `1e-9` (in fact
/// exactly), and the sampled deviation from the identity on the region is at
/// most `epsilon`.
pub fn relocate_points<R: Real>(
    task: &RelocationTask<R>,
    budget: R,
) -> Result<AutWord<R>, RelocationError> {
    validate_task(task)?;
    relocate_core(
        &task.moves,
        &task.pinned,
        &task.region,
        task.epsilon,
        task.clearance,
        budget,
    )
}

fn validate_task<R: Real>(task: &RelocationTask<R>) -> Result<(), RelocationError> {
    if !(task.epsilon > R::zero()) {
        return Err(RelocationError::InvalidTask {
            reason: format!("epsilon must be positive, got {:.3e}", task.epsilon.as_f64()),
        });
    }
    if !(task.clearance > R::zero()) {
        return Err(RelocationError::InvalidTask {
            reason: "clearance must be positive".into(),
        });
    }
    let n = task.region.dim();
    let dim_ok = |p: &CPoint<R>| p.dim() == n;
    if !task.moves.iter().all(|(a, b)| dim_ok(a) && dim_ok(b)) || !task.pinned.iter().all(dim_ok) {
        return Err(RelocationError::InvalidTask {
            reason: format!("all task points must live in C^{n}"),
        });
    }
    let dup_tol = R::of(1e-12);
    for (i, (a, _)) in task.moves.iter().enumerate() {
        for (b, _) in task.moves.iter().skip(i + 1) {
            if a.dist(b) <= dup_tol {
                return Err(RelocationError::InvalidTask {
                    reason: format!("duplicate source {a}"),
                });
            }
        }
    }
    for (i, (_, a)) in task.moves.iter().enumerate() {
        for (_, b) in task.moves.iter().skip(i + 1) {
            if a.dist(b) <= dup_tol {
                return Err(RelocationError::InvalidTask {
                    reason: format!("duplicate target {a}"),
                });
            }
        }
    }
    for (i, p) in task.pinned.iter().enumerate() {
        for q in task.pinned.iter().skip(i + 1) {
            if p.dist(q) <= dup_tol {
                return Err(RelocationError::InvalidTask {
                    reason: format!("duplicate pin {p}"),
                });
            }
        }
        for (a, b) in &task.moves {
            if p.dist(a) <= dup_tol || p.dist(b) <= dup_tol {
                return Err(RelocationError::InvalidTask {
                    reason: format!("pin {p} coincides with a move endpoint"),
                });
            }
        }
    }
    let check_clear = |p: &CPoint<R>, what: &str| -> Result<(), RelocationError> {
        let d = task.region.dist(p);
        if d < task.clearance {
            Err(RelocationError::ClearanceViolation {
                what: format!("{what} {p}"),
                dist: d.as_f64(),
                required: task.clearance.as_f64(),
            })
        } else {
            Ok(())
        }
    };
    for (a, b) in &task.moves {
        check_clear(a, "source")?;
        check_clear(b, "target")?;
    }
    for p in &task.pinned {
        check_clear(p, "pin")?;
    }
    Ok(())
}

/// What the planned task will do, in execution order.
enum Action {
    /// Move the given mover out of the way first; its own carry then starts
    /// from the parking spot.
    Park { mover: usize, spot_index: usize },
    Carry { mover: usize },
}

/// Task runner without the endpoint-clearance validation, shared with the
/// staged construction (which pins points that legitimately sit inside or
/// on the protected region — pins are exact, so no clearance is needed for
/// them there).  Public callers go through [`relocate_points`].
pub(crate) fn relocate_core<R: Real>(
    moves: &[(CPoint<R>, CPoint<R>)],
    pinned: &[CPoint<R>],
    region: &CertifiedCompact<R>,
    epsilon: R,
    clearance: R,
    verify_density: R,
) -> Result<AutWord<R>, RelocationError> {
    let n = region.dim();
    let mut word = AutWord::identity(n);

    // Drop zero moves entirely; a no-op task must produce the empty word so
    // its sampled deviation is exactly zero, not merely small.
    let live: Vec<(CPoint<R>, CPoint<R>)> = moves
        .iter()
        .filter(|(a, b)| a.dist(b) > R::of(1e-12) * (R::one() + a.norm()))
        .cloned()
        .collect();
    if live.is_empty() {
        return Ok(word);
    }

    // Process order: shrinking target norm, so outward chains vacate their
    // targets before anyone wants to land there.
    let mut order: Vec<usize> = (0..live.len()).collect();
    order.sort_by(|&i, &j| {
        live[j]
            .1
            .norm()
            .partial_cmp(&live[i].1.norm())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    // Parking pre-pass.  A mover whose current position blocks an upcoming
    // target is first carried to a spot far outside the region; sizing the
    // plan up front keeps the budget split equal across all carries, parks
    // included.
    let circ = region.circumscribed_ball(R::zero());
    let conflict_r = (R::of(0.02) * circ.radius).max(R::of(0.05)) * R::of(1.2);
    let mut occupied: Vec<CPoint<R>> = pinned.to_vec();
    for (a, b) in &live {
        occupied.push(a.clone());
        occupied.push(b.clone());
    }

    let mut pos: Vec<CPoint<R>> = live.iter().map(|(a, _)| a.clone()).collect();
    let mut spots: Vec<CPoint<R>> = Vec::new();
    let mut actions: Vec<Action> = Vec::new();
    {
        let mut remaining: Vec<usize> = order.clone();
        while let Some(&i) = remaining.first() {
            remaining.remove(0);
            let target = live[i].1.clone();
            for &j in remaining.iter() {
                if pos[j].dist(&target) < conflict_r {
                    let spot = park_spot(region, &circ.center, circ.radius, &occupied, clearance, spots.len())
                        .ok_or_else(|| RelocationError::InvalidTask {
                            reason: format!("no parking spot clears the region for mover at {}", pos[j]),
                        })?;
                    occupied.push(spot.clone());
                    spots.push(spot.clone());
                    actions.push(Action::Park {
                        mover: j,
                        spot_index: spots.len() - 1,
                    });
                    pos[j] = spot;
                }
            }
            actions.push(Action::Carry { mover: i });
            pos[i] = target;
        }
    }

    // Execution: equal budget share per carry, pins refreshed each time so
    // every not-currently-moving marked point is held exactly.
    let share = epsilon / R::of(actions.len() as f64);
    let mut pos: Vec<CPoint<R>> = live.iter().map(|(a, _)| a.clone()).collect();
    for action in &actions {
        let (mover, destination) = match action {
            Action::Park { mover, spot_index } => (*mover, spots[*spot_index].clone()),
            Action::Carry { mover } => (*mover, live[*mover].1.clone()),
        };
        let mut pins_now: Vec<CPoint<R>> = pinned.to_vec();
        for (j, p) in pos.iter().enumerate() {
            if j != mover {
                pins_now.push(p.clone());
            }
        }
        let plan = carry_plan(
            &pos[mover],
            &destination,
            &pins_now,
            region,
            share,
            clearance,
        )?;
        let landed = plan
            .waypoints
            .last()
            .cloned()
            .unwrap_or_else(|| pos[mover].clone());
        for letter in plan.letters {
            word.push(letter);
        }
        pos[mover] = landed;
    }

    // Honest post-checks: move residuals, pin residuals, sampled deviation.
    let mut worst_move = R::zero();
    for (i, (_, target)) in live.iter().enumerate() {
        worst_move = worst_move.max(pos[i].dist(target));
    }
    if worst_move > R::of(1e-9) {
        return Err(RelocationError::ResidualTooLarge {
            what: "move".into(),
            residual: worst_move.as_f64(),
        });
    }
    let mut worst_pin = R::zero();
    for p in pinned {
        let moved = word.apply(p)?;
        worst_pin = worst_pin.max(moved.dist(p));
    }
    if worst_pin > R::of(1e-9) {
        return Err(RelocationError::ResidualTooLarge {
            what: "pin".into(),
            residual: worst_pin.as_f64(),
        });
    }
    let est = sup_deviation(&word, None, region, verify_density)?;
    if est.sup > epsilon {
        return Err(RelocationError::DeviationExceeded {
            measured: est.sup.as_f64(),
            budget: epsilon.as_f64(),
        });
    }
    Ok(word)
}

/// Deterministic parking spot: far outside the region on a circle around its
/// circumscribed center, swept by a golden-ratio phase until clear of every
/// occupied point.
fn park_spot<R: Real>(
    region: &CertifiedCompact<R>,
    center: &CPoint<R>,
    circ_radius: R,
    occupied: &[CPoint<R>],
    clearance: R,
    salt: usize,
) -> Option<CPoint<R>> {
    let n = center.dim();
    let mut e1 = CPoint::zero(n);
    e1.coords[0] = Complex::new(R::one(), R::zero());
    let radius = circ_radius * R::of(2.2) + R::one() + clearance;
    for m in 0..64usize {
        let phase = R::of(2.0 * std::f64::consts::PI * 0.381_966_011_250_105)
            * R::of((salt * 7 + m + 1) as f64);
        let dir = e1.scale(Complex::new(phase.cos(), phase.sin()));
        let spot = center.add(&dir.scale_re(radius));
        let clear_of_points = occupied.iter().all(|p| p.dist(&spot) >= R::of(0.5));
        if clear_of_points && region.dist(&spot) >= clearance {
            return Some(spot);
        }
    }
    None
}

/// Builds the word carrying one point to one target while pinning `pinned`
/// exactly and staying within `epsilon_share` of the identity on the region.
/// The share is split equally over however many segments the route needs.
pub fn build_carry<R: Real>(
    source: &CPoint<R>,
    target: &CPoint<R>,
    pinned: &[CPoint<R>],
    region: &CertifiedCompact<R>,
    epsilon_share: R,
) -> Result<AutWord<R>, RelocationError> {
    let clearance = region
        .dist(source)
        .min(region.dist(target))
        .max(R::of(0.05));
    let plan = carry_plan(source, target, pinned, region, epsilon_share, clearance)?;
    Ok(plan.into_word(source.dim()))
}

/// Carries a tame sequence to the normal positions `(1,0,…), (2,0,…), …` on
/// the first coordinate axis.  The sequence must lie in a proper affine
/// subspace; otherwise no polynomial-automorphism word of this class can
/// normalize it and the fit is reported instead.
pub fn tame_normalize<R: Real>(seq: &SequenceSpec<R>) -> Result<AutWord<R>, RelocationError> {
    if seq.is_empty() {
        return Err(RelocationError::EmptySequence);
    }
    let n = seq.dim();
    affine_fit(&seq.points, n)?;

    let mut max_norm = R::zero();
    let mut moves: Vec<(CPoint<R>, CPoint<R>)> = Vec::new();
    for (j, a) in seq.points.iter().enumerate() {
        let mut t = CPoint::zero(n);
        t.coords[0] = Complex::new(R::of((j + 1) as f64), R::zero());
        max_norm = max_norm.max(a.norm()).max(t.norm());
        if a.dist(&t) > R::of(1e-12) * (R::one() + a.norm()) {
            moves.push((a.clone(), t));
        }
    }
    if moves.is_empty() {
        return Ok(AutWord::identity(n));
    }

    // A small protected ball placed far from every endpoint keeps the carries
    // honest (each needs *some* region to be damped on) without constraining
    // them: the first placement direction that clears everything wins.
    let offset = max_norm + R::of(2.5);
    let mut region_center = None;
    'search: for k in 0..n {
        for (re, im) in [(R::one(), R::zero()), (R::zero(), R::one())] {
            for sign in [R::one(), -R::one()] {
                let mut c = CPoint::zero(n);
                c.coords[k] = Complex::new(re * sign * offset, im * sign * offset);
                let ok = seq.points.iter().all(|p| p.dist(&c) >= R::of(2.0))
                    && moves.iter().all(|(_, t)| t.dist(&c) >= R::of(2.0));
                if ok {
                    region_center = Some(c);
                    break 'search;
                }
            }
        }
    }
    let center = region_center.ok_or_else(|| RelocationError::InvalidTask {
        reason: "no placement direction clears the sequence".into(),
    })?;
    let region = CertifiedCompact::from_ball(crate::geometry::Ball::new(center, R::of(0.5)));

    let word = relocate_core(&moves, &[], &region, R::of(0.25), R::one(), R::of(8.0))?;

    // The contract is on the sequence, so measure it on the sequence.
    let mut worst = R::zero();
    for (j, a) in seq.points.iter().enumerate() {
        let mut t = CPoint::zero(n);
        t.coords[0] = Complex::new(R::of((j + 1) as f64), R::zero());
        worst = worst.max(word.apply(a)?.dist(&t));
    }
    if worst > R::of(1e-9) {
        return Err(RelocationError::ResidualTooLarge {
            what: "normalization".into(),
            residual: worst.as_f64(),
        });
    }
    Ok(word)
}

/// Least-squares-free affine rank test: Gram–Schmidt over the difference
/// vectors with a relative threshold.  Success means the points lie in a
/// proper affine subspace (rank < n); failure reports the smallest
/// orthogonal residual that forced full rank.
fn affine_fit<R: Real>(points: &[CPoint<R>], n: usize) -> Result<(), RelocationError> {
    let base = &points[0];
    let scale = points.iter().map(|p| p.norm()).fold(R::one(), |a, b| a.max(b));
    let tol = R::of(1e-10) * (R::one() + scale);
    let mut basis: Vec<CPoint<R>> = Vec::new();
    let mut min_forced = R::infinity();
    for p in points.iter().skip(1) {
        let mut v = p.sub(base);
        for u in &basis {
            let c = v.inner(u);
            v = v.add_scaled(u, -c);
        }
        let r = v.norm();
        if r > tol {
            if basis.len() + 1 == n {
                // This vector would complete a full-rank set.
                min_forced = min_forced.min(r);
            } else if let Some(unit) = v.normalized() {
                basis.push(unit);
            }
        }
    }
    if min_forced.is_finite() {
        return Err(RelocationError::NotInSubspace {
            residual: min_forced.as_f64(),
        });
    }
    Ok(())
}

/// Pushes a variety off the unmatched targets that sit on it (within
/// [`NUDGE_GAP`]), holding the matched targets exactly and staying within
/// `epsilon` of the identity on the region.  No collision means the empty
/// word.
pub fn collision_nudge<R: Real>(
    variety: &VarietyModel<R>,
    targets: &[CPoint<R>],
    matched: &[CPoint<R>],
    region: &CertifiedCompact<R>,
    epsilon: R,
) -> Result<AutWord<R>, RelocationError> {
    let n = variety.ambient_dim();
    let gap = R::of(NUDGE_GAP);
    let is_matched = |b: &CPoint<R>| matched.iter().any(|m| m.dist(b) <= R::of(1e-12));
    let collisions: Vec<CPoint<R>> = targets
        .iter()
        .filter(|b| !is_matched(b) && variety.membership_defect(b) <= gap)
        .cloned()
        .collect();
    let mut word = AutWord::identity(n);
    if collisions.is_empty() {
        return Ok(word);
    }

    let mut delta_scale = R::one();
    for _attempt in 0..4 {
        let pts: Vec<(CPoint<R>, CPoint<R>)> = collisions
            .iter()
            .map(|b| (b.clone(), transverse_direction(variety, b)))
            .collect();
        let letters = nudge_letters(&pts, matched, region, epsilon, gap * delta_scale)?;
        let mut candidate = AutWord::identity(n);
        candidate.extend(letters);

        // Verify the gap on the nudged variety near each collision.
        let mut ok = true;
        for b in &collisions {
            let t = variety.param_of(b);
            let window = crate::geometry::Disc::new(t, R::one() + t.norm() * R::of(0.1));
            let piece = GraphPiece {
                model: variety.clone(),
                disc: window,
                word: candidate.clone(),
            };
            let (_, d) = piece.closest_param(b);
            if d < gap {
                ok = false;
                break;
            }
        }
        if ok {
            word = candidate;
            return Ok(word);
        }
        delta_scale = delta_scale * R::of(2.0);
    }
    Err(RelocationError::ResidualTooLarge {
        what: "nudge gap".into(),
        residual: gap.as_f64(),
    })
}

/// A unit direction transverse to the variety at (or near) `z`: for graph
/// curves in dimension ≥ 3 the last coordinate works outright; in C² the
/// complex normal of the tangent; for affine subspaces the first coordinate
/// axis not captured by the tangent basis.
fn transverse_direction<R: Real>(variety: &VarietyModel<R>, z: &CPoint<R>) -> CPoint<R> {
    let n = variety.ambient_dim();
    match variety {
        VarietyModel::AffineSubspace { basis, .. } => {
            for k in 0..n {
                let mut v = CPoint::zero(n);
                v.coords[k] = Complex::new(R::one(), R::zero());
                for u in basis {
                    let c = v.inner(u);
                    v = v.add_scaled(u, -c);
                }
                if v.norm() >= R::of(0.5) {
                    return v.normalized().expect("norm bounded below");
                }
            }
            // An affine subspace of codimension ≥ 1 always rejects some axis.
            unreachable!("proper subspace admits a transverse axis")
        }
        VarietyModel::GraphCurve { p, .. } => {
            if n >= 3 {
                let mut v = CPoint::zero(n);
                v.coords[n - 1] = Complex::new(R::one(), R::zero());
                return v;
            }
            // Tangent (1, p'(t)); complex normal (-conj(p'(t)), 1)/|·|.
            let t = z.coords[0];
            let dp = derivative_at(p, t);
            let mut v = CPoint::zero(n);
            v.coords[0] = -dp.conj();
            v.coords[1] = Complex::new(R::one(), R::zero());
            v.normalized().expect("tangent normal is nonzero")
        }
    }
}

fn derivative_at<R: Real>(p: &crate::automorphism::Poly<R>, t: C<R>) -> C<R> {
    let coeffs = p.coefficients();
    let mut acc = Complex::new(R::zero(), R::zero());
    let mut pw = Complex::new(R::one(), R::zero());
    for (k, c) in coeffs.iter().enumerate().skip(1) {
        acc = acc + *c * Complex::new(R::of(k as f64), R::zero()) * pw;
        pw = pw * t;
    }
    acc
}

/// Lifts a sequence one dimension up (appending a zero coordinate) and
/// normalizes it there.  In the larger space every finite sequence fits in
/// the hyperplane it was lifted into, so this always succeeds on nonempty
/// duplicate-free input.
pub fn lift_sequence<R: Real>(
    seq: &SequenceSpec<R>,
) -> Result<(SequenceSpec<R>, AutWord<R>), RelocationError> {
    if seq.is_empty() {
        return Err(RelocationError::EmptySequence);
    }
    let lifted = seq.lift();
    let word = tame_normalize(&lifted)?;
    Ok((lifted, word))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::ElementaryAut;
    use crate::geometry::Ball;
    use crate::scalar::c64;

    fn pt(coords: &[(f64, f64)]) -> CPoint<f64> {
        CPoint::from_f64_pairs(coords)
    }

    fn ball_region(r: f64) -> CertifiedCompact<f64> {
        CertifiedCompact::from_ball(Ball::centered(2, r))
    }

    #[test]
    fn empty_task_gives_empty_word_with_zero_deviation() {
        let task = RelocationTask {
            moves: vec![],
            pinned: vec![pt(&[(5.0, 0.0), (0.0, 0.0)])],
            region: ball_region(2.0),
            epsilon: 0.1,
            clearance: 1.0,
        };
        let word = relocate_points(&task, 6.0).unwrap();
        assert!(word.is_empty());
        let est = sup_deviation(&word, None, &task.region, 6.0).unwrap();
        assert_eq!(est.sup, 0.0);
    }

    #[test]
    fn single_move_with_two_pins() {
        let source = pt(&[(3.0, 0.0), (0.0, 0.0)]);
        let target = pt(&[(3.0, 0.0), (2.0, 0.0)]);
        let pins = vec![pt(&[(5.0, 0.0), (0.0, 0.0)]), pt(&[(6.0, 0.0), (0.0, 0.0)])];
        let task = RelocationTask {
            moves: vec![(source.clone(), target.clone())],
            pinned: pins.clone(),
            region: ball_region(1.0),
            epsilon: 0.01,
            clearance: 1.0,
        };
        let word = relocate_points(&task, 8.0).unwrap();
        let landed = word.apply(&source).unwrap();
        assert!(landed.dist(&target) <= 1e-9);
        for p in &pins {
            let held = word.apply(p).unwrap();
            assert_eq!(held.coords, p.coords, "pin moved");
        }
        let est = sup_deviation(&word, None, &task.region, 8.0).unwrap();
        assert!(est.sup <= 0.01);
    }

    #[test]
    fn every_letter_annihilates_every_pin_projection() {
        let task = RelocationTask {
            moves: vec![(
                pt(&[(3.0, 0.0), (0.0, 0.0)]),
                pt(&[(3.0, 0.0), (2.0, 0.0)]),
            )],
            pinned: vec![pt(&[(5.0, 0.0), (0.0, 0.0)]), pt(&[(6.0, 0.0), (0.0, 0.0)])],
            region: ball_region(1.0),
            epsilon: 0.01,
            clearance: 1.0,
        };
        let word = relocate_points(&task, 6.0).unwrap();
        for letter in word.letters() {
            if let ElementaryAut::Shear { h, .. } = letter {
                for p in &task.pinned {
                    let t = letter.functional_value(p).unwrap();
                    assert!(h.eval(t).norm() <= 1e-13);
                }
            }
        }
    }

    #[test]
    fn swap_is_resolved_by_parking() {
        let a = pt(&[(3.0, 0.0), (0.0, 0.0)]);
        let b = pt(&[(4.0, 0.0), (0.0, 0.0)]);
        let task = RelocationTask {
            moves: vec![(a.clone(), b.clone()), (b.clone(), a.clone())],
            pinned: vec![],
            region: ball_region(1.0),
            epsilon: 0.1,
            clearance: 1.0,
        };
        let word = relocate_points(&task, 8.0).unwrap();
        assert!(word.apply(&a).unwrap().dist(&b) <= 1e-9);
        assert!(word.apply(&b).unwrap().dist(&a) <= 1e-9);
        let est = sup_deviation(&word, None, &task.region, 8.0).unwrap();
        assert!(est.sup <= 0.1);
        // A swap cannot be two plain segments: the parking detour shows up
        // in the letter count.
        assert!(word.len() >= 3, "swap solved in {} letters", word.len());
    }

    #[test]
    fn clearance_violation_is_reported() {
        let task = RelocationTask {
            moves: vec![(
                pt(&[(1.2, 0.0), (0.0, 0.0)]),
                pt(&[(3.0, 0.0), (0.0, 0.0)]),
            )],
            pinned: vec![],
            region: ball_region(1.0),
            epsilon: 0.1,
            clearance: 1.0,
        };
        match relocate_points(&task, 6.0) {
            Err(RelocationError::ClearanceViolation { dist, required, .. }) => {
                assert!(dist < required);
            }
            other => panic!("expected ClearanceViolation, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_sources_are_rejected() {
        let a = pt(&[(3.0, 0.0), (0.0, 0.0)]);
        let task = RelocationTask {
            moves: vec![
                (a.clone(), pt(&[(4.0, 0.0), (0.0, 0.0)])),
                (a.clone(), pt(&[(5.0, 0.0), (0.0, 0.0)])),
            ],
            pinned: vec![],
            region: ball_region(1.0),
            epsilon: 0.1,
            clearance: 1.0,
        };
        assert!(matches!(
            relocate_points(&task, 6.0),
            Err(RelocationError::InvalidTask { .. })
        ));
    }

    #[test]
    fn build_carry_with_identical_endpoints_is_empty() {
        let p = pt(&[(3.0, 0.0), (1.0, 0.0)]);
        let word = build_carry(&p, &p, &[], &ball_region(1.0), 0.1).unwrap();
        assert!(word.is_empty());
    }

    #[test]
    fn tame_normalization_of_a_shifted_row() {
        // Five points on the line {z2 = 1}: a proper affine subspace of C².
        let points: Vec<CPoint<f64>> =
            (1..=5).map(|j| pt(&[(j as f64, 0.0), (1.0, 0.0)])).collect();
        let seq = SequenceSpec::new(points.clone());
        let word = tame_normalize(&seq).unwrap();
        for (j, a) in points.iter().enumerate() {
            let normal = pt(&[((j + 1) as f64, 0.0), (0.0, 0.0)]);
            assert!(
                word.apply(a).unwrap().dist(&normal) <= 1e-9,
                "point {j} missed its normal position"
            );
        }
    }

    #[test]
    fn already_normal_sequence_needs_no_letters() {
        let points: Vec<CPoint<f64>> =
            (1..=4).map(|j| pt(&[(j as f64, 0.0), (0.0, 0.0)])).collect();
        let word = tame_normalize(&SequenceSpec::new(points)).unwrap();
        assert!(word.is_empty());
    }

    #[test]
    fn full_rank_sequence_is_not_in_a_subspace() {
        let points = vec![
            pt(&[(1.0, 0.0), (0.1, 0.0)]),
            pt(&[(2.0, 0.0), (0.2, 0.0)]),
            pt(&[(3.0, 0.0), (5.0, 0.0)]),
        ];
        match tame_normalize(&SequenceSpec::new(points)) {
            Err(RelocationError::NotInSubspace { residual }) => assert!(residual > 1e-10),
            other => panic!("expected NotInSubspace, got {other:?}"),
        }
    }

    #[test]
    fn empty_sequence_is_an_error() {
        let seq: SequenceSpec<f64> = SequenceSpec::new(vec![]);
        assert!(matches!(
            tame_normalize(&seq),
            Err(RelocationError::EmptySequence)
        ));
        assert!(matches!(
            lift_sequence(&seq),
            Err(RelocationError::EmptySequence)
        ));
    }

    #[test]
    fn lift_normalizes_in_the_larger_space() {
        // A full-rank pair in C¹ (any two distinct points) lifts to C² where
        // the hyperplane {z2 = 0} holds both.
        let seq = SequenceSpec::new(vec![
            CPoint::new(vec![c64(1.0, 1.0)]),
            CPoint::new(vec![c64(-2.0, 0.5)]),
        ]);
        let (lifted, word) = lift_sequence(&seq).unwrap();
        assert_eq!(lifted.dim(), 2);
        for (j, a) in lifted.points.iter().enumerate() {
            let normal = pt(&[((j + 1) as f64, 0.0), (0.0, 0.0)]);
            assert!(word.apply(a).unwrap().dist(&normal) <= 1e-9);
        }
    }

    #[test]
    fn nudge_clears_an_on_variety_target() {
        let x: VarietyModel<f64> = VarietyModel::coordinate_axis(2);
        let collision = pt(&[(7.0, 0.0), (0.0, 0.0)]);
        let matched = vec![pt(&[(2.0, 0.0), (0.0, 0.0)])];
        let region = ball_region(1.0);
        let word = collision_nudge(&x, &[collision.clone()], &matched, &region, 0.01).unwrap();
        assert!(!word.is_empty());
        // The axis now passes at least the gap away from the target...
        let piece = GraphPiece {
            model: x.clone(),
            disc: crate::geometry::Disc::new(c64(7.0, 0.0), 2.0),
            word: word.clone(),
        };
        let (_, d) = piece.closest_param(&collision);
        assert!(d >= NUDGE_GAP, "gap {d} too small");
        // ...while the matched point did not move at all.
        let held = word.apply(&matched[0]).unwrap();
        assert_eq!(held.coords, matched[0].coords);
        let est = sup_deviation(&word, None, &region, 8.0).unwrap();
        assert!(est.sup <= 0.01);
    }

    #[test]
    fn no_collision_means_no_letters() {
        let x: VarietyModel<f64> = VarietyModel::coordinate_axis(2);
        let word = collision_nudge(
            &x,
            &[pt(&[(7.0, 0.0), (1.0, 0.0)])],
            &[],
            &ball_region(1.0),
            0.01,
        )
        .unwrap();
        assert!(word.is_empty());
    }

    #[test]
    fn relocation_words_are_volume_neutral() {
        let task = RelocationTask {
            moves: vec![(
                pt(&[(3.0, 0.0), (0.0, 0.0)]),
                pt(&[(2.0, 0.0), (2.5, 0.0)]),
            )],
            pinned: vec![pt(&[(5.0, 0.0), (0.0, 0.0)])],
            region: ball_region(1.0),
            epsilon: 0.05,
            clearance: 1.0,
        };
        let word = relocate_points(&task, 6.0).unwrap();
        assert!(word.is_volume_neutral());
        assert!(word.worst_frame_defect() <= 1e-12);
    }
}
