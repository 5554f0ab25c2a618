//! One-point carry moves: short chains of damped, pinned shears.
//!
//! A carry takes one marked point from `source` to `target` through a small
//! number of straight segments.  Each segment becomes a single shear letter
//! `z ↦ z + u_d · h(⟨z, u_c⟩)` whose polynomial is chosen so that three
//! things hold at once:
//!
//! * the marked point lands exactly on the segment endpoint — `h` attains
//!   the prescribed displacement at the segment's own projection value,
//! * every pinned point is a root of `h`, so pins do not move at all, not
//!   even by a rounding error: the factored representation subtracts the
//!   pin's projection from itself and produces an exact IEEE zero,
//! * on the projection of the protected region the polynomial is damped
//!   below the segment's share of the deviation budget, with a closed-form
//!   degree bound rather than a numeric approximation step.
//!
//! The functional `u_c` is built from `u_d` by swapping two coordinates
//! with a conjugate flip (the complex normal in that coordinate plane).
//! This keeps `⟨u_d, u_c⟩` at roundoff level, which is what makes the
//! shear's additive inverse reliable, and it degrades gracefully: when the
//! displacement is axis-parallel the swap reproduces the standard frame
//! exactly, with no special-casing.

use crate::automorphism::poly;
use crate::automorphism::{AutWord, ElementaryAut, Frame};
use crate::geometry::{CPoint, CertifiedCompact, Disc};
use crate::scalar::{Real, C};

use super::RelocationError;

/// Minimum ratio of anchor-to-disc-center distance over disc radius.  Below
/// this the damping degree formula degenerates (the anchor sits too close to
/// the projected region and no polynomial can be simultaneously small on the
/// disc and of unit size at the anchor without an extreme degree).
pub(crate) const RHO_MIN: f64 = 1.25;

/// Hard cap on the damping degree; candidates needing more are rejected so
/// the sweep can try a different functional or waypoint instead.
const DEGREE_CAP: u32 = 500;

/// Displacements below this (relative to the point scale) are treated as
/// zero moves and produce no letters.
const ZERO_MOVE_TOL: f64 = 1e-12;

/// Number of deterministic probe directions used by the waypoint search.
const PROBE_DIRS: usize = 48;

/// A planned carry: the polyline the marked point travels, including both
/// endpoints, and the shear letter realizing each segment.
#[derive(Clone, Debug)]
pub struct CarryPlan<R: Real> {
    /// `[source, w_1, …, target]`; one more entry than `letters`.
    pub waypoints: Vec<CPoint<R>>,
    /// One shear per segment, in travel order.
    pub letters: Vec<ElementaryAut<R>>,
}

impl<R: Real> CarryPlan<R> {
    pub fn into_word(self, dim: usize) -> AutWord<R> {
        let mut word = AutWord::identity(dim);
        for letter in self.letters {
            word.push(letter);
        }
        word
    }
}

/// The per-segment functional data selected by the sweep.
struct SegmentChoice<R: Real> {
    u_d: CPoint<R>,
    u_c: CPoint<R>,
    /// Projection of the segment start (and, up to roundoff, the whole
    /// segment) under ⟨·, u_c⟩.
    anchor: C<R>,
    /// Projection of the protected region.
    disc: Disc<R>,
    /// Deduplicated pinned-point projections.
    roots: Vec<C<R>>,
}

/// Two-coordinate swap functional: unit vector supported on coordinates
/// `(i, j)` with `u_c[i] = −conj(dir[j])`, `u_c[j] = conj(dir[i])`, then
/// normalized and sign-canonicalized (real sign only, so the orthogonality
/// defect stays at the roundoff floor).
fn swap_functional<R: Real>(dir: &CPoint<R>, i: usize, j: usize) -> Option<CPoint<R>> {
    let n = dir.dim();
    let mut coords = vec![C::<R>::new(R::zero(), R::zero()); n];
    coords[i] = -dir.coords[j].conj();
    coords[j] = dir.coords[i].conj();
    let cand = CPoint::new(coords);
    let mut unit = cand.normalized()?;
    // Canonical sign: make the dominant coordinate's leading part positive.
    let mut best = 0usize;
    let mut best_mag = R::zero();
    for (k, c) in unit.coords.iter().enumerate() {
        if c.norm_sqr() > best_mag {
            best_mag = c.norm_sqr();
            best = k;
        }
    }
    let lead = unit.coords[best];
    let flip = if lead.re < -R::of(1e-12) {
        true
    } else if lead.re.abs() <= R::of(1e-12) {
        lead.im < R::zero()
    } else {
        false
    };
    if flip {
        for c in unit.coords.iter_mut() {
            *c = -*c;
        }
    }
    Some(unit)
}

/// All coordinate pairs ordered by how much of `dir`'s mass they carry;
/// pairs carrying less than 5% are dropped as badly conditioned.
fn candidate_pairs<R: Real>(dir: &CPoint<R>) -> Vec<(usize, usize)> {
    let n = dir.dim();
    let mut pairs: Vec<(R, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mass = dir.coords[i].norm_sqr() + dir.coords[j].norm_sqr();
            if mass >= R::of(0.05) {
                pairs.push((mass, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    pairs.into_iter().map(|(_, i, j)| (i, j)).collect()
}

fn dedupe_roots<R: Real>(mut roots: Vec<C<R>>, tol: R) -> Vec<C<R>> {
    let mut out: Vec<C<R>> = Vec::with_capacity(roots.len());
    roots.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for r in roots {
        if out.iter().all(|o| (*o - r).norm() > tol) {
            out.push(r);
        }
    }
    out
}

/// Pick the best feasible functional for a straight segment from `from`
/// toward `from + u_d·δ`.  Feasibility: the anchor clears the projected
/// region by the ratio `RHO_MIN` and every pin projection keeps a gap from
/// the anchor.  Among feasible candidates the spec-style score
/// `|anchor − c₀| − R` decides, ties broken by coordinate-pair mass order.
fn choose_functional<R: Real>(
    from: &CPoint<R>,
    u_d: &CPoint<R>,
    pins: &[CPoint<R>],
    region: &CertifiedCompact<R>,
) -> Option<SegmentChoice<R>> {
    let mut best: Option<(R, SegmentChoice<R>)> = None;
    for (i, j) in candidate_pairs(u_d) {
        let u_c = match swap_functional(u_d, i, j) {
            Some(u) => u,
            None => continue,
        };
        let disc = region.projection_disc(&u_c);
        let anchor = from.inner(&u_c);
        let sep = (anchor - disc.center).norm();
        if sep < R::of(RHO_MIN) * disc.radius {
            continue;
        }
        let gap_floor = (R::of(0.02) * disc.radius).max(R::of(0.05));
        let roots = dedupe_roots(
            pins.iter().map(|p| p.inner(&u_c)).collect(),
            R::of(1e-9) * (R::one() + disc.radius),
        );
        if roots.iter().any(|w| (anchor - *w).norm() < gap_floor) {
            continue;
        }
        let score = sep - disc.radius;
        if best.as_ref().map_or(true, |(s, _)| score > *s) {
            best = Some((
                score,
                SegmentChoice {
                    u_d: u_d.clone(),
                    u_c,
                    anchor,
                    disc,
                    roots,
                },
            ));
        }
    }
    best.map(|(_, c)| c)
}

/// Smallest damping degree `d ≥ 0` with `g · ρ^{−d} ≤ 1`, verified upward a
/// couple of steps to absorb the logarithm's rounding.  `None` when the cap
/// is exceeded.
fn damping_degree<R: Real>(g: R, rho: R) -> Option<u32> {
    if g <= R::one() {
        return Some(0);
    }
    if rho <= R::one() {
        return None;
    }
    let raw = (g.ln() / rho.ln()).ceil().as_f64();
    if !raw.is_finite() || raw < 0.0 || raw > f64::from(DEGREE_CAP + 2) {
        return None;
    }
    let mut d = raw as u32;
    // Explicit recheck of g·ρ^{−d} ≤ 1 with at most a couple of bumps.
    while g * rho.powi(-(d as i32)) > R::one() {
        d += 1;
        if d > DEGREE_CAP + 2 {
            return None;
        }
    }
    if d > DEGREE_CAP {
        None
    } else {
        Some(d)
    }
}

/// Build the single shear letter for a segment, or `None` when no degree
/// within the cap meets the share.  On success also returns the computed
/// image of `from`, which the caller uses as the next segment's start.
fn segment_letter<R: Real>(
    from: &CPoint<R>,
    to: &CPoint<R>,
    pins: &[CPoint<R>],
    region: &CertifiedCompact<R>,
    share: R,
) -> Option<(ElementaryAut<R>, CPoint<R>)> {
    let displacement = to.sub(from);
    let delta = displacement.norm();
    let u_d = displacement.normalized()?;
    let choice = choose_functional(from, &u_d, pins, region)?;

    let c0 = choice.disc.center;
    let radius = choice.disc.radius;
    let anchor = choice.anchor;
    let rho = (anchor - c0).norm() / radius;

    // Sup bound of the undamped pin product on the disc, relative to its
    // value at the anchor, times the displacement.
    let mut g = delta;
    for w in &choice.roots {
        g = g * (radius + (c0 - *w).norm()) / (anchor - *w).norm();
    }
    let d = damping_degree(g / share, rho)?;

    // scale = δ / (Π(a − w_q) · (a − c₀)^d) so that h(anchor) = δ.
    let mut denom = C::<R>::new(R::one(), R::zero());
    for w in &choice.roots {
        denom = denom * (anchor - *w);
    }
    denom = denom * (anchor - c0).powu(d);
    let scale = C::<R>::new(delta, R::zero()) / denom;
    let h = poly::factored(scale, choice.roots.clone(), c0, d);

    // Double-check the share with the polynomial's own sup bound; the degree
    // formula above is exact for this factored shape, so a failure here
    // indicates a numerics problem and the candidate is simply rejected.
    if h.sup_bound_on_disc(c0, radius) > share * R::of(1.0 + 1e-9) {
        return None;
    }

    let n = from.dim();
    let dir_idx = dominant_coord(&choice.u_d);
    let mut func_idx = dominant_coord(&choice.u_c);
    if func_idx == dir_idx {
        func_idx = (dir_idx + 1) % n;
    }
    let frame = Frame::complete(n, &[(dir_idx, choice.u_d), (func_idx, choice.u_c)]);
    let letter = ElementaryAut::Shear {
        frame,
        dir: dir_idx,
        func: func_idx,
        h,
    };
    let image = letter.apply(from);
    Some((letter, image))
}

fn dominant_coord<R: Real>(v: &CPoint<R>) -> usize {
    let mut best = 0usize;
    let mut mag = R::zero();
    for (k, c) in v.coords.iter().enumerate() {
        if c.norm_sqr() > mag {
            mag = c.norm_sqr();
            best = k;
        }
    }
    best
}

/// Deterministic probe directions for the waypoint search: a fixed-seed
/// stream of complex Gaussian vectors, normalized.  The same set is produced
/// on every call, so routes are reproducible.
fn probe_directions<R: Real>(dim: usize) -> Vec<CPoint<R>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5ca1_ab1e_0f0e_0d0c);
    let mut dirs = Vec::with_capacity(PROBE_DIRS);
    while dirs.len() < PROBE_DIRS {
        let mut coords = Vec::with_capacity(dim);
        for _ in 0..dim {
            // Box–Muller from two uniforms; cheap and fully deterministic.
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            let r = (-2.0 * u1.ln()).sqrt();
            let re = r * (2.0 * std::f64::consts::PI * u2).cos();
            let im = r * (2.0 * std::f64::consts::PI * u2).sin();
            coords.push(C::<R>::new(R::of(re), R::of(im)));
        }
        if let Some(unit) = CPoint::new(coords).normalized() {
            dirs.push(unit);
        }
    }
    dirs
}

/// Route search: direct segment when feasible, otherwise one or two
/// intermediate waypoints placed outside an inflated circumscribed ball of
/// the region, swept over a deterministic direction set.  Returns the
/// waypoint list excluding the source, including the target.
fn plan_route<R: Real>(
    source: &CPoint<R>,
    target: &CPoint<R>,
    pins: &[CPoint<R>],
    region: &CertifiedCompact<R>,
    clearance: R,
) -> Option<Vec<CPoint<R>>> {
    let feasible = |a: &CPoint<R>, b: &CPoint<R>| -> bool {
        let disp = b.sub(a);
        if disp.norm() <= R::of(ZERO_MOVE_TOL) {
            return true;
        }
        let u_d = match disp.normalized() {
            Some(u) => u,
            None => return true,
        };
        choose_functional(a, &u_d, pins, region).is_some()
    };

    if feasible(source, target) {
        return Some(vec![target.clone()]);
    }

    let circ = region.circumscribed_ball(clearance.max(R::of(0.5)));
    let route_r = circ.radius * R::of(1.5) + R::one() + clearance;
    let dirs = probe_directions::<R>(source.dim());
    let radii = [R::of(1.0), R::of(1.3), R::of(1.75)];

    let min_clear = clearance * R::of(0.5);
    let waypoint_ok = |w: &CPoint<R>| -> bool {
        region.dist(w) >= min_clear && pins.iter().all(|p| p.dist(w) >= R::of(0.1))
    };

    let mut candidates: Vec<CPoint<R>> = Vec::new();
    for mult in radii {
        for dir in &dirs {
            let w = circ.center.add(&dir.scale_re(route_r * mult));
            if waypoint_ok(&w) {
                candidates.push(w);
            }
        }
    }

    // One intermediate stop.
    let mut best: Option<(R, Vec<CPoint<R>>)> = None;
    for w in &candidates {
        if feasible(source, w) && feasible(w, target) {
            let len = source.dist(w) + w.dist(target);
            if best.as_ref().map_or(true, |(l, _)| len < *l) {
                best = Some((len, vec![w.clone(), target.clone()]));
            }
        }
    }
    if let Some((_, route)) = best {
        return Some(route);
    }

    // Two intermediate stops.  The candidate set is small enough that the
    // quadratic sweep stays cheap, and it only runs when one stop failed.
    let mut best: Option<(R, Vec<CPoint<R>>)> = None;
    for w1 in &candidates {
        if !feasible(source, w1) {
            continue;
        }
        for w2 in &candidates {
            if feasible(w1, w2) && feasible(w2, target) {
                let len = source.dist(w1) + w1.dist(w2) + w2.dist(target);
                if best.as_ref().map_or(true, |(l, _)| len < *l) {
                    best = Some((len, vec![w1.clone(), w2.clone(), target.clone()]));
                }
            }
        }
    }
    best.map(|(_, route)| route)
}

/// Plan and materialize one carry.  `epsilon_share` is the whole carry's
/// deviation allowance on the region; it is split equally across segments.
pub(crate) fn carry_plan<R: Real>(
    source: &CPoint<R>,
    target: &CPoint<R>,
    pins: &[CPoint<R>],
    region: &CertifiedCompact<R>,
    epsilon_share: R,
    clearance: R,
) -> Result<CarryPlan<R>, RelocationError> {
    if source.dist(target) <= R::of(ZERO_MOVE_TOL) * (R::one() + source.norm()) {
        return Ok(CarryPlan {
            waypoints: vec![source.clone()],
            letters: Vec::new(),
        });
    }
    let route = plan_route(source, target, pins, region, clearance).ok_or_else(|| {
        RelocationError::SeparationFailure {
            point: format!("{source}"),
        }
    })?;
    let share = epsilon_share / R::of(route.len() as f64);
    let mut letters = Vec::with_capacity(route.len());
    let mut waypoints = Vec::with_capacity(route.len() + 1);
    let mut current = source.clone();
    waypoints.push(current.clone());
    for stop in &route {
        if current.dist(stop) <= R::of(ZERO_MOVE_TOL) {
            continue;
        }
        let (letter, next) =
            segment_letter(&current, stop, pins, region, share).ok_or_else(|| {
                RelocationError::SeparationFailure {
                    point: format!("{current}"),
                }
            })?;
        letters.push(letter);
        current = next;
        waypoints.push(current.clone());
    }
    let landing = current.dist(target);
    if landing > R::of(1e-10) * (R::one() + target.norm()) {
        return Err(RelocationError::ResidualTooLarge {
            what: "carry landing".into(),
            residual: landing.as_f64(),
        });
    }
    Ok(CarryPlan { waypoints, letters })
}

/// Nudge letters: one gently damped shear per collision point, pushing the
/// variety sideways at that point while vanishing at every pin.  `points`
/// pairs each collision location (in current coordinates) with a unit
/// direction transverse to the variety there.
pub(crate) fn nudge_letters<R: Real>(
    points: &[(CPoint<R>, CPoint<R>)],
    pins: &[CPoint<R>],
    region: &CertifiedCompact<R>,
    epsilon: R,
    gap: R,
) -> Result<Vec<ElementaryAut<R>>, RelocationError> {
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let share = epsilon / R::of(points.len() as f64);
    let mut letters = Vec::with_capacity(points.len());
    for (at, dir) in points {
        let delta = (gap * R::of(2.0)).max(R::of(1e-7));
        let to = at.add(&dir.scale_re(delta));
        let (letter, _) = segment_letter(at, &to, pins, region, share).ok_or_else(|| {
            RelocationError::SeparationFailure {
                point: format!("{at}"),
            }
        })?;
        letters.push(letter);
    }
    Ok(letters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Ball;
    use crate::scalar::c64;

    fn pt(coords: &[(f64, f64)]) -> CPoint<f64> {
        CPoint::from_f64_pairs(coords)
    }

    fn unit_ball() -> CertifiedCompact<f64> {
        CertifiedCompact::from_ball(Ball::centered(2, 1.0))
    }

    #[test]
    fn swap_functional_is_orthogonal_and_unit() {
        let d = pt(&[(0.6, 0.2), (0.3, -0.7)]).normalized().unwrap();
        let u = swap_functional(&d, 0, 1).unwrap();
        assert!((u.norm() - 1.0).abs() < 1e-14);
        assert!(d.inner(&u).norm() < 1e-15);
    }

    #[test]
    fn axis_displacement_reproduces_the_standard_frame() {
        // Moving along the second axis: the swap functional is the first
        // axis with positive sign, exactly.
        let d = pt(&[(0.0, 0.0), (1.0, 0.0)]);
        let u = swap_functional(&d, 0, 1).unwrap();
        assert_eq!(u.coords[0], c64(1.0, 0.0));
        assert_eq!(u.coords[1], c64(0.0, 0.0));
    }

    #[test]
    fn single_segment_matches_the_worked_example() {
        // (3,0) → (3,1), region the unit ball, share 0.1: the damping degree
        // must come out as exactly 3 with the cubic h(ζ) = (ζ/3)³.
        let plan = carry_plan(
            &pt(&[(3.0, 0.0), (0.0, 0.0)]),
            &pt(&[(3.0, 0.0), (1.0, 0.0)]),
            &[],
            &unit_ball(),
            0.1,
            1.0,
        )
        .unwrap();
        assert_eq!(plan.letters.len(), 1);
        match &plan.letters[0] {
            ElementaryAut::Shear { dir, func, h, .. } => {
                assert_eq!(*dir, 1);
                assert_eq!(*func, 0);
                assert_eq!(h.degree(), 3);
                // h(3) = 1 up to roundoff, h(0) damped under the share.
                assert!((h.eval(c64(3.0, 0.0)) - c64(1.0, 0.0)).norm() < 1e-14);
                assert!(h.eval(c64(1.0, 0.0)).norm() <= 0.1);
            }
            other => panic!("expected a shear, got {other:?}"),
        }
        let image = plan.letters[0].apply(&pt(&[(3.0, 0.0), (0.0, 0.0)]));
        assert!(image.dist(&pt(&[(3.0, 0.0), (1.0, 0.0)])) < 1e-14);
    }

    #[test]
    fn pinned_projection_becomes_an_exact_root() {
        let pin = pt(&[(5.0, 0.0), (0.0, 0.0)]);
        let plan = carry_plan(
            &pt(&[(3.0, 0.0), (0.0, 0.0)]),
            &pt(&[(3.0, 0.0), (1.0, 0.0)]),
            std::slice::from_ref(&pin),
            &unit_ball(),
            0.1,
            1.0,
        )
        .unwrap();
        assert_eq!(plan.letters.len(), 1);
        let letter = &plan.letters[0];
        match letter {
            ElementaryAut::Shear { h, .. } => {
                assert_eq!(h.eval(c64(5.0, 0.0)).norm(), 0.0);
            }
            other => panic!("expected a shear, got {other:?}"),
        }
        // The pin does not move at all — bit-for-bit.
        let moved = letter.apply(&pin);
        assert_eq!(moved.coords[0], pin.coords[0]);
        assert_eq!(moved.coords[1], pin.coords[1]);
    }

    #[test]
    fn zero_move_produces_no_letters() {
        let p = pt(&[(3.0, 0.0), (0.0, 0.0)]);
        let plan = carry_plan(&p, &p, &[], &unit_ball(), 0.1, 1.0).unwrap();
        assert!(plan.letters.is_empty());
    }

    #[test]
    fn degree_formula_examples() {
        // ratio 10 at ρ=3 needs d=3 (the worked example), ratio ≤ 1 needs 0.
        assert_eq!(damping_degree(10.0_f64, 3.0), Some(3));
        assert_eq!(damping_degree(0.5_f64, 3.0), Some(0));
        assert_eq!(damping_degree(1e9_f64, 1.25), Some(93));
        assert!(damping_degree(1e60_f64, 1.01).is_none());
    }

    #[test]
    fn blocked_direct_route_detours_through_waypoints() {
        // Target on the far side of the region from the source, with the
        // straight chord passing close to the ball: the direct segment from
        // (−2, 0) toward (2, 0) is axis-parallel, so its functional is the
        // second axis and the anchor projects to 0 — inside the projected
        // disc.  The router must find a detour.
        let source = pt(&[(-2.0, 0.0), (0.0, 0.0)]);
        let target = pt(&[(2.0, 0.0), (0.0, 0.0)]);
        let plan = carry_plan(&source, &target, &[], &unit_ball(), 0.1, 1.0).unwrap();
        assert!(plan.letters.len() >= 2, "expected a detour");
        let mut word = AutWord::identity(2);
        for l in plan.letters {
            word.push(l);
        }
        let image = word.apply(&source).unwrap();
        assert!(image.dist(&target) < 1e-10);
    }

    #[test]
    fn letters_respect_their_share_on_the_region() {
        let plan = carry_plan(
            &pt(&[(3.0, 0.0), (0.0, 0.0)]),
            &pt(&[(2.0, 0.0), (2.0, 1.0)]),
            &[pt(&[(5.0, 0.0), (0.0, 0.0)])],
            &unit_ball(),
            0.05,
            1.0,
        )
        .unwrap();
        let share = 0.05 / plan.letters.len() as f64;
        for letter in &plan.letters {
            if let ElementaryAut::Shear { h, func, frame, .. } = letter {
                let disc = unit_ball().projection_disc(frame.col(*func));
                assert!(h.sup_bound_on_disc(disc.center, disc.radius) <= share * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn probe_directions_are_reproducible() {
        let a = probe_directions::<f64>(2);
        let b = probe_directions::<f64>(2);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.coords, y.coords);
        }
    }

    #[test]
    fn complex_valued_anchor_still_lands_exactly() {
        // A move whose displacement has nontrivial phase in both
        // coordinates: anchors and roots are genuinely complex.
        let source = pt(&[(2.5, 1.0), (-0.5, 2.0)]);
        let target = pt(&[(1.0, -2.5), (2.0, 0.5)]);
        let pin = pt(&[(-3.0, 1.5), (1.0, 1.0)]);
        let plan = carry_plan(
            &source,
            &target,
            std::slice::from_ref(&pin),
            &unit_ball(),
            0.1,
            1.0,
        )
        .unwrap();
        let mut word = AutWord::identity(2);
        for l in plan.letters {
            word.push(l);
        }
        let image = word.apply(&source).unwrap();
        assert!(image.dist(&target) < 1e-10);
        let pinned = word.apply(&pin).unwrap();
        assert_eq!(pinned.coords, pin.coords);
    }

    #[test]
    fn nudge_letter_moves_the_point_without_touching_pins() {
        let at = pt(&[(7.0, 0.0), (0.0, 0.0)]);
        let dir = pt(&[(0.0, 0.0), (1.0, 0.0)]);
        let pin = pt(&[(4.0, 0.0), (0.0, 0.0)]);
        let region = CertifiedCompact::from_ball(Ball::centered(2, 2.0));
        let letters = nudge_letters(
            &[(at.clone(), dir)],
            std::slice::from_ref(&pin),
            &region,
            0.01,
            1e-6,
        )
        .unwrap();
        assert_eq!(letters.len(), 1);
        let moved = letters[0].apply(&at);
        assert!(moved.dist(&at) >= 1e-6);
        let held = letters[0].apply(&pin);
        assert_eq!(held.coords, pin.coords);
    }

    #[test]
    fn separation_failure_reports_the_offending_point() {
        // Region so large relative to the move that no anchor can clear it:
        // both endpoints sit inside the projected disc for every functional.
        let region = CertifiedCompact::from_ball(Ball::centered(2, 10.0));
        let err = carry_plan(
            &pt(&[(1.0, 0.0), (0.0, 0.0)]),
            &pt(&[(0.0, 0.0), (1.0, 0.0)]),
            &[],
            &region,
            0.1,
            0.1,
        )
        .unwrap_err();
        match err {
            RelocationError::SeparationFailure { .. } => {}
            other => panic!("expected SeparationFailure, got {other}"),
        }
    }

    #[test]
    fn complex_scale_keeps_h_value_at_anchor() {
        // The factored scale has a genuine imaginary part when roots sit off
        // the real axis; evaluation must follow the written product exactly.
        let scale: C<f64> = c64(0.0, 1.0);
        let root: C<f64> = c64(1.0, 1.0);
        let at: C<f64> = c64(2.0, 0.0);
        let p = poly::factored(scale, vec![root], c64(0.0, 0.0), 2);
        let v = p.eval(at);
        let expect = scale * (at - root) * at.powu(2);
        assert_eq!(v, expect);
    }
}
