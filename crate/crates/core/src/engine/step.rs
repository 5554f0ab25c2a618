//! The two stage constructors: the opening stage that works inside a
//! deflated first ball, and the general inductive stage that alternates a
//! matching relocation, a ball-growth rule, and an expulsion relocation.
//!
//! Both mutate the run word in place (the caller closes the stage) and
//! return the measured quantities the verifier re-checks independently.

use crate::automorphism::{sup_deviation, AutWord, DeviationEstimate};
use crate::geometry::{
    Atom, Ball, CPoint, Certificate, CertifiedCompact, Disc, GraphPiece, VarietyModel,
};
use crate::relocation::{self, NUDGE_GAP};
use crate::scalar::{Real, C};

use super::{
    EngineError, InterpolationProblem, FORCED_BAND, FORCED_PAD, MATCH_TOL, STATION_FACTOR,
};

/// The ball atom of the working neighborhood sits at most this far outside
/// the previous ball.
const BALL_LAYER_CAP: f64 = 1.0;
/// The piece atom extends at most this far beyond the level radius, in
/// parameter units.
const PARAM_LAYER_CAP: f64 = 0.5;
/// Fraction of the measured clearance (unmatched points to the protected
/// set) the outer neighborhood layer may occupy.
const CLEARANCE_FRACTION: f64 = 0.30;
/// The inner neighborhood sits at this fraction of the outer layers.
const INNER_FRACTION: f64 = 0.35;
/// Parameters this close to the working piece cannot be excluded cleanly and
/// force their carrier into the matched set of the current stage.
const PROMOTE_PAD: f64 = 0.35;
/// Minimum pairwise distance between expulsion stations.
const STATION_CLEAR: f64 = 0.5;
/// Golden angle, used to sweep station phases apart deterministically.
const STATION_SWEEP: f64 = 2.399_963_229_728_653;
/// Budget split of a stage: general-position nudge, matching phase,
/// expulsion phase.
const NUDGE_SHARE: f64 = 0.1;
const PHI_SHARE: f64 = 0.4;
const PSI_SHARE: f64 = 0.5;

/// Measured results of one stage.
#[derive(Clone, Debug)]
pub struct StepOutcome<R: Real> {
    /// Indices matched during this stage.
    pub newly_matched: Vec<usize>,
    /// The next exhaustion ball (for the opening stage, the given second
    /// ball).
    pub b_next: Ball<R>,
    /// Parameter radius of the working piece `M`.
    pub m_radius: R,
    /// Deviation budget the stage was built against.
    pub eps_k: R,
    /// Sampled deviation of the stage word over the protected set.
    pub deviation: DeviationEstimate<R>,
    /// Letters the stage appended.
    pub theta_len: usize,
}

/// Sampling density (points per unit) that keeps envelope grids around ten
/// thousand points regardless of the region scale.
fn sample_density<R: Real>(reach: R) -> R {
    (R::of(8.0) / reach.max(R::one())).min(R::of(8.0)).max(R::of(0.4))
}

fn infeasible(stage: usize, reason: String) -> EngineError {
    EngineError::StepInfeasible { stage, reason }
}

/// Current positions of all sequence points under the run word.
fn positions<R: Real>(
    problem: &InterpolationProblem<R>,
    word: &AutWord<R>,
) -> Result<Vec<CPoint<R>>, EngineError> {
    problem
        .sources
        .iter()
        .map(|a| word.apply(a).map_err(EngineError::from))
        .collect()
}

/// Unit direction of `z`, falling back to the first axis at the origin.
fn outward_direction<R: Real>(z: &CPoint<R>) -> CPoint<R> {
    match z.normalized() {
        Some(u) => u,
        None => {
            let mut e = CPoint::zero(z.dim());
            e.coords[0] = C::new(R::one(), R::zero());
            e
        }
    }
}

/// Deterministic expulsion stations: each point is sent radially outward to
/// the given radius, with the phase swept by the golden angle until the
/// station clears every earlier one.
fn expulsion_stations<R: Real>(
    movers: &[CPoint<R>],
    radius: R,
) -> Result<Vec<CPoint<R>>, EngineError> {
    let mut stations: Vec<CPoint<R>> = Vec::with_capacity(movers.len());
    for pos in movers {
        let dir = outward_direction(pos);
        let mut placed = None;
        for attempt in 0..64 {
            let angle = R::of(attempt as f64) * R::of(STATION_SWEEP);
            let phase = C::new(angle.cos(), angle.sin());
            let candidate = dir.scale(phase * radius);
            let clear = stations
                .iter()
                .all(|s| s.dist(&candidate) >= R::of(STATION_CLEAR));
            if clear {
                placed = Some(candidate);
                break;
            }
        }
        stations.push(placed.ok_or_else(|| {
            infeasible(0, "station sweep exhausted 64 phases".into())
        })?);
    }
    Ok(stations)
}

/// Finite-difference unit tangent of the current trace at parameter `t`.
fn trace_tangent<R: Real>(
    variety: &VarietyModel<R>,
    word: &AutWord<R>,
    t: C<R>,
    stage: usize,
) -> Result<CPoint<R>, EngineError> {
    let h = R::of(1e-5) * (R::one() + t.norm());
    let hp = C::new(h, R::zero());
    let fw = word.apply(&variety.param_point(t + hp))?;
    let bw = word.apply(&variety.param_point(t - hp))?;
    let diff = fw.sub(&bw);
    diff.normalized()
        .ok_or_else(|| infeasible(stage, "degenerate trace tangent".into()))
}

/// A unit direction transverse to `tangent`: in the plane case the complex
/// normal, in higher dimension the axis least aligned with the tangent.
fn transverse_to<R: Real>(tangent: &CPoint<R>) -> CPoint<R> {
    let n = tangent.dim();
    if n == 2 {
        let mut v = CPoint::zero(2);
        v.coords[0] = -tangent.coords[1].conj();
        v.coords[1] = tangent.coords[0].conj();
        return v.normalized().expect("unit tangent has a unit normal");
    }
    let mut best = 0;
    let mut best_mass = R::infinity();
    for k in 0..n {
        let m = tangent.coords[k].norm();
        if m < best_mass {
            best_mass = m;
            best = k;
        }
    }
    let mut v = CPoint::zero(n);
    v.coords[best] = C::new(R::one(), R::zero());
    let c = v.inner(tangent);
    v = v.add_scaled(tangent, -c);
    v.normalized().expect("axis rejection stays nonzero")
}

/// Pushes the *current* trace (raw variety composed with the run word) off
/// every unmatched target that sits on it within the standard gap, holding
/// the matched targets exactly.  Appends nothing when there is no collision.
fn nudge_against_trace<R: Real>(
    variety: &VarietyModel<R>,
    word: &AutWord<R>,
    unmatched_targets: &[CPoint<R>],
    matched_positions: &[CPoint<R>],
    region: &CertifiedCompact<R>,
    epsilon: R,
    window: R,
    stage: usize,
) -> Result<Vec<crate::automorphism::ElementaryAut<R>>, EngineError> {
    let gap = R::of(NUDGE_GAP);
    let window_disc = Disc::centered(window);
    let current = GraphPiece {
        model: variety.clone(),
        disc: window_disc,
        word: word.clone(),
    };
    let mut collisions: Vec<(CPoint<R>, C<R>)> = Vec::new();
    for b in unmatched_targets {
        let (t, d) = current.closest_param(b);
        if d <= gap {
            collisions.push((b.clone(), t));
        }
    }
    if collisions.is_empty() {
        return Ok(Vec::new());
    }

    let mut delta_scale = R::one();
    for _attempt in 0..4 {
        let pts: Vec<(CPoint<R>, CPoint<R>)> = collisions
            .iter()
            .map(|(b, t)| {
                trace_tangent(variety, word, *t, stage)
                    .map(|tan| (b.clone(), transverse_to(&tan)))
            })
            .collect::<Result<_, _>>()?;
        let letters = relocation::nudge_letters(
            &pts,
            matched_positions,
            region,
            epsilon,
            gap * delta_scale,
        )
        .map_err(EngineError::from)?;

        let mut candidate = word.clone();
        candidate.extend(letters.iter().cloned());
        let moved = GraphPiece {
            model: variety.clone(),
            disc: Disc::centered(window),
            word: candidate,
        };
        if collisions.iter().all(|(b, _)| moved.closest_param(b).1 >= gap) {
            return Ok(letters);
        }
        delta_scale = delta_scale * R::of(2.0);
    }
    Err(infeasible(
        stage,
        "collision nudge failed to open the gap in four attempts".into(),
    ))
}

/// Indices whose targets must be matched while the working ball has the
/// given radius: one stage later they would sit inside the protected
/// neighborhood's reach and no damped carry could land on them.
fn forced_indices<R: Real>(
    targets: &[CPoint<R>],
    matched: &[Option<usize>],
    ball_radius: R,
) -> Vec<usize> {
    let threshold = R::of(FORCED_BAND) * (ball_radius + R::of(FORCED_PAD));
    (0..targets.len())
        .filter(|&j| matched[j].is_none() && targets[j].norm() <= threshold)
        .collect()
}

/// Small declared collars around matched parameters whose images sit in the
/// shell just outside a region's ball atom.  A matched point drags the trace
/// back toward the protected zone far from the centred level disc; the
/// collar puts measurement samples (and a projection hull entry) around that
/// pin.  Pins whose images lie inside the ball need nothing: on the ball
/// atom the maximum principle already bounds the strand through them.  Pins
/// far above the shell never approach the protected set at all.
fn pin_collars<R: Real>(
    problem: &InterpolationProblem<R>,
    word: &AutWord<R>,
    matched: &[Option<usize>],
    pos: &[CPoint<R>],
    covered_radius: R,
    ball_radius: R,
) -> Vec<GraphPiece<R>> {
    let shell = ball_radius + R::of(0.5);
    let mut pieces = Vec::new();
    for j in 0..problem.sources.len() {
        if matched[j].is_none() || pos[j].norm() <= ball_radius || pos[j].norm() > shell {
            continue;
        }
        let t = problem.variety.param_of(&problem.sources[j]);
        if t.norm() <= covered_radius {
            continue;
        }
        let radius = (R::of(0.15) * R::one().max(t.norm()))
            .min(R::of(0.5) * (t.norm() - covered_radius))
            .max(R::of(0.02));
        pieces.push(GraphPiece {
            model: problem.variety.clone(),
            disc: Disc::new(t, radius),
            word: word.clone(),
        });
    }
    pieces
}

/// Sampled radial stretch of the trace across the parameter annulus
/// `[lambda, lambda + width]`: the slow and fast ends of `|d trace / d t|`
/// over sixteen directions and three radii.  A sample that overflows reads
/// as an astronomically fast stretch; the caller's width iteration backs the
/// layer away from it.
fn annulus_rates<R: Real>(
    variety: &VarietyModel<R>,
    word: &AutWord<R>,
    lambda: R,
    width: R,
) -> (R, R) {
    let mut lo = R::infinity();
    let mut hi = R::zero();
    let h = R::of(1e-4);
    for k in 0..16 {
        let angle = R::of(k as f64 / 16.0 * std::f64::consts::TAU);
        let dir = C::new(angle.cos(), angle.sin());
        for frac in [0.0, 0.5, 1.0] {
            let t = dir * (lambda + width * R::of(frac));
            let fw = word.apply(&variety.param_point(t + dir * h));
            let bw = word.apply(&variety.param_point(t));
            let rate = match (fw, bw) {
                (Ok(f), Ok(b)) => f.dist(&b) / h,
                _ => R::infinity(),
            };
            lo = lo.min(rate);
            hi = hi.max(rate);
        }
    }
    (lo.max(R::of(1e-9)), hi)
}

/// Thickness of the parameter layer past `lambda` whose outer rim stays
/// within half a unit of the ball the level disc was cut against.  Radial
/// rate probes cannot be trusted here — the trace explodes a short way past
/// the level disc, and its spikes are angularly narrow — so the rim that
/// will actually be used downstream is checked directly, at the density the
/// reach evaluators use, halving the width until it passes.
fn rim_validated_layer<R: Real>(
    variety: &VarietyModel<R>,
    word: &AutWord<R>,
    lambda: R,
    probe: R,
    ceiling: R,
) -> Result<(R, R), EngineError> {
    let mut width = probe;
    for _ in 0..40 {
        let rim_ok = Disc::centered(lambda + width)
            .boundary_points(1024)
            .into_iter()
            .all(|t| match word.apply(&variety.param_point(t)) {
                Ok(w) => w.norm() <= ceiling,
                Err(_) => false,
            });
        if rim_ok {
            let (rate_lo, _) = annulus_rates(variety, word, lambda, width);
            return Ok((width, rate_lo));
        }
        width = width * R::of(0.5);
        if width < R::of(1e-6) {
            break;
        }
    }
    Err(EngineError::ResolutionTooCoarse {
        detail: format!(
            "no layer past the level radius {:.3} keeps its rim under {:.3}",
            lambda.as_f64(),
            ceiling.as_f64()
        ),
    })
}

/// The opening stage: matches every target the second ball forces, from the
/// original source positions, inside a deflated copy of the first ball, and
/// expels the unmatched sources whose parameters would otherwise cap the
/// level piece.
pub fn stage_one<R: Real>(
    problem: &InterpolationProblem<R>,
    word: &mut AutWord<R>,
    matched: &mut [Option<usize>],
) -> Result<StepOutcome<R>, EngineError> {
    let n = problem.variety.ambient_dim();
    let (r1, r2) = (problem.r1, problem.r2);
    let b2 = Ball::centered(n, r2);
    let eps_k = R::of(super::STEP_BUDGET_FRACTION) * problem.epsilon * R::of(0.5);

    let forced = forced_indices(&problem.targets, matched, r2);

    // Region: the first ball deflated far enough that every mover clears it.
    let mut r_reg = r1 * R::of(0.9);
    for &j in &forced {
        let norm = problem.sources[j].norm();
        if norm < R::of(0.05) {
            return Err(infeasible(
                1,
                format!("source {j} sits at the origin and cannot be carried"),
            ));
        }
        r_reg = r_reg.min(norm * R::of(0.6));
    }
    let region = CertifiedCompact::from_ball(Ball::centered(n, r_reg));
    let density = sample_density(r_reg);

    // General position: unmatched targets may not sit on the raw trace.
    let unmatched_targets: Vec<CPoint<R>> = (0..problem.targets.len())
        .filter(|&j| matched[j].is_none() && !forced.contains(&j))
        .map(|j| problem.targets[j].clone())
        .collect();
    let theta_start = word.len();
    let nudge = nudge_against_trace(
        &problem.variety,
        word,
        &unmatched_targets,
        &[],
        &region,
        eps_k * R::of(NUDGE_SHARE),
        r2 + R::of(4.0),
        1,
    )?;
    word.extend(nudge);

    // Matching phase, from the original source positions.
    let pos = positions(problem, word)?;
    let moves: Vec<(CPoint<R>, CPoint<R>)> = forced
        .iter()
        .map(|&j| (pos[j].clone(), problem.targets[j].clone()))
        .collect();
    let pins: Vec<CPoint<R>> = (0..problem.sources.len())
        .filter(|j| !forced.contains(j))
        .map(|j| pos[j].clone())
        .collect();
    let phi = relocation::relocate_core(
        &moves,
        &pins,
        &region,
        eps_k * R::of(PHI_SHARE),
        (r_reg * R::of(0.3)).max(R::of(0.02)),
        density,
    )
    .map_err(EngineError::from)?;
    word.concat(phi);
    for &j in &forced {
        matched[j] = Some(1);
    }

    // Expulsion: parameters at or below the second radius (plus slack) would
    // pin the level crossing onto an unmatched point; push those out first.
    let m_radius = forced
        .iter()
        .map(|&j| problem.variety.param_of(&problem.sources[j]).norm())
        .fold(R::zero(), |a, b| a.max(b))
        + R::of(0.2);
    let pos = positions(problem, word)?;
    let expel: Vec<usize> = (0..problem.sources.len())
        .filter(|&j| {
            matched[j].is_none()
                && problem.variety.param_of(&problem.sources[j]).norm() <= r2 + R::one()
        })
        .collect();

    if !expel.is_empty() {
        // The expulsion works against the deflated ball alone.  The matched
        // points are exact pins of the relocation; folding a working piece
        // over their parameters into the region would only fatten its
        // projection hull until no carry past it stays feasible.
        let psi_region = CertifiedCompact::from_ball(Ball::centered(n, r_reg));
        let station_radius = (R::of(STATION_FACTOR) * r2 + R::one())
            .max(R::of(1.3) * r_reg + R::of(0.3));
        let movers: Vec<CPoint<R>> = expel.iter().map(|&j| pos[j].clone()).collect();
        let stations = expulsion_stations(&movers, station_radius)
            .map_err(|_| infeasible(1, "station sweep exhausted".into()))?;
        let station_moves: Vec<(CPoint<R>, CPoint<R>)> =
            movers.into_iter().zip(stations).collect();
        let psi_pins: Vec<CPoint<R>> = (0..problem.sources.len())
            .filter(|j| !expel.contains(j))
            .map(|j| pos[j].clone())
            .collect();
        let psi = relocation::relocate_core(
            &station_moves,
            &psi_pins,
            &psi_region,
            eps_k * R::of(PSI_SHARE),
            R::of(0.05),
            sample_density(r_reg),
        )
        .map_err(EngineError::from)?;
        word.concat(psi);
    }

    // Residual check on everything matched so far.
    for &j in &forced {
        let landed = word.apply(&problem.sources[j])?;
        let res = landed.dist(&problem.targets[j]);
        if res > R::of(MATCH_TOL) {
            return Err(infeasible(
                1,
                format!("matched pair {j} left residual {res:.3e}"),
            ));
        }
    }

    // Deviation over the stage's own identity region; the later stages are
    // measured over the previous ball and level piece instead, which do not
    // exist yet here.
    let theta = own_word(word, theta_start, n);
    let deviation = sup_deviation(&theta, None, &region, density)?;

    Ok(StepOutcome {
        newly_matched: forced,
        b_next: b2,
        m_radius,
        eps_k,
        deviation,
        theta_len: word.len() - theta_start,
    })
}

/// The letters appended after `start`, as a standalone word.
fn own_word<R: Real>(word: &AutWord<R>, start: usize, dim: usize) -> AutWord<R> {
    let mut theta = AutWord::identity(dim);
    theta.extend(word.letters()[start..].iter().cloned());
    theta
}

/// One general stage.  `b_prev`/`b_cur` are the previous and current balls,
/// `lambda_prev` the level radius of the current trace against `b_cur`, and
/// `k_prev_radius` the exhaustion parameter radius the working piece must
/// swallow.  On success the word has gained the stage letters (not yet
/// closed into a stage range) and the outcome carries the next ball.
#[allow(clippy::too_many_arguments)]
pub fn inductive_step<R: Real>(
    problem: &InterpolationProblem<R>,
    word: &mut AutWord<R>,
    matched: &mut [Option<usize>],
    stage: usize,
    b_prev: &Ball<R>,
    b_cur: &Ball<R>,
    lambda_prev: R,
    k_prev_radius: R,
    eps_budget: R,
) -> Result<StepOutcome<R>, EngineError> {
    let n = problem.variety.ambient_dim();
    let variety = &problem.variety;
    let theta_start = word.len();
    let params: Vec<R> = problem
        .sources
        .iter()
        .map(|a| variety.param_of(a).norm())
        .collect();

    // Forced set: the current ball's dead band.
    let mut forced = forced_indices(&problem.targets, matched, b_cur.radius);

    // Protected set of the stage: previous ball, previous level piece, and
    // collars around matched parameters whose images sit in the shell just
    // outside the ball (the level set is not one disc once points are
    // matched).
    let pos = positions(problem, word)?;
    let has_piece = lambda_prev > R::of(0.05);
    let l_piece = GraphPiece {
        model: variety.clone(),
        disc: Disc::centered(lambda_prev),
        word: word.clone(),
    };
    let bl_islands = pin_collars(
        problem,
        word,
        matched,
        &pos,
        if has_piece { lambda_prev } else { R::zero() },
        b_prev.radius,
    );
    let mut bl_atoms = vec![Atom::Ball(b_prev.clone())];
    if has_piece {
        bl_atoms.push(Atom::Piece(l_piece.clone()));
    }
    bl_atoms.extend(bl_islands.iter().cloned().map(Atom::Piece));
    let bl = CertifiedCompact::from_atoms(bl_atoms, Certificate::BallUnionPiece);

    // Clearances over the protected set decide how fat the working
    // neighborhood may be.  Every unmatched point sizes the layers (a layer
    // reaching a mover's start leaves its carry no anchor room), but only
    // the points that stay behind trip the expulsion-debt error.
    let unmatched: Vec<usize> = (0..problem.sources.len())
        .filter(|&j| matched[j].is_none())
        .collect();
    let mut source_clear = R::infinity();
    let mut stay_clear = R::infinity();
    let mut param_clear = R::infinity();
    for &j in &unmatched {
        let d = bl.dist(&pos[j]);
        source_clear = source_clear.min(d);
        if !forced.contains(&j) {
            stay_clear = stay_clear.min(d);
            param_clear = param_clear.min(params[j] - lambda_prev);
        }
    }
    if stay_clear < R::of(0.02) {
        return Err(infeasible(
            stage,
            format!(
                "an unmatched point sits {:.3e} from the protected set; it should \
                 have been expelled or matched earlier",
                stay_clear.as_f64()
            ),
        ));
    }
    if param_clear < R::of(0.05) {
        return Err(infeasible(
            stage,
            "an unmatched parameter lies inside the level disc".into(),
        ));
    }
    let a1 = R::of(BALL_LAYER_CAP).min(R::of(CLEARANCE_FRACTION) * source_clear);
    let a0 = R::of(INNER_FRACTION) * a1;

    // The parameter layer is capped three ways: absolutely, by the clearance
    // of the unmatched parameters, and by direct validation of its outer rim,
    // so the layered rim never climbs more than half a unit past the ball the
    // level disc was cut against.
    let probe = R::of(PARAM_LAYER_CAP).min(R::of(0.5) * param_clear);
    let (a1p, rate_lo) = if has_piece {
        rim_validated_layer(
            variety,
            word,
            lambda_prev,
            probe,
            b_cur.radius + R::of(0.5),
        )?
    } else {
        (probe, R::one())
    };
    let a0p = R::of(INNER_FRACTION) * a1p;

    // The admissible deviation is computed, not chosen: half the smaller of
    // the two sampled layer margins (protected set to inner neighborhood,
    // inner to outer).  The piece-side margins convert parameter layers into
    // space through the slow end of the sampled stretch.
    let d_inner = a0.min(a0p * rate_lo);
    let d_outer = (a1 - a0).min((a1p - a0p) * rate_lo);
    let eps0 = R::of(0.5) * d_inner.min(d_outer);
    let eps_k = eps_budget.min(eps0);
    if eps_k <= R::zero() {
        return Err(infeasible(stage, "layer margins vanished".into()));
    }

    // Working piece radius, and the promotion pass: a parameter the piece
    // cannot exclude cleanly gets matched now instead of protected.  When a
    // level piece exists its rate-capped layer is also a hard ceiling on the
    // piece: past it the trace explodes, so a piece stretched to cover the
    // exhaustion there could never stay inside the next ball.
    if has_piece && k_prev_radius + R::of(0.05) > lambda_prev + a1p {
        return Err(infeasible(
            stage,
            format!(
                "exhaustion radius {:.3} outruns the level layer {:.3}",
                k_prev_radius.as_f64(),
                (lambda_prev + a1p).as_f64()
            ),
        ));
    }
    let m_radius = (lambda_prev + a1p).max(k_prev_radius + R::of(0.05));
    for j in 0..problem.sources.len() {
        if matched[j].is_none()
            && !forced.contains(&j)
            && params[j] <= m_radius + R::of(PROMOTE_PAD)
        {
            forced.push(j);
        }
    }

    // Working neighborhood, as a declared atom union.  Holomorphy does the
    // covering: on the ball atom the maximum principle bounds any word's
    // deviation by its sphere samples, so trace strands passing through the
    // ball need no atoms of their own; the piece atoms extend the
    // measurement surface to the level layer and the matched dips outside
    // the ball.
    let d_ball = Ball::centered(n, b_prev.radius + a1);
    let d_islands = pin_collars(
        problem,
        word,
        matched,
        &pos,
        if has_piece { lambda_prev + a1p } else { R::zero() },
        d_ball.radius,
    );
    let mut d_atoms = vec![Atom::Ball(d_ball.clone())];
    if has_piece {
        d_atoms.push(Atom::Piece(GraphPiece {
            model: variety.clone(),
            disc: Disc::centered(lambda_prev + a1p),
            word: word.clone(),
        }));
    }
    d_atoms.extend(d_islands.into_iter().map(Atom::Piece));
    let d_region = CertifiedCompact::from_atoms(d_atoms, Certificate::BallUnionPiece);
    let d_reach = d_region.max_dist_to(&CPoint::zero(n));
    if !d_reach.is_finite() {
        return Err(infeasible(
            stage,
            "working neighborhood escapes the controlled zone".into(),
        ));
    }

    // General position first.
    let unmatched_targets: Vec<CPoint<R>> = unmatched
        .iter()
        .map(|&j| problem.targets[j].clone())
        .collect();
    let matched_positions: Vec<CPoint<R>> = (0..problem.sources.len())
        .filter(|&j| matched[j].is_some())
        .map(|j| problem.targets[j].clone())
        .collect();
    let window = forced
        .iter()
        .map(|&j| params[j])
        .fold(m_radius, |a, b| a.max(b))
        + R::of(2.0);
    let nudge = nudge_against_trace(
        variety,
        word,
        &unmatched_targets,
        &matched_positions,
        &d_region,
        eps_k * R::of(NUDGE_SHARE),
        window,
        stage,
    )?;
    word.extend(nudge);

    // Matching phase.
    let pos = positions(problem, word)?;
    let moves: Vec<(CPoint<R>, CPoint<R>)> = forced
        .iter()
        .map(|&j| (pos[j].clone(), problem.targets[j].clone()))
        .collect();
    let pins: Vec<CPoint<R>> = (0..problem.sources.len())
        .filter(|j| !forced.contains(j))
        .map(|j| pos[j].clone())
        .collect();
    let phi = relocation::relocate_core(
        &moves,
        &pins,
        &d_region,
        eps_k * R::of(PHI_SHARE),
        (R::of(0.25) * source_clear).min(R::one()).max(R::of(0.02)),
        sample_density(d_reach),
    )
    .map_err(EngineError::from)?;
    word.concat(phi);
    for &j in &forced {
        matched[j] = Some(stage);
    }

    // The working piece after the match: the layered level disc under the
    // extended word, the matched dips, and the matched points themselves.
    // The next ball swallows its image together with the current ball, and
    // then grows by at least the previous gap plus one.
    let pos = positions(problem, word)?;
    let psi_islands = pin_collars(
        problem,
        word,
        matched,
        &pos,
        m_radius,
        b_prev.radius + a0,
    );
    let m_piece = GraphPiece {
        model: variety.clone(),
        disc: Disc::centered(m_radius),
        word: word.clone(),
    };
    let mut reach_atoms = vec![Atom::Piece(m_piece.clone()), Atom::Ball(b_cur.clone())];
    reach_atoms.extend(psi_islands.iter().cloned().map(Atom::Piece));
    let reach_set = CertifiedCompact::from_atoms(reach_atoms, Certificate::BallUnionPiece);
    let matched_reach = (0..problem.sources.len())
        .filter(|&j| matched[j].is_some())
        .map(|j| problem.targets[j].norm())
        .fold(R::zero(), |a, b| a.max(b));
    let r_bulge = reach_set.max_dist_to(&CPoint::zero(n)).max(matched_reach);
    if !r_bulge.is_finite() {
        return Err(infeasible(
            stage,
            "working piece escapes the controlled zone".into(),
        ));
    }
    let gap = R::of(1.5).max(b_cur.radius + R::one() - b_prev.radius);
    let b_next = Ball::centered(n, r_bulge + gap);

    // Expulsion phase: every unmatched point not already far beyond the next
    // ball is re-stationed outside it.
    let mut psi_atoms = vec![Atom::Ball(Ball::centered(n, b_prev.radius + a0))];
    if has_piece {
        psi_atoms.push(Atom::Piece(GraphPiece {
            model: variety.clone(),
            disc: Disc::centered(lambda_prev + a0p),
            word: l_piece.word.clone(),
        }));
    }
    psi_atoms.push(Atom::Piece(m_piece.clone()));
    psi_atoms.extend(psi_islands.iter().cloned().map(Atom::Piece));
    let psi_region = CertifiedCompact::from_atoms(psi_atoms, Certificate::BallUnionPiece);
    let psi_reach = psi_region.max_dist_to(&CPoint::zero(n));
    if !psi_reach.is_finite() {
        return Err(infeasible(
            stage,
            "expulsion region escapes the controlled zone".into(),
        ));
    }
    let station_radius = (R::of(STATION_FACTOR) * b_next.radius + R::one())
        .max(R::of(1.3) * psi_reach + R::of(0.3));
    let explicit_movers: Vec<usize> = (0..problem.sources.len())
        .filter(|&j| {
            matched[j].is_none() && pos[j].norm() < station_radius * R::of(0.999)
        })
        .collect();
    if !explicit_movers.is_empty() {
        let mover_pos: Vec<CPoint<R>> =
            explicit_movers.iter().map(|&j| pos[j].clone()).collect();
        let stations = expulsion_stations(&mover_pos, station_radius)
            .map_err(|_| infeasible(stage, "station sweep exhausted".into()))?;
        let station_moves: Vec<(CPoint<R>, CPoint<R>)> =
            mover_pos.into_iter().zip(stations).collect();
        let psi_pins: Vec<CPoint<R>> = (0..problem.sources.len())
            .filter(|j| !explicit_movers.contains(j))
            .map(|j| pos[j].clone())
            .collect();
        let psi = relocation::relocate_core(
            &station_moves,
            &psi_pins,
            &psi_region,
            eps_k * R::of(PSI_SHARE),
            (R::of(0.25) * source_clear).min(R::one()).max(R::of(0.02)),
            sample_density(psi_reach),
        )
        .map_err(EngineError::from)?;
        word.concat(psi);
    }

    // Post checks: matched pairs landed, unmatched points left well outside.
    for j in 0..problem.sources.len() {
        if matched[j].is_some() {
            let landed = word.apply(&problem.sources[j])?;
            let res = landed.dist(&problem.targets[j]);
            if res > R::of(MATCH_TOL) {
                return Err(infeasible(
                    stage,
                    format!("matched pair {j} drifted to residual {res:.3e}"),
                ));
            }
        } else {
            let out = word.apply(&problem.sources[j])?;
            if out.norm() < b_next.radius * R::of(1.1) {
                return Err(infeasible(
                    stage,
                    format!(
                        "unmatched point {j} sits at {:.3} inside the expulsion margin \
                         of the next ball {:.3}",
                        out.norm().as_f64(),
                        b_next.radius.as_f64()
                    ),
                ));
            }
        }
    }

    let theta = own_word(word, theta_start, n);
    let deviation = sup_deviation(&theta, None, &bl, sample_density(b_prev.radius))?;
    if deviation.sup > eps_k * R::of(1.0 + 1e-9) {
        return Err(infeasible(
            stage,
            format!(
                "stage deviation {:.3e} exceeds its budget {:.3e}",
                deviation.sup.as_f64(),
                eps_k.as_f64()
            ),
        ));
    }

    Ok(StepOutcome {
        newly_matched: forced,
        b_next,
        m_radius,
        eps_k,
        deviation,
        theta_len: word.len() - theta_start,
    })
}
