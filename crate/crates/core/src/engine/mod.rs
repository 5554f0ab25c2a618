//! The staged construction: matching a tame sequence on a parametrized
//! curve to prescribed targets, one exhaustion ball at a time.
//!
//! A run produces a word whose stages `Φ_1, …, Φ_K` satisfy, each against
//! the next ball in a growing schedule: targets that the ball forces are
//! matched to `1e-9`; the level piece (the part of the trace the stage keeps
//! inside the next ball) grows strictly and swallows the exhaustion; the
//! stage deviates from its predecessor by less than a dyadically shrinking
//! budget on the previous ball and level piece; and every unmatched point is
//! parked far outside.  Those are exactly the properties the verifier
//! re-measures from scratch, so the engine records what it achieved rather
//! than what it aimed for.

mod level;
mod step;

pub use level::{level_set, LevelPiece};
pub use step::{inductive_step, stage_one, StepOutcome};

use crate::automorphism::{ApplyError, AutWord};
use crate::geometry::{Ball, CPoint, GeometryError, VarietyModel, DUPLICATE_TOL};
use crate::relocation::RelocationError;
use crate::scalar::Real;
use thiserror::Error;

/// Parameter radius step of the exhaustion pieces: stage `k` must swallow
/// the raw piece over the disc of radius `k * KK_BASE`.  The rate is slow on
/// purpose: the level radius is gated by how fast the damped stage letters
/// swing the trace past the pinned zone, and it only creeps outward a few
/// tenths per stage at desk scales.
pub const KK_BASE: f64 = 0.125;

/// Fraction of the dyadic allowance `epsilon * 2^-k` a stage may actually
/// spend; the rest is the margin the verifier gets to observe.
pub(crate) const STEP_BUDGET_FRACTION: f64 = 0.4;

/// Targets closer to the origin than `FORCED_BAND * (r + FORCED_PAD)` must
/// be matched while the current ball has radius `r`; one stage later the
/// protected neighborhood reaches past them and no damped carry could land.
pub(crate) const FORCED_BAND: f64 = 1.35;
pub(crate) const FORCED_PAD: f64 = 1.5;

/// Expulsion stations sit at least at this multiple of the next radius,
/// plus one.  The next stage's working neighborhood reaches roughly half a
/// unit past the ball the station was sized against, and a carry out of the
/// station needs its anchor to clear that neighborhood's projection by a
/// fixed ratio with room to spare.
pub(crate) const STATION_FACTOR: f64 = 1.75;

/// Residual allowed on any matched pair, at every stage end.
pub const MATCH_TOL: f64 = 1e-9;

/// Slack granted when testing a point against a scheduled ball.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// Orbits that ever exceed this multiple of the last scheduled radius count
/// as escaped even if a later stage pulls them back.
pub const ORBIT_CAP_FACTOR: f64 = 8.0;

/// Everything that can stop a run.
#[derive(Debug, Error)]
pub enum EngineError {
    #[error("problem rejected: {reason}")]
    InvalidProblem { reason: String },
    #[error("stage {stage} cannot be arranged: {reason}")]
    StepInfeasible { stage: usize, reason: String },
    #[error("schedule exhausted with targets {unmatched:?} unmatched inside the final ball")]
    ScheduleExhausted { unmatched: Vec<usize> },
    #[error("level search too coarse: {detail}")]
    ResolutionTooCoarse { detail: String },
    #[error(transparent)]
    Relocation(#[from] RelocationError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Apply(#[from] ApplyError),
}

/// A fully specified interpolation instance.
#[derive(Clone, Debug)]
pub struct InterpolationProblem<R: Real> {
    pub variety: VarietyModel<R>,
    pub sources: Vec<CPoint<R>>,
    pub targets: Vec<CPoint<R>>,
    /// Global deviation allowance; the per-stage budgets sum below it.
    pub epsilon: R,
    /// Number of stages to run.
    pub k_max: usize,
    /// First two exhaustion radii; the rest follow from the growth rule.
    pub r1: R,
    pub r2: R,
    /// Sampling density handed to the verification grids.
    pub grid_density: R,
}

impl<R: Real> InterpolationProblem<R> {
    pub fn validate(&self) -> Result<(), EngineError> {
        let reject = |reason: String| Err(EngineError::InvalidProblem { reason });
        let n = self.variety.ambient_dim();
        if n < 2 {
            return reject("ambient dimension must be at least 2".into());
        }
        if !self.variety.is_curve() {
            return reject("the variety must be one-dimensional (a parametrized curve)".into());
        }
        if self.sources.len() != self.targets.len() {
            return reject(format!(
                "{} sources against {} targets",
                self.sources.len(),
                self.targets.len()
            ));
        }
        for (what, pts) in [("source", &self.sources), ("target", &self.targets)] {
            for (j, p) in pts.iter().enumerate() {
                if p.dim() != n {
                    return reject(format!("{what} {j} lives in C^{}, not C^{n}", p.dim()));
                }
            }
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    if pts[i].dist(&pts[j]) <= R::of(DUPLICATE_TOL) {
                        return reject(format!("{what}s {i} and {j} coincide"));
                    }
                }
            }
        }
        for (j, a) in self.sources.iter().enumerate() {
            let defect = self.variety.membership_defect(a);
            if defect > R::of(1e-10) {
                return reject(format!(
                    "source {j} sits {defect:.3e} off the variety"
                ));
            }
        }
        if !(self.epsilon > R::zero() && self.epsilon < R::one()) {
            return reject("epsilon must lie in (0, 1)".into());
        }
        if self.r1 <= R::zero() {
            return reject("the first radius must be positive".into());
        }
        if self.r2 <= self.r1 + R::one() {
            return reject("the second radius must exceed the first by more than 1".into());
        }
        if self.k_max == 0 || self.k_max > 32 {
            return reject("the stage count must lie in 1..=32".into());
        }
        if self.grid_density <= R::zero() {
            return reject("the grid density must be positive".into());
        }
        Ok(())
    }
}

/// Measured facts about one completed stage.
#[derive(Clone, Debug)]
pub struct StageRecord<R: Real> {
    pub stage: usize,
    /// Radius of the ball the stage started from.
    pub r: R,
    /// Radius of the next ball (for stage 1, the given second radius).
    pub r_next: R,
    /// Level radius of the stage word against the next ball.
    pub lambda: R,
    /// Parameter radius of the working piece.
    pub m_radius: R,
    /// Budget the stage was built against.
    pub eps_k: R,
    /// Sampled deviation of the stage word over its protected set.
    pub deviation: R,
    /// Indices matched during this stage.
    pub newly_matched: Vec<usize>,
    /// Cumulative letter count through this stage.
    pub word_len: usize,
}

/// A completed run.
#[derive(Clone, Debug)]
pub struct InterpolationRun<R: Real> {
    /// The full word, one closed stage per schedule step.
    pub word: AutWord<R>,
    pub records: Vec<StageRecord<R>>,
    /// Radii `r_1 ..= r_{k_max + 1}`.
    pub radii: Vec<R>,
    /// Stage at which each pair was matched (`None`: left unmatched, which
    /// the run only tolerates outside the final ball).
    pub matched_at: Vec<Option<usize>>,
    /// Largest matched-pair residual at the end.
    pub final_residual: R,
}

/// Runs the whole schedule.
pub fn run_interpolation<R: Real>(
    problem: &InterpolationProblem<R>,
) -> Result<InterpolationRun<R>, EngineError> {
    problem.validate()?;
    let n = problem.variety.ambient_dim();
    let count = problem.sources.len();
    let mut word = AutWord::identity(n);
    let mut matched: Vec<Option<usize>> = vec![None; count];
    let mut records: Vec<StageRecord<R>> = Vec::new();
    let mut radii = vec![problem.r1, problem.r2];

    let out = step::stage_one(problem, &mut word, &mut matched)?;
    word.close_stage();
    let lv = level::level_set(&word, &problem.variety, &Ball::centered(n, problem.r2))?;
    let mut lambda_prev = lv.radius;
    records.push(StageRecord {
        stage: 1,
        r: problem.r1,
        r_next: problem.r2,
        lambda: lv.radius,
        m_radius: out.m_radius,
        eps_k: out.eps_k,
        deviation: out.deviation.sup,
        newly_matched: out.newly_matched,
        word_len: word.len(),
    });

    for k in 2..=problem.k_max {
        let b_prev = Ball::centered(n, radii[k - 2]);
        let b_cur = Ball::centered(n, radii[k - 1]);
        let eps_budget = R::of(STEP_BUDGET_FRACTION)
            * problem.epsilon
            * R::of(0.5).powi(k as i32);
        let k_prev_radius = R::of(KK_BASE) * R::of((k - 1) as f64);
        let out = step::inductive_step(
            problem,
            &mut word,
            &mut matched,
            k,
            &b_prev,
            &b_cur,
            lambda_prev,
            k_prev_radius,
            eps_budget,
        )?;
        word.close_stage();
        radii.push(out.b_next.radius);
        let lv = level::level_set(&word, &problem.variety, &out.b_next)?;
        // The level discs must grow strictly and overtake the exhaustion:
        // anything matched or swallowed earlier stays strictly interior.
        if lv.radius <= lambda_prev || lv.radius <= k_prev_radius {
            return Err(EngineError::StepInfeasible {
                stage: k,
                reason: format!(
                    "level radius stalled at {:.4} (previous {:.4}, exhaustion {:.4})",
                    lv.radius.as_f64(),
                    lambda_prev.as_f64(),
                    k_prev_radius.as_f64()
                ),
            });
        }
        records.push(StageRecord {
            stage: k,
            r: b_prev.radius,
            r_next: out.b_next.radius,
            lambda: lv.radius,
            m_radius: out.m_radius,
            eps_k: out.eps_k,
            deviation: out.deviation.sup,
            newly_matched: out.newly_matched,
            word_len: word.len(),
        });
        lambda_prev = lv.radius;
    }

    let r_final = *radii.last().expect("schedule has at least two radii");
    let unmatched_inside: Vec<usize> = (0..count)
        .filter(|&j| matched[j].is_none() && problem.targets[j].norm() <= r_final)
        .collect();
    if !unmatched_inside.is_empty() {
        return Err(EngineError::ScheduleExhausted {
            unmatched: unmatched_inside,
        });
    }

    let mut final_residual = R::zero();
    for j in 0..count {
        if matched[j].is_some() {
            let landed = word.apply(&problem.sources[j])?;
            final_residual = final_residual.max(landed.dist(&problem.targets[j]));
        }
    }

    Ok(InterpolationRun {
        word,
        records,
        radii,
        matched_at: matched,
        final_residual,
    })
}

/// Where a point's staged orbit ends up relative to the schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    /// The orbit enters some scheduled ball (first such stage) and stays
    /// bounded through all of them.
    Inside { stage: usize },
    /// The orbit misses every ball, or blows past the boundedness cap; the
    /// stage is where that was decided.
    Escaped { stage: usize },
}

/// Scans the staged orbit of `z` against the scheduled radii.  A point
/// counts inside as soon as one stage parks it inside the matching ball,
/// even if earlier stages held it outside; an orbit that ever exceeds
/// [`ORBIT_CAP_FACTOR`] times the last radius counts escaped regardless.
pub fn fb_membership<R: Real>(word: &AutWord<R>, radii: &[R], z: &CPoint<R>) -> Membership {
    let stages = word.stage_count().min(radii.len());
    assert!(stages > 0, "membership needs at least one closed stage");
    let cap = R::of(ORBIT_CAP_FACTOR) * radii[stages - 1];
    let mut first_inside = None;
    let mut first_out = None;
    let mut first_unbounded = None;
    for k in 1..=stages {
        match word.apply_through_stage(z, k) {
            Ok(w) => {
                let norm = w.norm();
                if norm <= radii[k - 1] + R::of(MEMBERSHIP_TOL) {
                    if first_inside.is_none() {
                        first_inside = Some(k);
                    }
                } else if first_out.is_none() {
                    first_out = Some(k);
                }
                if norm > cap && first_unbounded.is_none() {
                    first_unbounded = Some(k);
                }
            }
            Err(_) => {
                if first_out.is_none() {
                    first_out = Some(k);
                }
                first_unbounded = Some(first_unbounded.unwrap_or(k));
                break;
            }
        }
    }
    match (first_inside, first_unbounded) {
        (Some(k), None) => Membership::Inside { stage: k },
        (Some(_), Some(k)) => Membership::Escaped { stage: k },
        (None, _) => Membership::Escaped {
            stage: first_out.unwrap_or(1),
        },
    }
}
