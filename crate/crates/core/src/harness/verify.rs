//! The independent checker: every claim a run makes, re-measured from the
//! word, the ball schedule and the problem — never from the engine's records.
//!
//! Independence is enforced structurally: [`verify`] receives only what a
//! word file carries.  It re-derives the level radii with its own ray fan,
//! re-decides which pairs are matched from residuals, and re-samples every
//! membership and deviation grid at a deterministic half-cell offset from
//! the construction's grids, so a pass cannot be the construction grading
//! its own samples.
//!
//! Five conditions are measured per stage `k`, against the next scheduled
//! ball `B_{k+1}`:
//!
//! 1. *level dichotomy* — the stage word maps the level disc's trace inside
//!    `B_{k+1}` and every probe ray genuinely exits it;
//! 2. *matched residuals* — sources whose parameter lies on the level disc
//!    sit within `1e-9` of their targets;
//! 3. *covered targets matched* — no unmatched target hides inside the
//!    current ball or on the trace over the level disc;
//! 4. *nested levels* — level radii strictly increase, stay ahead of the
//!    exhaustion discs, and ball radii grow by more than one;
//! 5. *stage deviation* — the stage differs from its predecessor by less
//!    than `ε·2⁻ᵏ` on the previous ball and level piece.
//!
//! Failures are report entries, never errors: a corrupted word produces a
//! FAIL report that says where, not a crash.

use std::fmt;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::automorphism::AutWord;
use crate::engine::{InterpolationProblem, KK_BASE, MATCH_TOL, MEMBERSHIP_TOL};
use crate::geometry::{sphere_grid, sphere_spacing_for, Ball, CPoint, Disc, GraphPiece, VarietyModel};
use crate::relocation::NUDGE_GAP;
use crate::scalar::{Real, C};

use super::FORMAT_VERSION;

/// Final interpolation residual a run must beat for a PASS verdict.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Rays in the verifier's level sweep; offset half a cell from the
/// construction fan.
const RAYS: usize = 192;
/// Dense rim pass, same density the construction uses, angles offset.
const DENSE_RIM: usize = 1024;
/// Bisection rounds per bracket.
const BISECT_ROUNDS: usize = 48;
/// A target counts as lying on the trace when it comes closer than this;
/// one order below the collision-nudge gap, three above matched roundoff.
const TRACE_TOL: f64 = NUDGE_GAP * 0.1;
/// Sphere-grid budget per deviation measurement.
const SPHERE_MIN: usize = 2000;
const SPHERE_MAX: usize = 24_000;
/// Points drawn for the inverse roundtrip check.
const ROUNDTRIP_POINTS: usize = 1000;

/// One measured condition: what was measured, what it had to beat, and
/// enough prose to read the failure without the code.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub pass: bool,
    pub measured: f64,
    pub bound: f64,
    pub samples: usize,
    pub detail: String,
}

impl ConditionCheck {
    fn vacuous(detail: &str) -> Self {
        ConditionCheck {
            pass: true,
            measured: 0.0,
            bound: 0.0,
            samples: 0,
            detail: detail.into(),
        }
    }
}

/// Everything re-measured about one stage.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageVerification {
    pub stage: usize,
    pub ball_radius: f64,
    pub next_radius: f64,
    /// Level radius found by the verifier's own sweep.
    pub level_radius: f64,
    pub word_len: usize,
    pub matched_count: usize,
    pub level_dichotomy: ConditionCheck,
    pub matched_residuals: ConditionCheck,
    pub covered_targets_matched: ConditionCheck,
    pub nested_levels: ConditionCheck,
    pub stage_deviation: ConditionCheck,
}

impl StageVerification {
    pub fn pass(&self) -> bool {
        self.level_dichotomy.pass
            && self.matched_residuals.pass
            && self.covered_targets_matched.pass
            && self.nested_levels.pass
            && self.stage_deviation.pass
    }
}

/// Whole-run measurements.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FinalChecks {
    pub pass: bool,
    /// Largest matched-pair residual under the full word.
    pub max_residual: f64,
    pub residual_tol: f64,
    pub matched: usize,
    pub pairs: usize,
    /// Worst `|Φ⁻¹(Φ(z)) − z|` over seeded points in the final ball.
    pub inverse_roundtrip: f64,
    pub roundtrip_tol: f64,
    pub total_letters: usize,
    pub solve_ms: Option<u64>,
    pub verify_ms: u64,
    pub detail: String,
}

/// The machine-readable verification result; `Display` renders the human
/// summary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub format_version: u32,
    pub pass: bool,
    /// Structural mismatches between word, schedule and problem.  Nonempty
    /// setup errors fail the report before any stage is measured.
    pub setup_errors: Vec<String>,
    pub stages: Vec<StageVerification>,
    pub final_checks: FinalChecks,
}

impl VerificationReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "verification: {} ({} stages, {}/{} matched)",
            verdict(self.pass),
            self.stages.len(),
            self.final_checks.matched,
            self.final_checks.pairs
        )?;
        for e in &self.setup_errors {
            writeln!(f, "  setup: {e}")?;
        }
        for s in &self.stages {
            writeln!(
                f,
                "  stage {}: ball {:.3} -> {:.3}, level {:.4}, {} letters, {} matched",
                s.stage, s.ball_radius, s.next_radius, s.level_radius, s.word_len, s.matched_count
            )?;
            let rows = [
                ("(i)   level dichotomy ", &s.level_dichotomy),
                ("(ii)  matched residual", &s.matched_residuals),
                ("(iii) covered targets ", &s.covered_targets_matched),
                ("(iv)  nested levels   ", &s.nested_levels),
                ("(v)   stage deviation ", &s.stage_deviation),
            ];
            for (label, c) in rows {
                writeln!(
                    f,
                    "    {label} {}  {:.3e} vs {:.3e} ({} samples) — {}",
                    verdict(c.pass),
                    c.measured,
                    c.bound,
                    c.samples,
                    c.detail
                )?;
            }
        }
        let fc = &self.final_checks;
        writeln!(
            f,
            "  final: {}  residual {:.3e} (tol {:.1e}), roundtrip {:.3e} (tol {:.1e}), {} letters — {}",
            verdict(fc.pass),
            fc.max_residual,
            fc.residual_tol,
            fc.inverse_roundtrip,
            fc.roundtrip_tol,
            fc.total_letters,
            fc.detail
        )?;
        Ok(())
    }
}

/// Image norm of the trace point at parameter `t` under a stage word, with
/// overflow reading as "astronomically far outside".
fn trace_norm<R: Real>(word: &AutWord<R>, variety: &VarietyModel<R>, t: C<R>) -> R {
    match word.apply(&variety.param_point(t)) {
        Ok(w) => w.norm(),
        Err(_) => R::infinity(),
    }
}

/// What the verifier's own level sweep found.
struct LevelProbe<R: Real> {
    lambda: R,
    /// Worst bracket width left by the bisections.
    band: R,
    /// Smallest image norm observed just past a crossing — evidence that
    /// every ray genuinely exits the ball.
    exit_floor: R,
    /// A ray that never exited, if any (fails the dichotomy).
    trapped: Option<String>,
}

/// Re-derives the level radius with a ray fan and rim pass offset half a
/// cell from the construction's, mirroring its march-bisect-contract shape.
fn offset_level_probe<R: Real>(
    word: &AutWord<R>,
    variety: &VarietyModel<R>,
    r: R,
) -> LevelProbe<R> {
    let zero = C::new(R::zero(), R::zero());
    if trace_norm(word, variety, zero) > r {
        return LevelProbe {
            lambda: R::zero(),
            band: R::zero(),
            exit_floor: R::infinity(),
            trapped: None,
        };
    }

    let step = R::of(0.05).max(r * R::of(0.02));
    let t_cap = r * R::of(8.0) + R::of(16.0);
    let mut lambda = R::infinity();
    let mut band = R::zero();
    let mut exit_floor = R::infinity();

    for k in 0..RAYS {
        let angle = R::of((k as f64 + 0.5) / RAYS as f64 * std::f64::consts::TAU);
        let dir = C::new(angle.cos(), angle.sin());
        let mut lo = R::zero();
        let mut hi = None;
        let mut t = step;
        while t <= t_cap {
            if trace_norm(word, variety, dir * t) > r {
                hi = Some(t);
                break;
            }
            lo = t;
            t = t + step;
        }
        let Some(mut hi) = hi else {
            return LevelProbe {
                lambda: R::zero(),
                band: R::zero(),
                exit_floor: R::zero(),
                trapped: Some(format!(
                    "ray {k} stays inside radius {:.3} out to parameter {:.1}",
                    r.as_f64(),
                    t_cap.as_f64()
                )),
            };
        };
        for _ in 0..BISECT_ROUNDS {
            let mid = (lo + hi) * R::of(0.5);
            if trace_norm(word, variety, dir * mid) > r {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        exit_floor = exit_floor.min(trace_norm(word, variety, dir * hi));
        band = band.max(hi - lo);
        lambda = lambda.min(lo);
    }

    // Dense rim pass at the shared boundary density, angles offset half a
    // step: contract until the whole rim stays inside.
    let rim_inside = |s: R| {
        (0..DENSE_RIM).all(|i| {
            let a = R::of((i as f64 + 0.5) / DENSE_RIM as f64 * std::f64::consts::TAU);
            trace_norm(word, variety, C::new(a.cos(), a.sin()) * s) <= r
        })
    };
    if !rim_inside(lambda) {
        let mut lo = R::zero();
        let mut hi = lambda;
        for _ in 0..BISECT_ROUNDS {
            let mid = (lo + hi) * R::of(0.5);
            if rim_inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        band = band.max(hi - lo);
        lambda = lo;
    }

    LevelProbe {
        lambda,
        band,
        exit_floor,
        trapped: None,
    }
}

/// Offset polar lattice on the closed parameter disc of radius `lambda`:
/// rings at half-offset radii with staggered spokes, plus the dense rim.
/// Sized to stay above a thousand points even for small discs.
fn offset_polar_params<R: Real>(lambda: R, density: R) -> Vec<C<R>> {
    if !(lambda > R::zero()) {
        return Vec::new();
    }
    let tau = std::f64::consts::TAU;
    let rings = ((lambda * density).as_f64().ceil() as usize).max(9);
    let spokes = ((lambda * density).as_f64() * tau).ceil().max(128.0) as usize;
    let mut out = Vec::with_capacity(rings * spokes + DENSE_RIM);
    for i in 0..rings {
        let rr = lambda * R::of((i as f64 + 0.5) / rings as f64);
        let stagger = 0.25 + 0.5 * ((i % 2) as f64);
        for j in 0..spokes {
            let th = R::of((j as f64 + stagger) / spokes as f64 * tau);
            out.push(C::new(th.cos(), th.sin()) * rr);
        }
    }
    for i in 0..DENSE_RIM {
        let th = R::of((i as f64 + 0.5) / DENSE_RIM as f64 * tau);
        out.push(C::new(th.cos(), th.sin()) * lambda);
    }
    out
}

/// Sphere grid rotated by half an angular cell (a diagonal unitary), so the
/// verifier never lands on the construction's own sphere samples.
fn offset_sphere<R: Real>(ball: &Ball<R>, density: R) -> Vec<CPoint<R>> {
    let spacing = sphere_spacing_for(ball.dim(), ball.radius, density, SPHERE_MIN, SPHERE_MAX);
    let half = spacing / (ball.radius * R::of(2.0));
    let rot = C::new(half.cos(), half.sin());
    sphere_grid(ball, spacing)
        .into_iter()
        .map(|p| {
            let coords = p
                .coords
                .iter()
                .zip(&ball.center.coords)
                .map(|(z, c)| c + (z - c) * rot)
                .collect();
            CPoint::new(coords)
        })
        .collect()
}

/// Re-measures every stage condition and the whole-run residuals.  `radii`
/// is the ball schedule the word file carries; `seed` drives the roundtrip
/// point draw; `solve_ms` is recorded verbatim when the caller timed the
/// solve.
pub fn verify<R: Real>(
    problem: &InterpolationProblem<R>,
    word: &AutWord<R>,
    radii: &[R],
    seed: u64,
    solve_ms: Option<u64>,
) -> VerificationReport {
    let started = Instant::now();
    let n = problem.variety.ambient_dim();
    let pairs = problem.sources.len();
    let mut setup = Vec::new();

    if word.dim() != n {
        setup.push(format!(
            "word acts on C^{}, problem lives in C^{n}",
            word.dim()
        ));
    }
    if word.stage_count() != problem.k_max {
        setup.push(format!(
            "word has {} stages, problem asks for {}",
            word.stage_count(),
            problem.k_max
        ));
    }
    if radii.len() != problem.k_max + 1 {
        setup.push(format!(
            "schedule lists {} radii, expected {}",
            radii.len(),
            problem.k_max + 1
        ));
    } else {
        let close = |a: R, b: R| (a - b).abs() <= R::of(1e-12) * (R::one() + b.abs());
        if !close(radii[0], problem.r1) || !close(radii[1], problem.r2) {
            setup.push("schedule radii disagree with the problem's r1/r2".into());
        }
    }
    let defect = word.worst_frame_defect();
    if defect > R::of(1e-9) {
        setup.push(format!(
            "a letter frame is not unitary (defect {:.3e})",
            defect.as_f64()
        ));
    }
    if !setup.is_empty() {
        return VerificationReport {
            format_version: FORMAT_VERSION,
            pass: false,
            setup_errors: setup,
            stages: Vec::new(),
            final_checks: FinalChecks {
                pass: false,
                max_residual: f64::MAX,
                residual_tol: RESIDUAL_TOL,
                matched: 0,
                pairs,
                inverse_roundtrip: f64::MAX,
                roundtrip_tol: 0.0,
                total_letters: word.len(),
                solve_ms,
                verify_ms: started.elapsed().as_millis() as u64,
                detail: "not measured: setup mismatch".into(),
            },
        };
    }

    let variety = &problem.variety;
    let density = problem.grid_density;
    let match_tol = R::of(MATCH_TOL);
    let params: Vec<C<R>> = problem.sources.iter().map(|a| variety.param_of(a)).collect();

    let mut stages = Vec::with_capacity(problem.k_max);
    let mut lambda_prev = R::zero();
    let mut matched_prev = vec![false; pairs];
    for k in 1..=problem.k_max {
        let wk = word.truncated_to_stage(k);
        let r_k = radii[k - 1];
        let r_next = radii[k];
        let probe = offset_level_probe(&wk, variety, r_next);
        let lambda = probe.lambda;

        // Which pairs has Φ_k already matched?  Decided from residuals, not
        // from anyone's logs.
        let residuals: Vec<R> = (0..pairs)
            .map(|j| match wk.apply(&problem.sources[j]) {
                Ok(w) => w.dist(&problem.targets[j]),
                Err(_) => R::infinity(),
            })
            .collect();
        let matched_now: Vec<bool> = residuals.iter().map(|&d| d <= match_tol).collect();

        // (i) Level dichotomy: a volumetric offset grid over the level disc
        // must land inside the next ball, and every sweep ray must have
        // genuinely exited it.
        let level_dichotomy = {
            let in_bound = r_next * R::of(1.0 + 1e-9) + R::of(MEMBERSHIP_TOL);
            if let Some(why) = &probe.trapped {
                ConditionCheck {
                    pass: false,
                    measured: f64::MAX,
                    bound: in_bound.as_f64(),
                    samples: 0,
                    detail: why.clone(),
                }
            } else {
                let grid = offset_polar_params(lambda, density);
                let mut sup = R::zero();
                for &t in &grid {
                    sup = sup.max(trace_norm(&wk, variety, t));
                }
                let inside_ok = sup <= in_bound;
                let exits_ok = probe.exit_floor > r_next;
                ConditionCheck {
                    pass: inside_ok && exits_ok,
                    measured: sup.as_f64(),
                    bound: in_bound.as_f64(),
                    samples: grid.len(),
                    detail: format!(
                        "level disc {:.4} (band {:.1e}); rim exits reach {:.3} past ball {:.3}",
                        lambda.as_f64(),
                        probe.band.as_f64(),
                        probe.exit_floor.as_f64().min(1e300),
                        r_next.as_f64()
                    ),
                }
            }
        };

        // (ii) Matched residuals on the level disc: every source whose
        // parameter the disc covers must sit on its target.
        let matched_residuals = {
            let mut worst = R::zero();
            let mut on_level = 0usize;
            for j in 0..pairs {
                if params[j].norm() <= lambda {
                    on_level += 1;
                    worst = worst.max(residuals[j]);
                }
            }
            ConditionCheck {
                pass: worst <= match_tol,
                measured: worst.as_f64(),
                bound: MATCH_TOL,
                samples: on_level,
                detail: format!("{on_level} source parameters on the level disc"),
            }
        };

        // (iii) Covered targets are matched, and matching never regresses.
        let covered_targets_matched = {
            let mut violations = 0usize;
            let mut clearance = f64::MAX;
            let piece = GraphPiece {
                model: variety.clone(),
                disc: Disc::centered(lambda),
                word: wk.clone(),
            };
            let mut notes: Vec<String> = Vec::new();
            for j in 0..pairs {
                if matched_prev[j] && !matched_now[j] {
                    violations += 1;
                    notes.push(format!("pair {j} regressed after being matched"));
                    continue;
                }
                if matched_now[j] {
                    continue;
                }
                let b = &problem.targets[j];
                let ball_margin = (b.norm() - r_k).as_f64();
                if ball_margin <= MEMBERSHIP_TOL {
                    violations += 1;
                    notes.push(format!("unmatched target {j} inside the current ball"));
                    continue;
                }
                let trace_margin = if lambda > R::zero() {
                    let (t_star, d) = piece.closest_param(b);
                    if t_star.norm() <= lambda * R::of(1.0 + 1e-9) && d <= R::of(TRACE_TOL) {
                        violations += 1;
                        notes.push(format!("unmatched target {j} lies on the covered trace"));
                    }
                    d.as_f64()
                } else {
                    f64::MAX
                };
                clearance = clearance.min(ball_margin.min(trace_margin));
            }
            let detail = if violations == 0 {
                if clearance == f64::MAX {
                    "every target matched".into()
                } else {
                    format!(
                        "unmatched targets clear the covered set by at least {:.3}",
                        clearance
                    )
                }
            } else {
                notes.join("; ")
            };
            ConditionCheck {
                pass: violations == 0,
                measured: violations as f64,
                bound: 0.0,
                samples: pairs,
                detail,
            }
        };

        // (iv) Nesting and growth: level radii strictly increase and stay
        // ahead of the exhaustion; ball radii grow by more than one.
        let nested_levels = {
            let gap = r_next - r_k;
            let gap_ok = gap > R::one();
            let (measured, level_ok, detail) = if k == 1 {
                (
                    lambda.as_f64(),
                    true,
                    format!("first level; ball gap {:.3}", gap.as_f64()),
                )
            } else {
                let kk = R::of(KK_BASE) * R::of((k - 1) as f64);
                let margin = (lambda - lambda_prev).min(lambda - kk);
                (
                    margin.as_f64(),
                    margin > R::zero(),
                    format!(
                        "level {:.4} over previous {:.4} and exhaustion {:.3}; ball gap {:.3}",
                        lambda.as_f64(),
                        lambda_prev.as_f64(),
                        kk.as_f64(),
                        gap.as_f64()
                    ),
                )
            };
            ConditionCheck {
                pass: level_ok && gap_ok,
                measured,
                bound: 0.0,
                samples: 0,
                detail,
            }
        };

        // (v) Stage deviation on the previous ball and level piece, at the
        // half-cell offset.
        let stage_deviation = if k == 1 {
            ConditionCheck::vacuous("first stage has no predecessor")
        } else {
            let bound = problem.epsilon * R::of(0.5).powi(k as i32);
            let w_prev = word.truncated_to_stage(k - 1);
            let b_prev = Ball::centered(n, radii[k - 2]);
            let mut samples: Vec<CPoint<R>> = offset_sphere(&b_prev, density);
            samples.push(b_prev.center.clone());
            for t in offset_polar_params(lambda_prev, density) {
                samples.push(variety.param_point(t));
            }
            let count = samples.len();
            let mut sup = R::zero();
            let mut blown = None;
            for z in &samples {
                match (wk.apply(z), w_prev.apply(z)) {
                    (Ok(a), Ok(b)) => sup = sup.max(a.dist(&b)),
                    _ => {
                        blown = Some(format!("a protected sample at {z} overflowed"));
                        break;
                    }
                }
            }
            match blown {
                Some(why) => ConditionCheck {
                    pass: false,
                    measured: f64::MAX,
                    bound: bound.as_f64(),
                    samples: count,
                    detail: why,
                },
                None => ConditionCheck {
                    pass: sup < bound,
                    measured: sup.as_f64(),
                    bound: bound.as_f64(),
                    samples: count,
                    detail: format!(
                        "previous ball {:.3} plus level piece {:.4}",
                        b_prev.radius.as_f64(),
                        lambda_prev.as_f64()
                    ),
                },
            }
        };

        stages.push(StageVerification {
            stage: k,
            ball_radius: r_k.as_f64(),
            next_radius: r_next.as_f64(),
            level_radius: lambda.as_f64(),
            word_len: wk.len(),
            matched_count: matched_now.iter().filter(|&&m| m).count(),
            level_dichotomy,
            matched_residuals,
            covered_targets_matched,
            nested_levels,
            stage_deviation,
        });
        lambda_prev = lambda;
        matched_prev = matched_now;
    }

    // Whole-run checks: final residuals, coverage of the final ball, and
    // exact invertibility over seeded interior points.
    let r_final = radii[problem.k_max];
    let mut max_residual = R::zero();
    let mut matched = 0usize;
    let mut stranded = 0usize;
    for j in 0..pairs {
        if matched_prev[j] {
            matched += 1;
            if let Ok(w) = word.apply(&problem.sources[j]) {
                max_residual = max_residual.max(w.dist(&problem.targets[j]));
            }
        } else if problem.targets[j].norm() <= r_final {
            stranded += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0f0e_0d0c_5eed_cafe);
    let mut roundtrip = R::zero();
    for _ in 0..ROUNDTRIP_POINTS {
        // Uniform in the final ball: gaussian direction, radius by the
        // volume rule u^(1/2n).
        let mut z = CPoint::zero(n);
        let mut norm2 = 0.0;
        for c in z.coords.iter_mut() {
            let (g1, g2) = gaussian_pair(&mut rng);
            *c = C::new(R::of(g1), R::of(g2));
            norm2 += g1 * g1 + g2 * g2;
        }
        let u: f64 = rng.gen::<f64>();
        let scale = r_final * R::of(u.powf(1.0 / (2.0 * n as f64)) / norm2.sqrt().max(1e-300));
        let z = z.scale_re(scale);
        if let (Ok(fwd), true) = (word.apply(&z), true) {
            if let Ok(back) = word.apply_inverse(&fwd) {
                roundtrip = roundtrip.max(back.dist(&z));
            } else {
                roundtrip = R::infinity();
            }
        } else {
            roundtrip = R::infinity();
        }
    }
    let roundtrip_tol = word.len() as f64 * 1e-12;

    let residual_ok = max_residual.as_f64() <= RESIDUAL_TOL;
    let roundtrip_ok = roundtrip.as_f64() <= roundtrip_tol || word.is_empty();
    let final_checks = FinalChecks {
        pass: residual_ok && roundtrip_ok && stranded == 0,
        max_residual: max_residual.as_f64(),
        residual_tol: RESIDUAL_TOL,
        matched,
        pairs,
        inverse_roundtrip: roundtrip.as_f64(),
        roundtrip_tol,
        total_letters: word.len(),
        solve_ms,
        verify_ms: started.elapsed().as_millis() as u64,
        detail: if stranded == 0 {
            format!("{ROUNDTRIP_POINTS} roundtrip points in ball {:.2}", r_final.as_f64())
        } else {
            format!("{stranded} unmatched targets inside the final ball")
        },
    };

    let pass = stages.iter().all(|s| s.pass()) && final_checks.pass;
    VerificationReport {
        format_version: FORMAT_VERSION,
        pass,
        setup_errors: setup,
        stages,
        final_checks,
    }
}

/// One Box–Muller draw.
fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = std::f64::consts::TAU * u2;
    (r * th.cos(), r * th.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_interpolation;

    fn small_problem() -> InterpolationProblem<f64> {
        InterpolationProblem {
            variety: VarietyModel::coordinate_axis(2),
            sources: vec![CPoint::from_f64_pairs(&[(1.0, 0.0), (0.0, 0.0)])],
            targets: vec![CPoint::from_f64_pairs(&[(0.3, 0.0), (1.4, 0.0)])],
            epsilon: 0.5,
            k_max: 2,
            r1: 1.0,
            r2: 2.3,
            grid_density: 4.0,
        }
    }

    #[test]
    fn clean_run_verifies() {
        let problem = small_problem();
        let run = run_interpolation(&problem).unwrap();
        let report = verify(&problem, &run.word, &run.radii, 42, Some(10));
        assert!(report.pass, "report:\n{report}");
        assert_eq!(report.stages.len(), 2);
        assert!(report.setup_errors.is_empty());
        assert_eq!(report.final_checks.matched, 1);
        assert!(report.final_checks.max_residual <= RESIDUAL_TOL);
        assert!(report.stages[0].level_dichotomy.samples >= 1000);
        // Machine form parses back to the same verdict.
        let parsed: VerificationReport =
            serde_json::from_str(&report.to_json_string()).unwrap();
        assert!(parsed.pass);
        assert_eq!(parsed.final_checks.solve_ms, Some(10));
    }

    #[test]
    fn deleting_a_letter_fails_the_report() {
        let problem = small_problem();
        let run = run_interpolation(&problem).unwrap();
        let full = &run.word;
        assert!(full.len() >= 2);
        // Rebuild the word without its final letter, clamping stage ends.
        let mut corrupted = AutWord::identity(full.dim());
        for l in &full.letters()[..full.len() - 1] {
            corrupted.push(l.clone());
        }
        let kept = full.len() - 1;
        let stages: Vec<_> = full
            .stages()
            .iter()
            .map(|r| r.start.min(kept)..r.end.min(kept))
            .collect();
        let corrupted = corrupted.with_stages(stages);
        let report = verify(&problem, &corrupted, &run.radii, 42, None);
        assert!(!report.pass, "corrupted word must not verify:\n{report}");
        let hit = report.stages.iter().any(|s| {
            !s.matched_residuals.pass
                || !s.stage_deviation.pass
                || !s.covered_targets_matched.pass
        }) || !report.final_checks.pass;
        assert!(hit, "failure should land on a condition:\n{report}");
    }

    #[test]
    fn schedule_mismatch_is_a_setup_error() {
        let problem = small_problem();
        let run = run_interpolation(&problem).unwrap();
        let report = verify(&problem, &run.word, &run.radii[..2], 42, None);
        assert!(!report.pass);
        assert!(!report.setup_errors.is_empty());
        assert!(report.stages.is_empty());
    }

    #[test]
    fn offset_sphere_stays_on_the_sphere() {
        let ball: Ball<f64> = Ball::centered(2, 3.0);
        let pts = offset_sphere(&ball, 4.0);
        assert!(pts.len() >= SPHERE_MIN / 2);
        for p in &pts {
            assert!((p.norm() - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn polar_grid_is_dense_enough_and_inside() {
        let pts = offset_polar_params::<f64>(0.6, 4.0);
        assert!(pts.len() >= 1000, "{} samples", pts.len());
        for t in &pts {
            assert!(t.norm() <= 0.6 + 1e-12);
        }
        assert!(offset_polar_params::<f64>(0.0, 4.0).is_empty());
    }
}
