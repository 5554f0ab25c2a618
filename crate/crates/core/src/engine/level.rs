//! Level pieces: the part of the variety trace a word keeps inside a ball.
//!
//! `level_set` finds the largest centred parameter disc whose trace image
//! stays in the given ball, by marching rays outward until the image norm
//! crosses the ball radius and then bisecting the crossing.  The returned
//! radius is the conservative (inner) end of the bracket, so the piece it
//! describes genuinely maps inside.

use crate::automorphism::AutWord;
use crate::geometry::{Ball, Disc, GraphPiece, VarietyModel};
use crate::scalar::{Real, C};

use super::EngineError;

/// Number of rays swept through the parameter plane.  Damped stage letters
/// leave angularly narrow spikes in the trace norm near their anchor
/// directions; a coarse fan steps over them and overestimates the level
/// radius, which then poisons every layer sized from it.
const RAYS: usize = 192;
/// Sample count for the dense rim pass; matches the boundary density used by
/// the reach and layer evaluators so they never see past this sweep.
const DENSE_RIM: usize = 1024;
/// Bisection rounds per ray; brings the bracket down to ~1e-12 relative.
const BISECT_ROUNDS: usize = 48;

/// A centred parameter disc together with the graph piece it cuts out of the
/// current trace, and the residual bracket width of the boundary crossing.
#[derive(Clone, Debug)]
pub struct LevelPiece<R: Real> {
    pub piece: GraphPiece<R>,
    pub radius: R,
    /// Worst bracket width left by the bisection, relative to `radius`.
    pub band: R,
}

/// Image norm of the trace point at parameter `t`, with overflow reading as
/// "astronomically far outside".
fn trace_norm<R: Real>(word: &AutWord<R>, variety: &VarietyModel<R>, t: C<R>) -> R {
    let z = variety.param_point(t);
    match word.apply(&z) {
        Ok(w) => w.norm(),
        Err(_) => R::infinity(),
    }
}

/// Largest centred parameter disc whose trace image under `word` lies inside
/// `ball`, found by ray marching plus bisection.  Fails when a ray never
/// exits (the trace would have to stay bounded, which a polynomial word over
/// an unbounded curve cannot do) or when the crossing bracket stays wider
/// than a tenth of the radius it brackets.
pub fn level_set<R: Real>(
    word: &AutWord<R>,
    variety: &VarietyModel<R>,
    ball: &Ball<R>,
) -> Result<LevelPiece<R>, EngineError> {
    let r = ball.radius;
    let coarse = |detail: String| EngineError::ResolutionTooCoarse { detail };

    if trace_norm(word, variety, C::new(R::zero(), R::zero())) > r {
        // Already outside at the parameter origin: the level disc is empty.
        return Ok(LevelPiece {
            piece: GraphPiece {
                model: variety.clone(),
                disc: Disc::centered(R::zero()),
                word: word.clone(),
            },
            radius: R::zero(),
            band: R::zero(),
        });
    }

    let step = R::of(0.05).max(r * R::of(0.02));
    let t_cap = r * R::of(8.0) + R::of(16.0);
    let mut lambda = R::infinity();
    let mut worst_band = R::zero();

    for k in 0..RAYS {
        let angle = R::of(k as f64 / RAYS as f64 * std::f64::consts::TAU);
        let dir = C::new(angle.cos(), angle.sin());

        // March outward until the image norm first crosses the ball radius.
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
        let mut hi = hi.ok_or_else(|| {
            coarse(format!(
                "trace stays inside radius {:.3} out to parameter {:.1}",
                r.as_f64(),
                t_cap.as_f64()
            ))
        })?;

        for _ in 0..BISECT_ROUNDS {
            let mid = (lo + hi) * R::of(0.5);
            if trace_norm(word, variety, dir * mid) > r {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        worst_band = worst_band.max(hi - lo);
        lambda = lambda.min(lo);
    }

    // Dense angular pass: the ray fan can still straddle a spike narrower
    // than its spacing, so contract the radius until a rim sampled at the
    // same density the downstream evaluators use stays inside the ball.
    let rim_inside = |s: R| {
        Disc::centered(s)
            .boundary_points(DENSE_RIM)
            .into_iter()
            .all(|t| trace_norm(word, variety, t) <= r)
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
        worst_band = worst_band.max(hi - lo);
        lambda = lo;
    }

    let band = worst_band / lambda.max(R::of(1e-9));
    if band > R::of(0.1) {
        return Err(coarse(format!(
            "crossing bracket {:.3e} exceeds a tenth of the level radius {:.3e}",
            worst_band.as_f64(),
            lambda.as_f64()
        )));
    }
    Ok(LevelPiece {
        piece: GraphPiece {
            model: variety.clone(),
            disc: Disc::centered(lambda),
            word: word.clone(),
        },
        radius: lambda,
        band,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CPoint;

    fn axis() -> VarietyModel<f64> {
        VarietyModel::coordinate_axis(2)
    }

    #[test]
    fn identity_level_of_axis_is_the_radius() {
        let word = AutWord::identity(2);
        let lv = level_set(&word, &axis(), &Ball::centered(2, 3.0)).unwrap();
        assert!(lv.radius <= 3.0 + 1e-9, "conservative side: {}", lv.radius);
        assert!(lv.radius > 2.999, "crossing is sharp: {}", lv.radius);
        assert!(lv.band < 1e-9);
        // Every piece parameter maps inside the ball.
        for t in lv.piece.disc.boundary_points(64) {
            let img = lv.piece.at(t);
            assert!(img.norm() <= 3.0 + 1e-9);
        }
    }

    #[test]
    fn empty_piece_when_centre_is_already_outside() {
        // Shift the curve so even the parameter origin lands outside the ball.
        let model = VarietyModel::AffineSubspace {
            base: CPoint::from_f64_pairs(&[(9.0, 0.0), (0.0, 0.0)]),
            basis: vec![CPoint::from_f64_pairs(&[(1.0, 0.0), (0.0, 0.0)])],
        };
        let lv = level_set(&AutWord::identity(2), &model, &Ball::centered(2, 2.0)).unwrap();
        assert_eq!(lv.radius, 0.0);
    }

    #[test]
    fn level_grows_strictly_with_the_ball() {
        let word = AutWord::identity(2);
        let a = level_set(&word, &axis(), &Ball::centered(2, 3.0)).unwrap();
        let b = level_set(&word, &axis(), &Ball::centered(2, 4.5)).unwrap();
        assert!(b.radius > a.radius + 1.0);
    }
}
