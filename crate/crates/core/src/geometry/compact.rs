//! Compact sets with a polynomial-convexity certificate.
//!
//! The moving lemma needs its region to be polynomially convex, and we only
//! ever feed it sets for which convexity is structural rather than checked:
//! closed balls, graphs of holomorphic maps over closed discs, images of such
//! graphs under automorphism words (polynomial convexity is preserved by
//! polynomial automorphisms with polynomial inverse, which every word has),
//! and the union of a ball with a graph piece that contains the trace of its
//! variety through the ball. That last pattern is the one nontrivial
//! certificate and is verified numerically here: the piece must continue out
//! of the ball with clearance, and the exterior part of the trace must not
//! dip back inside.

use super::ball::Ball;
use super::disc::Disc;
use super::grids::{ball_grid, disc_grid, sphere_grid};
use super::point::CPoint;
use super::variety::VarietyModel;
use super::GeometryError;
use crate::automorphism::AutWord;
use crate::scalar::{Real, C};
use num_complex::Complex;

/// A graph piece: the part of a variety over a closed parameter disc, pushed
/// through an automorphism word (identity word = the raw graph).
#[derive(Clone, Debug)]
pub struct GraphPiece<R: Real> {
    pub model: VarietyModel<R>,
    pub disc: Disc<R>,
    pub word: AutWord<R>,
}

impl<R: Real> GraphPiece<R> {
    pub fn raw(model: VarietyModel<R>, disc: Disc<R>) -> Self {
        let dim = model.ambient_dim();
        GraphPiece {
            model,
            disc,
            word: AutWord::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.model.ambient_dim()
    }

    /// Image of parameter `t`. Panics on numeric overflow: pieces are always
    /// built over regions where the word is controlled, so overflow here is a
    /// logic error, not a data condition.
    pub fn at(&self, t: C<R>) -> CPoint<R> {
        let z = self.model.param_point(t);
        self.word
            .apply(&z)
            .expect("graph piece evaluated where its word overflows")
    }

    /// Images of `n` parameter-boundary points.
    pub fn boundary_images(&self, n: usize) -> Vec<CPoint<R>> {
        self.disc.boundary_points(n).into_iter().map(|t| self.at(t)).collect()
    }

    /// Distance from `piece(t)` to `z`, with overflow reading as
    /// "astronomically far": the search below may probe parameters far
    /// outside the word's controlled zone.
    fn probe_dist(&self, t: C<R>, z: &CPoint<R>) -> R {
        match self.word.apply(&self.model.param_point(t)) {
            Ok(w) => w.dist(z),
            Err(_) => R::infinity(),
        }
    }

    /// Parameter in the closed disc minimizing `|piece(t) - z|`, found by a
    /// deterministic nested grid search. Returns `(t, distance)`.
    pub fn closest_param(&self, z: &CPoint<R>) -> (C<R>, R) {
        let mut center = self.disc.center;
        let mut half = self.disc.radius;
        let mut best_t = center;
        let mut best_d = self.probe_dist(center, z);
        for _round in 0..7 {
            let grid = 12i64;
            for i in -grid..=grid {
                for j in -grid..=grid {
                    let t0 = center
                        + Complex::new(
                            half * R::of(i as f64) / R::of(grid as f64),
                            half * R::of(j as f64) / R::of(grid as f64),
                        );
                    // clamp into the disc
                    let off = t0 - self.disc.center;
                    let t = if off.norm() > self.disc.radius {
                        self.disc.center
                            + off * Complex::new(self.disc.radius / off.norm(), R::zero())
                    } else {
                        t0
                    };
                    let d = self.probe_dist(t, z);
                    if d < best_d {
                        best_d = d;
                        best_t = t;
                    }
                }
            }
            center = best_t;
            half = half * R::of(0.35);
        }
        (best_t, best_d)
    }
}

#[derive(Clone, Debug)]
pub enum Atom<R: Real> {
    Ball(Ball<R>),
    Piece(GraphPiece<R>),
}

impl<R: Real> Atom<R> {
    pub fn dim(&self) -> usize {
        match self {
            Atom::Ball(b) => b.dim(),
            Atom::Piece(p) => p.dim(),
        }
    }
}

/// Why the set is polynomially convex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// A single closed ball.
    SingleBall,
    /// Graph of a holomorphic map over a closed disc.
    GraphOverDisc,
    /// Image of a certified set under an automorphism word.
    AutomorphicImage,
    /// Ball together with a graph piece containing the variety trace through
    /// the ball; checked numerically at construction.
    BallUnionPiece,
}

/// A compact set given as a union of atoms, together with the structural
/// reason it is polynomially convex.
#[derive(Clone, Debug)]
pub struct CertifiedCompact<R: Real> {
    atoms: Vec<Atom<R>>,
    certificate: Certificate,
}

impl<R: Real> CertifiedCompact<R> {
    pub fn from_ball(ball: Ball<R>) -> Self {
        CertifiedCompact {
            atoms: vec![Atom::Ball(ball)],
            certificate: Certificate::SingleBall,
        }
    }

    pub fn from_piece(piece: GraphPiece<R>) -> Self {
        let certificate = if piece.word.is_empty() {
            Certificate::GraphOverDisc
        } else {
            Certificate::AutomorphicImage
        };
        CertifiedCompact {
            atoms: vec![Atom::Piece(piece)],
            certificate,
        }
    }

    pub fn atoms(&self) -> &[Atom<R>] {
        &self.atoms
    }

    pub fn certificate(&self) -> Certificate {
        self.certificate
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].dim()
    }

    /// Distance from `z` to the set (0 inside).
    pub fn dist(&self, z: &CPoint<R>) -> R {
        let mut best = R::infinity();
        for atom in &self.atoms {
            let d = match atom {
                Atom::Ball(b) => b.signed_dist(z).max(R::zero()),
                Atom::Piece(p) => p.closest_param(z).1,
            };
            best = best.min(d);
        }
        best
    }

    pub fn contains(&self, z: &CPoint<R>, tol: R) -> bool {
        self.dist(z) <= tol
    }

    /// `max |z - center|` over the set, by boundary sampling (moduli of
    /// holomorphic maps peak on parameter boundaries, so circles and spheres
    /// suffice). The returned value includes a slack of one consecutive
    /// sample gap to absorb discretization.  A piece whose rim overflows
    /// reads as infinite reach; callers treat that as "the set escapes".
    pub fn max_dist_to(&self, center: &CPoint<R>) -> R {
        let mut worst = R::zero();
        for atom in &self.atoms {
            let reach = match atom {
                Atom::Ball(b) => b.center.dist(center) + b.radius,
                Atom::Piece(p) => {
                    let dists: Vec<R> = p
                        .disc
                        .boundary_points(1024)
                        .into_iter()
                        .map(|t| p.probe_dist(t, center))
                        .collect();
                    if dists.iter().any(|d| !d.is_finite()) {
                        return R::infinity();
                    }
                    sampled_peak_of(&dists)
                }
            };
            worst = worst.max(reach);
        }
        worst
    }

    /// Smallest reported ball around a natural center containing the set,
    /// inflated by `margin`. The center is the mean of atom anchor points
    /// (ball centers, disc-center images).
    pub fn circumscribed_ball(&self, margin: R) -> Ball<R> {
        let n = self.dim();
        let mut center = CPoint::zero(n);
        for atom in &self.atoms {
            let anchor = match atom {
                Atom::Ball(b) => b.center.clone(),
                Atom::Piece(p) => p.at(p.disc.center),
            };
            center = center.add(&anchor);
        }
        let center = center.scale_re(R::one() / R::of(self.atoms.len() as f64));
        let radius = self.max_dist_to(&center) + margin;
        Ball::new(center, radius)
    }

    /// Volumetric/parametric sample grid at the given density (spacing
    /// `1/density`): lattice fill for balls, parameter-disc lattice mapped
    /// through the graph (and word) for pieces.
    pub fn sample_grid(&self, density: R) -> Vec<CPoint<R>> {
        let s = R::one() / density;
        let mut out = Vec::new();
        for atom in &self.atoms {
            match atom {
                Atom::Ball(b) => out.extend(ball_grid(b, s)),
                Atom::Piece(p) => {
                    out.extend(disc_grid(&p.disc, s).into_iter().map(|t| p.at(t)))
                }
            }
        }
        out
    }

    /// Samples adequate for estimating `sup |f|` over the set when `f` is a
    /// difference of holomorphic maps: sphere grids for balls (plus center),
    /// parameter-boundary circles for pieces (plus disc center image).
    pub fn envelope_samples(&self, spacing: R) -> Vec<CPoint<R>> {
        let mut out = Vec::new();
        for atom in &self.atoms {
            match atom {
                Atom::Ball(b) => {
                    out.extend(sphere_grid(b, spacing));
                    out.push(b.center.clone());
                }
                Atom::Piece(p) => {
                    let n = circle_count(p.disc.radius, spacing);
                    out.extend(p.boundary_images(n));
                    out.push(p.at(p.disc.center));
                }
            }
        }
        out
    }

    /// Covering disc for the image of the set under the unit functional
    /// `z -> <z, u>`. Balls project to discs of equal radius exactly; pieces
    /// are covered from boundary samples with one-gap slack.
    pub fn projection_disc(&self, u: &CPoint<R>) -> Disc<R> {
        let mut discs: Vec<Disc<R>> = Vec::with_capacity(self.atoms.len());
        for atom in &self.atoms {
            match atom {
                Atom::Ball(b) => discs.push(b.project(u)),
                Atom::Piece(p) => {
                    let mut vals: Vec<C<R>> = Vec::with_capacity(1024);
                    for t in p.disc.boundary_points(1024) {
                        match p.word.apply(&p.model.param_point(t)) {
                            Ok(q) => vals.push(q.inner(u)),
                            // An escaping rim projects nowhere useful; report
                            // an unusable disc and let the caller reject the
                            // functional.
                            Err(_) => {
                                return Disc::new(
                                    C::new(R::zero(), R::zero()),
                                    R::infinity(),
                                )
                            }
                        }
                    }
                    discs.push(cover_disc(&vals));
                }
            }
        }
        Disc::hull_all(&discs)
    }

    /// Ball ∪ piece with the containment certificate and no extra clearance
    /// demanded of the trace; see [`Self::union_certified_with_clearance`].
    pub fn union_certified(ball: Ball<R>, piece: GraphPiece<R>) -> Result<Self, GeometryError> {
        Self::union_certified_with_clearance(ball, piece, R::zero())
    }

    /// Ball ∪ piece with the containment certificate: every variety-trace
    /// point inside the ball must already lie on the piece, which we check by
    /// sweeping the trace outside the parameter disc and demanding it stays
    /// outside the ball by `clearance`, having first checked that the piece
    /// boundary itself clears the ball.
    pub fn union_certified_with_clearance(
        ball: Ball<R>,
        piece: GraphPiece<R>,
        clearance: R,
    ) -> Result<Self, GeometryError> {
        Self::union_certified_multi(ball, vec![piece], clearance)
    }

    /// Ball ∪ pieces, the several-patch form of the containment certificate.
    /// The first piece is the main parameter disc; the rest are small patches
    /// around parameters whose images dip inside the ball (already-matched
    /// points of the staged construction). All pieces must share one word and
    /// model, supplied by the caller. The trace is swept outside the union of
    /// the parameter discs and must clear the ball by `clearance`; each patch
    /// rim must do the same.
    pub fn union_certified_multi(
        ball: Ball<R>,
        pieces: Vec<GraphPiece<R>>,
        clearance: R,
    ) -> Result<Self, GeometryError> {
        if pieces.is_empty() {
            return Ok(Self::from_ball(ball));
        }
        for piece in &pieces {
            if ball.dim() != piece.dim() {
                return Err(GeometryError::UncertifiablePattern {
                    reason: format!(
                        "dimension mismatch: ball in C^{}, piece in C^{}",
                        ball.dim(),
                        piece.dim()
                    ),
                });
            }
            // (1) Each parameter boundary must map outside the ball with
            // clearance: otherwise a piece stops inside and the union is a
            // ball with a whisker ending in it, which the certificate does
            // not cover. Overflow counts as astronomically far outside.
            let mut boundary_clear = R::infinity();
            for t in piece.disc.boundary_points(512) {
                let z = piece.model.param_point(t);
                if let Ok(img) = piece.word.apply(&z) {
                    boundary_clear = boundary_clear.min(ball.signed_dist(&img));
                }
            }
            if boundary_clear < clearance {
                return Err(GeometryError::UncertifiablePattern {
                    reason: format!(
                        "piece boundary (disc at {}) enters the ball neighborhood \
                         (clearance {:.3e} < {:.3e})",
                        piece.disc.center,
                        boundary_clear.as_f64(),
                        clearance.as_f64()
                    ),
                });
            }
        }
        // (2) The trace outside all parameter discs must never re-enter the
        // ball: sweep circles of growing radius around the main disc until
        // the trace clears the ball decisively three circles in a row,
        // skipping parameters covered by one of the declared discs.
        let main = &pieces[0];
        let far = pieces
            .iter()
            .map(|p| (p.disc.center - main.disc.center).norm() + p.disc.radius)
            .fold(R::zero(), |a, b| a.max(b));
        let mut rho = main.disc.radius;
        let rho_max = far.max(R::one()) * R::of(64.0);
        let mut clear_streak = 0u32;
        while rho <= rho_max {
            let circle = Disc::new(main.disc.center, rho);
            let mut min_sd = R::infinity();
            for t in circle.boundary_points(192) {
                if pieces
                    .iter()
                    .any(|p| (t - p.disc.center).norm() < p.disc.radius)
                {
                    continue;
                }
                let z = main.model.param_point(t);
                let img = match main.word.apply(&z) {
                    Ok(w) => w,
                    // Overflow means the trace is astronomically far from the
                    // ball, which is exactly the "stays outside" conclusion.
                    Err(_) => continue,
                };
                min_sd = min_sd.min(ball.signed_dist(&img));
            }
            if min_sd < clearance {
                return Err(GeometryError::UncertifiablePattern {
                    reason: format!(
                        "variety trace re-enters the ball at parameter radius {:.4} \
                         (signed distance {:.3e})",
                        rho.as_f64(),
                        min_sd.as_f64()
                    ),
                });
            }
            if min_sd > R::one() && min_sd < R::infinity() {
                clear_streak += 1;
                if clear_streak >= 3 {
                    break;
                }
            } else if min_sd <= R::one() {
                clear_streak = 0;
            }
            rho = rho * R::of(1.3);
        }
        if clear_streak < 3 {
            return Err(GeometryError::UncertifiablePattern {
                reason: "variety trace never escapes the ball neighborhood decisively".into(),
            });
        }
        let mut atoms = vec![Atom::Ball(ball)];
        atoms.extend(pieces.into_iter().map(Atom::Piece));
        Ok(CertifiedCompact {
            atoms,
            certificate: Certificate::BallUnionPiece,
        })
    }

    /// General union assembly for callers that certify convexity by
    /// construction (the step region `phi(M) ∪ D0` pattern). The caller names
    /// the certificate; this constructor only checks dimensions agree.
    pub fn from_atoms(atoms: Vec<Atom<R>>, certificate: Certificate) -> Self {
        assert!(!atoms.is_empty());
        let d = atoms[0].dim();
        assert!(atoms.iter().all(|a| a.dim() == d));
        CertifiedCompact { atoms, certificate }
    }
}

fn sampled_peak_of<R: Real>(vals: &[R]) -> R {
    vals.iter().fold(R::zero(), |a, &b| a.max(b))
}

fn circle_count<R: Real>(radius: R, spacing: R) -> usize {
    let n = (R::of(std::f64::consts::TAU) * radius / spacing).as_f64().ceil() as usize;
    n.clamp(64, 16384)
}

/// Small covering disc for a finite point set in the plane: center at the
/// mean, radius = max distance plus one consecutive-gap slack.
fn cover_disc<R: Real>(vals: &[C<R>]) -> Disc<R> {
    assert!(!vals.is_empty());
    let n = R::of(vals.len() as f64);
    let mean = vals
        .iter()
        .fold(Complex::new(R::zero(), R::zero()), |a, b| a + b)
        / Complex::new(n, R::zero());
    let mut radius = R::zero();
    let mut gap = R::zero();
    for (k, v) in vals.iter().enumerate() {
        radius = radius.max((v - mean).norm());
        let w = vals[(k + 1) % vals.len()];
        gap = gap.max((w - v).norm());
    }
    // Half the worst consecutive gap absorbs the between-sample excursion of
    // a smooth curve without letting an oscillatory strand, whose neighbours
    // legitimately sit units apart, balloon the disc.
    Disc::new(mean, radius + gap * R::of(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::Poly;
    use crate::scalar::c64;

    fn parabola_piece() -> GraphPiece<f64> {
        let p = Poly::Dense {
            coeffs: vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)],
        };
        GraphPiece::raw(
            VarietyModel::GraphCurve { ambient_dim: 2, p },
            Disc::centered(1.0),
        )
    }

    #[test]
    fn circumscribed_ball_of_a_ball_adds_the_margin() {
        let k: CertifiedCompact<f64> = CertifiedCompact::from_ball(Ball::centered(2, 2.0));
        let b = k.circumscribed_ball(1.0);
        assert!(b.center.norm() < 1e-14);
        assert!((b.radius - 3.0).abs() < 1e-12);
    }

    #[test]
    fn circumscribed_ball_of_the_parabola_piece() {
        let k = CertifiedCompact::from_piece(parabola_piece());
        let b = k.circumscribed_ball(0.0);
        // Peak of |(t, t^2)| over |t| <= 1 is sqrt(2), attained on the rim;
        // the rim grid contains t = 1 so the sampled peak is exact.
        assert!(b.center.norm() < 1e-12);
        assert!((b.radius - 2f64.sqrt()).abs() < 1e-9, "radius {}", b.radius);
    }

    #[test]
    fn certified_union_and_its_hull() {
        let ball = Ball::centered(2, 2.0);
        let k = CertifiedCompact::union_certified(ball, parabola_piece());
        // The parabola trace through Ball(0,2) is NOT contained in the piece
        // over |t| <= 1 (the trace leaves the piece while still inside the
        // ball), so this must be rejected.
        assert!(k.is_err());

        // Over a bigger parameter disc the trace through the ball is covered.
        let p = Poly::Dense {
            coeffs: vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)],
        };
        let wide = GraphPiece::raw(
            VarietyModel::GraphCurve { ambient_dim: 2, p },
            Disc::centered(2.0),
        );
        let k =
            CertifiedCompact::union_certified_with_clearance(Ball::centered(2, 2.0), wide, 0.1)
                .unwrap();
        assert_eq!(k.certificate(), Certificate::BallUnionPiece);
        let hull = k.circumscribed_ball(0.5);
        // Piece peak over |t| <= 2: |(2, 4)| = sqrt(20) ~ 4.47 from center
        // mean of (0,0) and (0,0).
        assert!(hull.radius >= 2.0 + 0.5 - 1e-9);
        assert!(hull.contains(&CPoint::from_f64_pairs(&[(2.0, 0.0), (4.0, 0.0)]), 0.6));
    }

    #[test]
    fn sample_grid_of_piece_stays_on_graph() {
        let k = CertifiedCompact::from_piece(parabola_piece());
        let samples = k.sample_grid(4.0);
        assert!(samples.len() > 40);
        for z in &samples {
            let defect = (z.coords[1] - z.coords[0] * z.coords[0]).norm();
            assert!(defect < 1e-10, "graph equation violated by {defect}");
        }
    }

    #[test]
    fn ball_samples_stay_inside() {
        let k: CertifiedCompact<f64> = CertifiedCompact::from_ball(Ball::centered(2, 1.0));
        for z in k.sample_grid(4.0) {
            assert!(z.norm() <= 1.0 + 1e-14);
        }
    }

    #[test]
    fn projection_disc_covers_functional_image() {
        let k = CertifiedCompact::from_piece(parabola_piece());
        let u = CPoint::from_f64_pairs(&[(0.0, 0.0), (1.0, 0.0)]);
        let d = k.projection_disc(&u);
        // Functional reads t^2 over |t| <= 1: image is the unit disc.
        for z in k.sample_grid(6.0) {
            assert!(d.contains(z.inner(&u), 1e-9));
        }
    }

    #[test]
    fn dist_roundtrip_on_and_off_the_piece() {
        let k = CertifiedCompact::from_piece(parabola_piece());
        let on = CPoint::from_f64_pairs(&[(0.5, 0.0), (0.25, 0.0)]);
        assert!(k.dist(&on) < 1e-9);
        let off = CPoint::from_f64_pairs(&[(0.5, 0.0), (2.0, 0.0)]);
        let d = k.dist(&off);
        assert!(d > 1.0 && d < 2.0, "distance {d}");
    }
}
