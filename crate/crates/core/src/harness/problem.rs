//! Problem and sequence files: the JSON surface of the pipeline.
//!
//! A problem file is a complete instance description — variety, sources,
//! targets, budget, schedule seeds and tolerances — written in plain JSON so
//! instances can be versioned, diffed and generated by other tooling.  The
//! loader insists on naming the field it rejects: a file that fails
//! validation produces `invalid epsilon: must lie in (0, 1)`, not a stack of
//! conversion errors.
//!
//! Complex numbers are `[re, im]` pairs and points are one pair per ambient
//! coordinate, matching the word-file conventions.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::automorphism::Poly;
use crate::engine::InterpolationProblem;
use crate::geometry::{CPoint, SequenceSpec, VarietyModel};
use crate::scalar::Real;

use super::{HarnessError, FORMAT_VERSION};

/// Complex scalar on the wire.
type WireC = [f64; 2];
/// Point on the wire: one `[re, im]` per coordinate.
type WirePoint = Vec<WireC>;

/// Variety description as written in problem files.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VarietySpec {
    /// The first coordinate axis `{z_2 = … = z_n = 0}` — the normal form
    /// every tame sequence can be carried to, and the default test bed.
    CoordinateAxis,
    /// Graph curve `t ↦ (t, p(t), 0, …)`; coefficients of `p` low degree
    /// first.
    GraphCurve { coefficients: Vec<WireC> },
    /// `base + span(basis)` with an orthonormal basis.
    AffineSubspace {
        base: WirePoint,
        basis: Vec<WirePoint>,
    },
}

/// Numeric tolerances an instance is checked against.  The defaults are the
/// library-wide constants; files may tighten or loosen them.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Largest defect a source may have against the variety.
    pub membership: f64,
    /// Residual required of every matched pair.
    #[serde(rename = "match")]
    pub match_residual: f64,
    /// Pairwise distance under which two listed points count as duplicates.
    pub duplicate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            membership: 1e-10,
            match_residual: 1e-9,
            duplicate: 1e-9,
        }
    }
}

/// A problem file, exactly as serialized.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub format_version: u32,
    pub dimension: usize,
    pub variety: VarietySpec,
    pub sources: Vec<WirePoint>,
    pub targets: Vec<WirePoint>,
    pub epsilon: f64,
    pub stages: usize,
    pub r1: f64,
    pub r2: f64,
    pub grid_density: f64,
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn point_from_wire<R: Real>(p: &[WireC]) -> CPoint<R> {
    CPoint::new(
        p.iter()
            .map(|&[re, im]| Complex::new(R::of(re), R::of(im)))
            .collect(),
    )
}

fn wire_from_point<R: Real>(p: &CPoint<R>) -> WirePoint {
    p.coords
        .iter()
        .map(|c| [c.re.as_f64(), c.im.as_f64()])
        .collect()
}

fn check_finite(field: &str, vals: &[f64]) -> Result<(), HarnessError> {
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(HarnessError::invalid(field, "must be a finite number"));
    }
    Ok(())
}

impl ProblemFile {
    /// Parses a problem from its JSON text.
    pub fn parse_str(s: &str) -> Result<ProblemFile, HarnessError> {
        Ok(serde_json::from_str(s)?)
    }

    /// Builds the variety model, checking shape consistency against the
    /// declared dimension.
    fn build_variety<R: Real>(&self) -> Result<VarietyModel<R>, HarnessError> {
        let n = self.dimension;
        match &self.variety {
            VarietySpec::CoordinateAxis => Ok(VarietyModel::coordinate_axis(n)),
            VarietySpec::GraphCurve { coefficients } => {
                for c in coefficients {
                    check_finite("variety", c)?;
                }
                Ok(VarietyModel::GraphCurve {
                    ambient_dim: n,
                    p: Poly::Dense {
                        coeffs: coefficients
                            .iter()
                            .map(|&[re, im]| Complex::new(R::of(re), R::of(im)))
                            .collect(),
                    },
                })
            }
            VarietySpec::AffineSubspace { base, basis } => {
                if base.len() != n {
                    return Err(HarnessError::invalid(
                        "variety",
                        format!("base point has {} coordinates, expected {n}", base.len()),
                    ));
                }
                if basis.len() != 1 {
                    return Err(HarnessError::invalid(
                        "variety",
                        "the subspace model must be one-dimensional (a single basis vector)",
                    ));
                }
                for v in basis {
                    if v.len() != n {
                        return Err(HarnessError::invalid(
                            "variety",
                            format!("basis vector has {} coordinates, expected {n}", v.len()),
                        ));
                    }
                }
                let base_pt: CPoint<R> = point_from_wire(base);
                let basis_pts: Vec<CPoint<R>> = basis.iter().map(|v| point_from_wire(v)).collect();
                let defect = (basis_pts[0].norm() - R::one()).abs();
                if defect > R::of(1e-9) {
                    return Err(HarnessError::invalid(
                        "variety",
                        format!(
                            "basis vector is not unit length (defect {:.3e})",
                            defect.as_f64()
                        ),
                    ));
                }
                Ok(VarietyModel::AffineSubspace {
                    base: base_pt,
                    basis: basis_pts,
                })
            }
        }
    }

    /// Validates the file and converts it into a runnable problem.  Every
    /// rejection names its field; the engine's own validation runs last as a
    /// backstop for anything the field checks missed.
    pub fn to_problem<R: Real>(&self) -> Result<InterpolationProblem<R>, HarnessError> {
        if self.format_version != FORMAT_VERSION {
            return Err(HarnessError::invalid(
                "format_version",
                format!(
                    "version {} not supported; this build reads version {FORMAT_VERSION}",
                    self.format_version
                ),
            ));
        }
        if self.dimension < 2 {
            return Err(HarnessError::invalid("dimension", "must be at least 2"));
        }
        let variety = self.build_variety::<R>()?;

        for (field, pts) in [("sources", &self.sources), ("targets", &self.targets)] {
            for (j, p) in pts.iter().enumerate() {
                if p.len() != self.dimension {
                    return Err(HarnessError::invalid(
                        field,
                        format!(
                            "point {j} has {} coordinates, expected {}",
                            p.len(),
                            self.dimension
                        ),
                    ));
                }
                for c in p {
                    check_finite(field, c)?;
                }
            }
        }
        if self.sources.len() != self.targets.len() {
            return Err(HarnessError::invalid(
                "targets",
                format!(
                    "{} targets against {} sources",
                    self.targets.len(),
                    self.sources.len()
                ),
            ));
        }

        let sources: Vec<CPoint<R>> = self.sources.iter().map(|p| point_from_wire(p)).collect();
        let targets: Vec<CPoint<R>> = self.targets.iter().map(|p| point_from_wire(p)).collect();

        check_finite(
            "tolerances",
            &[
                self.tolerances.membership,
                self.tolerances.match_residual,
                self.tolerances.duplicate,
            ],
        )?;
        for (field, pts) in [("sources", &sources), ("targets", &targets)] {
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    let d = pts[i].dist(&pts[j]);
                    if d <= R::of(self.tolerances.duplicate) {
                        return Err(HarnessError::invalid(
                            field,
                            format!(
                                "points {i} and {j} coincide (separation {:.3e})",
                                d.as_f64()
                            ),
                        ));
                    }
                }
            }
        }
        for (j, a) in sources.iter().enumerate() {
            let defect = variety.membership_defect(a);
            if defect > R::of(self.tolerances.membership) {
                return Err(HarnessError::invalid(
                    "sources",
                    format!("point {j} sits {:.3e} off the variety", defect.as_f64()),
                ));
            }
        }

        check_finite(
            "epsilon",
            &[self.epsilon, self.r1, self.r2, self.grid_density],
        )?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(HarnessError::invalid("epsilon", "must lie in (0, 1)"));
        }
        if self.stages == 0 || self.stages > 32 {
            return Err(HarnessError::invalid("stages", "must lie in 1..=32"));
        }
        if self.r1 <= 0.0 {
            return Err(HarnessError::invalid("r1", "must be positive"));
        }
        if self.r2 <= self.r1 + 1.0 {
            return Err(HarnessError::invalid("r2", "must exceed r1 by more than 1"));
        }
        if self.grid_density <= 0.0 {
            return Err(HarnessError::invalid("grid_density", "must be positive"));
        }

        let problem = InterpolationProblem {
            variety,
            sources,
            targets,
            epsilon: R::of(self.epsilon),
            k_max: self.stages,
            r1: R::of(self.r1),
            r2: R::of(self.r2),
            grid_density: R::of(self.grid_density),
        };
        problem.validate().map_err(|e| {
            HarnessError::invalid("problem", e.to_string())
        })?;
        Ok(problem)
    }
}

/// Reads and validates a problem file, returning both the runnable problem
/// and the file (seed and tolerances live only on the file).
pub fn load_problem<R: Real>(
    path: &Path,
) -> Result<(InterpolationProblem<R>, ProblemFile), HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let file = ProblemFile::parse_str(&text)?;
    let problem = file.to_problem()?;
    Ok((problem, file))
}

/// Writes a problem file atomically (temp file + rename), pretty-printed so
/// instances diff cleanly under version control.
pub fn save_problem(file: &ProblemFile, path: &Path) -> Result<(), HarnessError> {
    let text = serde_json::to_string_pretty(file).expect("problem files always serialize");
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| HarnessError::io(path, e))?;
    tmp.write_all(text.as_bytes())
        .and_then(|_| tmp.write_all(b"\n"))
        .map_err(|e| HarnessError::io(path, e))?;
    tmp.persist(path)
        .map_err(|e| HarnessError::io(path, e.error))?;
    Ok(())
}

/// A bare point sequence, the input of the `normalize` command.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub format_version: u32,
    pub points: Vec<WirePoint>,
}

/// Reads a sequence file into a [`SequenceSpec`].
pub fn load_sequence<R: Real>(path: &Path) -> Result<SequenceSpec<R>, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let file: SequenceFile = serde_json::from_str(&text)?;
    if file.format_version != FORMAT_VERSION {
        return Err(HarnessError::invalid(
            "format_version",
            format!(
                "version {} not supported; this build reads version {FORMAT_VERSION}",
                file.format_version
            ),
        ));
    }
    if file.points.is_empty() {
        return Err(HarnessError::invalid("points", "sequence is empty"));
    }
    let dim = file.points[0].len();
    for (j, p) in file.points.iter().enumerate() {
        if p.len() != dim {
            return Err(HarnessError::invalid(
                "points",
                format!("point {j} has {} coordinates, expected {dim}", p.len()),
            ));
        }
        for c in p {
            check_finite("points", c)?;
        }
    }
    Ok(SequenceSpec::new(
        file.points.iter().map(|p| point_from_wire(p)).collect(),
    ))
}

/// The reference instance: eight sources in normal position on the first
/// axis of C², eight seeded targets in three radial bands chosen so the
/// stage schedule forces two matches per early ball and four in the third —
/// every phase of the construction (carry, expulsion, re-station, late
/// vacuous stages) gets exercised.  Angles are steep (the targets lean into
/// the second coordinate) so no target sits near the source axis where the
/// trace and its letters live.
pub fn golden_problem(seed: u64) -> ProblemFile {
    let radii = [1.6, 2.0, 6.0, 6.6, 9.9, 11.0, 12.1, 13.3];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources: Vec<WirePoint> = (1..=radii.len())
        .map(|j| vec![[j as f64, 0.0], [0.0, 0.0]])
        .collect();
    let source_pts: Vec<CPoint<f64>> = sources.iter().map(|p| point_from_wire(p)).collect();

    let mut target_pts: Vec<CPoint<f64>> = Vec::new();
    for &r in &radii {
        // Redraw until the new target keeps half a unit from everything
        // already placed; with these radial gaps a redraw is a rare event,
        // but the separation floor is part of the instance's contract.
        let mut placed = false;
        for _ in 0..1000 {
            let steep = rng.gen_range(60.0_f64..85.0).to_radians();
            let phase1 = rng.gen_range(0.0..std::f64::consts::TAU);
            let phase2 = rng.gen_range(0.0..std::f64::consts::TAU);
            let m1 = r * steep.cos();
            let m2 = r * steep.sin();
            let cand = CPoint::<f64>::from_f64_pairs(&[
                (m1 * phase1.cos(), m1 * phase1.sin()),
                (m2 * phase2.cos(), m2 * phase2.sin()),
            ]);
            let clear = target_pts
                .iter()
                .chain(source_pts.iter())
                .all(|p| p.dist(&cand) >= 0.5);
            if clear {
                target_pts.push(cand);
                placed = true;
                break;
            }
        }
        assert!(placed, "seeded target placement exhausted its redraws");
    }

    ProblemFile {
        format_version: FORMAT_VERSION,
        dimension: 2,
        variety: VarietySpec::CoordinateAxis,
        sources,
        targets: target_pts.iter().map(wire_from_point).collect(),
        epsilon: 0.5,
        stages: 6,
        r1: 1.0,
        r2: 2.3,
        grid_density: 4.0,
        seed,
        tolerances: Tolerances::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_json() -> String {
        serde_json::to_string(&golden_problem(42)).unwrap()
    }

    #[test]
    fn golden_instance_loads_and_validates() {
        let file = ProblemFile::parse_str(&golden_json()).unwrap();
        let problem = file.to_problem::<f64>().unwrap();
        assert_eq!(problem.sources.len(), 8);
        assert_eq!(problem.k_max, 6);
        for b in &problem.targets {
            assert!(b.norm() <= 20.0, "target {b} too far out");
        }
        for i in 0..8 {
            for j in i + 1..8 {
                assert!(problem.targets[i].dist(&problem.targets[j]) >= 0.5);
            }
        }
    }

    #[test]
    fn golden_instance_is_seed_deterministic() {
        let a = serde_json::to_string(&golden_problem(7)).unwrap();
        let b = serde_json::to_string(&golden_problem(7)).unwrap();
        let c = serde_json::to_string(&golden_problem(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn epsilon_out_of_range_names_the_field() {
        let mut file = ProblemFile::parse_str(&golden_json()).unwrap();
        file.epsilon = 1.5;
        match file.to_problem::<f64>() {
            Err(HarnessError::Validation { field, reason }) => {
                assert_eq!(field, "epsilon");
                assert!(reason.contains("(0, 1)"), "reason: {reason}");
            }
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn off_variety_source_names_the_field() {
        let mut file = ProblemFile::parse_str(&golden_json()).unwrap();
        file.sources[3][1] = [1e-3, 0.0];
        match file.to_problem::<f64>() {
            Err(HarnessError::Validation { field, reason }) => {
                assert_eq!(field, "sources");
                assert!(reason.contains("off the variety"), "reason: {reason}");
            }
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_targets_are_rejected() {
        let mut file = ProblemFile::parse_str(&golden_json()).unwrap();
        file.targets[1] = file.targets[0].clone();
        match file.to_problem::<f64>() {
            Err(HarnessError::Validation { field, .. }) => assert_eq!(field, "targets"),
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_position() {
        match ProblemFile::parse_str("{\n  \"format_version\": 1,\n  oops\n}") {
            Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_version_is_rejected() {
        let mut file = ProblemFile::parse_str(&golden_json()).unwrap();
        file.format_version = 2;
        match file.to_problem::<f64>() {
            Err(HarnessError::Validation { field, .. }) => assert_eq!(field, "format_version"),
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn problem_file_roundtrips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("instance.json");
        let file = golden_problem(42);
        save_problem(&file, &path).unwrap();
        let (problem, reloaded) = load_problem::<f64>(&path).unwrap();
        assert_eq!(problem.sources.len(), 8);
        assert_eq!(reloaded.seed, 42);
        assert_eq!(
            serde_json::to_string(&file).unwrap(),
            serde_json::to_string(&reloaded).unwrap()
        );
    }

    #[test]
    fn graph_curve_instance_builds() {
        let text = r#"{
            "format_version": 1,
            "dimension": 2,
            "variety": {"kind": "graph_curve", "coefficients": [[0.0,0.0],[0.0,0.0],[0.25,0.0]]},
            "sources": [[[1.0,0.0],[0.25,0.0]]],
            "targets": [[[0.5,0.5],[1.5,0.0]]],
            "epsilon": 0.5,
            "stages": 2,
            "r1": 1.0,
            "r2": 2.5,
            "grid_density": 4.0,
            "seed": 1
        }"#;
        let file = ProblemFile::parse_str(text).unwrap();
        let problem = file.to_problem::<f64>().unwrap();
        assert!(problem.variety.is_curve());
        // The source (1, 0.25) lies on {z2 = 0.25 z1^2} exactly.
        assert_eq!(problem.variety.membership_defect(&problem.sources[0]), 0.0);
    }

    #[test]
    fn sequence_file_loads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq.json");
        std::fs::write(
            &path,
            r#"{"format_version": 1, "points": [[[1.0,0.0],[2.0,0.0]], [[3.0,0.5],[2.0,0.0]]]}"#,
        )
        .unwrap();
        let seq = load_sequence::<f64>(&path).unwrap();
        assert_eq!(seq.len(), 2);
        assert_eq!(seq.dim(), 2);
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, r#"{"format_version": 1, "points": []}"#).unwrap();
        assert!(matches!(
            load_sequence::<f64>(&bad),
            Err(HarnessError::Validation { .. })
        ));
    }
}
