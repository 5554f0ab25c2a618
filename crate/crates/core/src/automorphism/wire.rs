//! JSON wire format for automorphism words (format_version 1).
//!
//! Layout:
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "dimension": 2,
//!   "letters": [
//!     { "kind": "shear", "frame": [COL, COL], "direction": 0,
//!       "functional": 1, "coefficients": [[re, im], ...],
//!       "poly": { "scale": [re, im], "roots": [[re, im], ...],
//!                 "damp_center": [re, im], "damp_power": 3 } },
//!     { "kind": "affine_unitary", "frame": [COL, COL],
//!       "translation": [[re, im], ...] }
//!   ],
//!   "stages": [[0, 4], [4, 9]],
//!   "schedule": [0.2, 2.45]
//! }
//! ```
//!
//! where `COL` is a frame column as a list of `[re, im]` pairs; columns are
//! orthonormal and `direction`/`functional` are 0-based column indices.
//! `coefficients` always carries the expanded profile (low degree first) so
//! any reader can evaluate the letter; `poly`, when present, carries the
//! factored form and is authoritative — it is what preserves exact vanishing
//! at pinned points. `stages` are half-open, contiguous from 0. `schedule`
//! (optional) records the ball radii of a solver run so that verification can
//! replay the stage geometry without re-deriving it.
//!
//! All numbers are written with the shortest round-trip f64 representation,
//! so serialize -> parse -> serialize is byte-identical.

use super::letter::{ElementaryAut, Frame};
use super::poly::Poly;
use super::word::AutWord;
use crate::geometry::CPoint;
use crate::scalar::{Real, C};
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WireError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed word file at line {line}, column {column}: {detail}")]
    Parse {
        line: usize,
        column: usize,
        detail: String,
    },

    #[error("invalid word file field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

const FORMAT_VERSION: u32 = 1;
const UNITARY_TOL: f64 = 1e-9;

#[derive(Serialize, Deserialize)]
struct WireWord {
    format_version: u32,
    dimension: usize,
    letters: Vec<WireLetter>,
    stages: Vec<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    schedule: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum WireLetter {
    Shear {
        frame: Vec<Vec<[f64; 2]>>,
        direction: usize,
        functional: usize,
        coefficients: Vec<[f64; 2]>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        poly: Option<WirePoly>,
    },
    Overshear {
        frame: Vec<Vec<[f64; 2]>>,
        direction: usize,
        functional: usize,
        coefficients: Vec<[f64; 2]>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        poly: Option<WirePoly>,
    },
    AffineUnitary {
        frame: Vec<Vec<[f64; 2]>>,
        translation: Vec<[f64; 2]>,
    },
}

#[derive(Serialize, Deserialize)]
struct WirePoly {
    scale: [f64; 2],
    roots: Vec<[f64; 2]>,
    damp_center: [f64; 2],
    damp_power: u32,
}

fn c_out<R: Real>(z: C<R>) -> [f64; 2] {
    [z.re.as_f64(), z.im.as_f64()]
}

fn c_in<R: Real>(p: [f64; 2]) -> C<R> {
    Complex::new(R::of(p[0]), R::of(p[1]))
}

fn frame_out<R: Real>(f: &Frame<R>) -> Vec<Vec<[f64; 2]>> {
    f.cols
        .iter()
        .map(|col| col.coords.iter().map(|&z| c_out(z)).collect())
        .collect()
}

fn frame_in<R: Real>(cols: &[Vec<[f64; 2]>], dim: usize, field: &str) -> Result<Frame<R>, WireError> {
    if cols.len() != dim || cols.iter().any(|c| c.len() != dim) {
        return Err(WireError::Invalid {
            field: field.into(),
            reason: format!("frame must be {dim} columns of {dim} entries"),
        });
    }
    let frame: Frame<R> = Frame {
        cols: cols
            .iter()
            .map(|c| CPoint::new(c.iter().map(|&p| c_in::<R>(p)).collect()))
            .collect(),
    };
    let defect = frame.unitary_defect().as_f64();
    if defect > UNITARY_TOL {
        return Err(WireError::Invalid {
            field: field.into(),
            reason: format!("frame is not unitary (defect {defect:.3e})"),
        });
    }
    Ok(frame)
}

fn poly_out<R: Real>(p: &Poly<R>) -> (Vec<[f64; 2]>, Option<WirePoly>) {
    let coeffs = p.coefficients().iter().map(|&z| c_out(z)).collect();
    let factored = match p {
        Poly::Factored {
            scale,
            roots,
            damp_center,
            damp_power,
        } => Some(WirePoly {
            scale: c_out(*scale),
            roots: roots.iter().map(|&z| c_out(z)).collect(),
            damp_center: c_out(*damp_center),
            damp_power: *damp_power,
        }),
        Poly::Dense { .. } => None,
    };
    (coeffs, factored)
}

fn poly_in<R: Real>(coeffs: &[[f64; 2]], factored: &Option<WirePoly>) -> Poly<R> {
    match factored {
        Some(w) => Poly::Factored {
            scale: c_in(w.scale),
            roots: w.roots.iter().map(|&p| c_in(p)).collect(),
            damp_center: c_in(w.damp_center),
            damp_power: w.damp_power,
        },
        None => Poly::Dense {
            coeffs: coeffs.iter().map(|&p| c_in(p)).collect(),
        },
    }
}

fn letter_out<R: Real>(l: &ElementaryAut<R>) -> WireLetter {
    match l {
        ElementaryAut::Shear { frame, dir, func, h } => {
            let (coefficients, poly) = poly_out(h);
            WireLetter::Shear {
                frame: frame_out(frame),
                direction: *dir,
                functional: *func,
                coefficients,
                poly,
            }
        }
        ElementaryAut::Overshear { frame, dir, func, h } => {
            let (coefficients, poly) = poly_out(h);
            WireLetter::Overshear {
                frame: frame_out(frame),
                direction: *dir,
                functional: *func,
                coefficients,
                poly,
            }
        }
        ElementaryAut::AffineUnitary { q, v } => WireLetter::AffineUnitary {
            frame: frame_out(q),
            translation: v.coords.iter().map(|&z| c_out(z)).collect(),
        },
    }
}

fn letter_in<R: Real>(w: &WireLetter, dim: usize, idx: usize) -> Result<ElementaryAut<R>, WireError> {
    let field = |name: &str| format!("letters[{idx}].{name}");
    let check_indices = |dir: usize, func: usize| -> Result<(), WireError> {
        if dir >= dim || func >= dim {
            return Err(WireError::Invalid {
                field: field("direction"),
                reason: format!("column index out of range for dimension {dim}"),
            });
        }
        if dir == func {
            return Err(WireError::Invalid {
                field: field("functional"),
                reason: "direction and functional must differ".into(),
            });
        }
        Ok(())
    };
    match w {
        WireLetter::Shear {
            frame,
            direction,
            functional,
            coefficients,
            poly,
        } => {
            check_indices(*direction, *functional)?;
            Ok(ElementaryAut::Shear {
                frame: frame_in(frame, dim, &field("frame"))?,
                dir: *direction,
                func: *functional,
                h: poly_in(coefficients, poly),
            })
        }
        WireLetter::Overshear {
            frame,
            direction,
            functional,
            coefficients,
            poly,
        } => {
            check_indices(*direction, *functional)?;
            Ok(ElementaryAut::Overshear {
                frame: frame_in(frame, dim, &field("frame"))?,
                dir: *direction,
                func: *functional,
                h: poly_in(coefficients, poly),
            })
        }
        WireLetter::AffineUnitary { frame, translation } => {
            if translation.len() != dim {
                return Err(WireError::Invalid {
                    field: field("translation"),
                    reason: format!("expected {dim} entries"),
                });
            }
            Ok(ElementaryAut::AffineUnitary {
                q: frame_in(frame, dim, &field("frame"))?,
                v: CPoint::new(translation.iter().map(|&p| c_in(p)).collect()),
            })
        }
    }
}

/// Serializes a word (and optional stage-radius schedule) to the wire string.
pub fn word_to_string<R: Real>(word: &AutWord<R>, schedule: Option<&[R]>) -> String {
    let wire = WireWord {
        format_version: FORMAT_VERSION,
        dimension: word.dim(),
        letters: word.letters().iter().map(letter_out).collect(),
        stages: word.stages().iter().map(|r| [r.start, r.end]).collect(),
        schedule: schedule.map(|s| s.iter().map(|r| r.as_f64()).collect()),
    };
    serde_json::to_string_pretty(&wire).expect("word serialization cannot fail") + "\n"
}

/// Parses the wire string back into a word and optional schedule.
pub fn word_from_str<R: Real>(s: &str) -> Result<(AutWord<R>, Option<Vec<R>>), WireError> {
    let wire: WireWord = serde_json::from_str(s).map_err(|e| WireError::Parse {
        line: e.line(),
        column: e.column(),
        detail: e.to_string(),
    })?;
    if wire.format_version != FORMAT_VERSION {
        return Err(WireError::Invalid {
            field: "format_version".into(),
            reason: format!("unsupported version {}", wire.format_version),
        });
    }
    if wire.dimension == 0 {
        return Err(WireError::Invalid {
            field: "dimension".into(),
            reason: "dimension must be at least 1".into(),
        });
    }
    let mut word = AutWord::identity(wire.dimension);
    for (idx, l) in wire.letters.iter().enumerate() {
        word.push(letter_in(l, wire.dimension, idx)?);
    }
    let mut prev_end = 0usize;
    let mut stages = Vec::with_capacity(wire.stages.len());
    for (k, [s, e]) in wire.stages.iter().enumerate() {
        if *s != prev_end || e < s || *e > wire.letters.len() {
            return Err(WireError::Invalid {
                field: format!("stages[{k}]"),
                reason: "stage ranges must be contiguous from 0 and within the letter list".into(),
            });
        }
        stages.push(*s..*e);
        prev_end = *e;
    }
    let word = word.with_stages(stages);
    let schedule = wire
        .schedule
        .map(|s| s.into_iter().map(|x| R::of(x)).collect());
    Ok((word, schedule))
}

/// Writes the word file atomically (temp file in the same directory, then a
/// rename), so readers never observe a half-written file.
pub fn save_word<R: Real>(
    path: &Path,
    word: &AutWord<R>,
    schedule: Option<&[R]>,
) -> Result<(), WireError> {
    let text = word_to_string(word, schedule);
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.persist(path).map_err(|e| WireError::Io(e.error))?;
    Ok(())
}

pub fn load_word<R: Real>(path: &Path) -> Result<(AutWord<R>, Option<Vec<R>>), WireError> {
    let text = std::fs::read_to_string(path)?;
    word_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::poly;
    use crate::scalar::c64;

    fn mixed_word() -> AutWord<f64> {
        let mut w = AutWord::identity(2);
        w.push(ElementaryAut::Shear {
            frame: Frame::standard(2),
            dir: 1,
            func: 0,
            h: poly::factored(
                c64(0.25, -0.1),
                vec![c64(5.0, 0.0), c64(-1.0, 2.0)],
                c64(0.5, 0.5),
                3,
            ),
        });
        w.close_stage();
        w.push(ElementaryAut::Overshear {
            frame: Frame::standard(2),
            dir: 0,
            func: 1,
            h: Poly::Dense {
                coeffs: vec![c64(0.0, 0.0), c64(0.125, 0.0)],
            },
        });
        w.push(ElementaryAut::AffineUnitary {
            q: Frame::standard(2),
            v: CPoint::from_f64_pairs(&[(1.0, -2.0), (0.5, 0.0)]),
        });
        w.close_stage();
        w
    }

    #[test]
    fn roundtrip_preserves_evaluation_bit_for_bit() {
        let w = mixed_word();
        let text = word_to_string(&w, Some(&[0.2, 2.45]));
        let (w2, sched) = word_from_str::<f64>(&text).unwrap();
        assert_eq!(sched, Some(vec![0.2, 2.45]));
        assert_eq!(w2.len(), w.len());
        assert_eq!(w2.stages(), w.stages());
        for &(re1, im1, re2, im2) in &[(0.3, -0.2, 1.1, 0.7), (5.0, 0.0, 0.0, 0.0)] {
            let z = CPoint::from_f64_pairs(&[(re1, im1), (re2, im2)]);
            let a = w.apply(&z).unwrap();
            let b = w2.apply(&z).unwrap();
            assert_eq!(a.coords, b.coords, "evaluation must be bit-identical");
        }
    }

    #[test]
    fn reserialization_is_byte_identical() {
        let w = mixed_word();
        let text = word_to_string(&w, None);
        let (w2, _) = word_from_str::<f64>(&text).unwrap();
        let text2 = word_to_string(&w2, None);
        assert_eq!(text, text2);
    }

    #[test]
    fn factored_profile_survives_the_wire() {
        let w = mixed_word();
        let text = word_to_string(&w, None);
        let (w2, _) = word_from_str::<f64>(&text).unwrap();
        match &w2.letters()[0] {
            ElementaryAut::Shear { h: Poly::Factored { roots, .. }, .. } => {
                // The pinned roots must be bit-exact after the roundtrip:
                // this is what keeps reloaded words vanishing exactly at pins.
                assert_eq!(roots[0], c64(5.0, 0.0));
                assert_eq!(roots[1], c64(-1.0, 2.0));
            }
            other => panic!("expected factored shear, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_unitary_frames_and_bad_stages() {
        let bad = r#"{
            "format_version": 1,
            "dimension": 2,
            "letters": [
                { "kind": "shear",
                  "frame": [[[1.0,0.0],[0.0,0.0]],[[1.0,0.0],[1.0,0.0]]],
                  "direction": 0, "functional": 1,
                  "coefficients": [[0.0,0.0]] }
            ],
            "stages": []
        }"#;
        match word_from_str::<f64>(bad) {
            Err(WireError::Invalid { field, .. }) => assert!(field.contains("frame")),
            other => panic!("expected frame rejection, got {other:?}"),
        }

        let bad_stage = r#"{
            "format_version": 1,
            "dimension": 2,
            "letters": [],
            "stages": [[1, 2]]
        }"#;
        assert!(matches!(
            word_from_str::<f64>(bad_stage),
            Err(WireError::Invalid { .. })
        ));
    }

    #[test]
    fn parse_errors_carry_position() {
        match word_from_str::<f64>("{ not json") {
            Err(WireError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn atomic_save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("word.json");
        let w = mixed_word();
        save_word(&path, &w, Some(&[1.0])).unwrap();
        let (w2, sched) = load_word::<f64>(&path).unwrap();
        assert_eq!(w2.len(), 3);
        assert_eq!(sched, Some(vec![1.0]));
    }
}
