//! Problem files, the independent verifier, and plot-data export.
//!
//! Three concerns live here, all deliberately outside the engine:
//!
//! * **ingestion** — JSON problem files parse into validated
//!   [`InterpolationProblem`](crate::engine::InterpolationProblem)s, with
//!   diagnostics that name the offending field instead of dumping a serde
//!   trail;
//! * **verification** — [`verify`] re-measures every per-stage condition a
//!   run claims, from nothing but the word, the ball schedule and the
//!   problem.  It never reads the engine's own records, and it samples at a
//!   deterministic half-cell offset from the construction grids so a pass
//!   cannot be an artifact of re-evaluating the same points;
//! * **export** — escape-stage tables over a window of a coordinate plane,
//!   for plotting the truncated bounded-orbit region externally.
//!
//! All file formats carry a `format_version` field, currently 1.

mod orbit;
mod problem;
mod verify;

pub use orbit::{export_orbit, OrbitSummary, OrbitWindow};
pub use problem::{
    golden_problem, load_problem, load_sequence, save_problem, ProblemFile, SequenceFile,
    Tolerances, VarietySpec,
};
pub use verify::{
    verify, ConditionCheck, FinalChecks, StageVerification, VerificationReport, RESIDUAL_TOL,
};

/// Version stamped into problem files, sequence files and reports.
pub const FORMAT_VERSION: u32 = 1;

/// Everything the harness layer can reject.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// The file is not syntactically valid JSON (or misses required fields);
    /// positions are 1-based as serde reports them.
    #[error("parse error at line {line}, column {column}: {detail}")]
    Parse {
        line: usize,
        column: usize,
        detail: String,
    },
    /// The file parsed but describes an unusable instance.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },
}

impl HarnessError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        HarnessError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Parse {
            line: e.line(),
            column: e.column(),
            detail: e.to_string(),
        }
    }
}
