//! Constructive interpolation of tame discrete sequences in C^N by finite
//! words of polynomial automorphisms (shears, overshears, affine-unitary
//! maps), together with the finite-stage Fatou-Bieberbach membership test
//! induced by the construction.
//!
//! The library is organised in five layers:
//!
//! * [`geometry`] — points of C^N, balls, variety models (affine subspaces
//!   and polynomial graph curves), certified polynomially convex compacts,
//!   discreteness checks and deterministic sample grids;
//! * [`automorphism`] — elementary automorphisms and composition words with
//!   exact inverses, sup-deviation measurement, JSON serialization;
//! * [`relocation`] — the finite Andersen–Lempert surrogate: move finitely
//!   many points exactly, pin the rest exactly, stay within an epsilon of
//!   the identity on a protected compact;
//! * [`engine`] — the staged interpolation construction (base stage plus
//!   inductive two-phase steps), level sets, ball schedule, membership;
//! * [`harness`] — problem files, independent verification with offset
//!   grids, orbit export, and the CLI entry points.
//!
//! All numerics are generic over the real scalar through [`scalar::Real`];
//! `f64` is the supported precision for the full pipeline and the concrete
//! aliases at the crate root ([`Point64`], [`Word64`], ...) pin it.

pub mod automorphism;
pub mod engine;
pub mod geometry;
pub mod harness;
pub mod relocation;
pub mod scalar;

/// Convenience aliases at the working precision used by the harness.
pub type Point64 = geometry::CPoint<f64>;
pub type Ball64 = geometry::Ball<f64>;
pub type Variety64 = geometry::VarietyModel<f64>;
pub type Compact64 = geometry::CertifiedCompact<f64>;
pub type Letter64 = automorphism::ElementaryAut<f64>;
pub type Word64 = automorphism::AutWord<f64>;
pub type Problem64 = engine::InterpolationProblem<f64>;
pub type Run64 = engine::InterpolationRun<f64>;
