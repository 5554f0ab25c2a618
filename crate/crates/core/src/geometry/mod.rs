//! Geometric substrate: points, balls, discs, variety models, discrete
//! sequences, deterministic grids, and certified polynomially convex compacts.

mod ball;
mod compact;
mod disc;
mod grids;
mod point;
mod sequence;
mod variety;

pub use ball::Ball;
pub use compact::{Atom, Certificate, CertifiedCompact, GraphPiece};
pub use disc::Disc;
pub use grids::{ball_grid, disc_grid, sphere_grid, sphere_spacing_for, unit_sphere_grid};
pub use point::CPoint;
pub use sequence::{check_discrete, DiscretenessReport, SequenceSpec, DUPLICATE_TOL};
pub use variety::VarietyModel;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    /// Two sequence entries coincide within the duplicate tolerance.
    #[error("points {i} and {j} coincide (distance {dist:.3e})")]
    DuplicatePoint { i: usize, j: usize, dist: f64 },

    /// Minimal pairwise separation is below the caller's floor.
    #[error("points {i} and {j} are {found:.3e} apart, below the floor {floor:.3e}")]
    SeparationBelowFloor {
        i: usize,
        j: usize,
        found: f64,
        floor: f64,
    },

    /// A union pattern could not be certified polynomially convex.
    #[error("cannot certify polynomial convexity: {reason}")]
    UncertifiablePattern { reason: String },
}
