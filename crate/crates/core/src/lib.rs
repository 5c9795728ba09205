//! Finite-resolution, certified constructions of Cantor sets whose
//! projections onto every subspace are again Cantor sets.

pub mod ball_system;
pub mod constructions;
pub mod error;
pub mod geom;
pub mod grassmann;
pub mod par;
pub mod projection_cert;
pub mod rng;

pub use error::{Error, Result};
pub use geom::{Ball, Point, PointSet};
pub use grassmann::Subspace;
