//! Perturbations that move a ball system into the certified classes, their
//! composition, and the constructions realizing prescribed projections.

mod appendix;
mod robust;
mod typical;
mod zk;

pub use appendix::{densify_for_l, graph_surjection_cantor, projection_defect};
pub use robust::{
    audit_isolated, audit_one_point, avoid_isolated_projections, avoid_one_point_projections, jittered_compactum,
    verify_robustness, RobustKind, RobustnessCertificate, RobustnessReport,
};
pub use typical::{typical_cantor, verify_bundle, BundleReport, CertificateBundle, LedgerEntry, StageCertificates};
pub use zk::{into_zk, DeltaBounds, ZkOutcome};

use crate::ball_system::{standard_cantor_in_ball, BallTree};
use crate::error::{Error, Result};
use crate::geom::{finite_general_position_approx, Ball, Point, PointSet};
use crate::rng;

/// Cantor pieces are planted in balls of this fraction of the radius available
/// to them. Small pieces keep the robustness radius close to the host radius,
/// and let the next, coarser approximation see each piece as about one point.
pub const PIECE_SCALE: f64 = 1.0 / 16.0;

/// Safety factor applied to every strict upper bound on a chosen radius.
pub(crate) const SHRINK: f64 = 0.9;

/// Approximation radius for the leaf centers, `(eps - r_X) / 2`, and the
/// general-position approximation `A` at that radius.
pub(crate) fn approximate_leaves(x: &BallTree, eps: f64, seed: u64) -> Result<(PointSet, f64)> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let r_x = x.leaf_radius();
    let eps_a = 0.5 * (eps - r_x);
    if !(eps_a > 0.0) {
        return Err(Error::ResolutionTooCoarse {
            leaf_radius: r_x,
            budget: eps,
        });
    }
    let centers = PointSet::new(x.leaf_centers())?;
    let a = finite_general_position_approx(&centers, eps_a, rng::child_seed(seed, 0))?;
    Ok((a, eps_a))
}

/// Largest `|c - center| + r` over the leaves `B(c, r)` of `t`.
pub(crate) fn extent(t: &BallTree, center: &Point) -> f64 {
    t.leaf_balls()
        .iter()
        .map(|b| b.center.dist(center) + b.radius)
        .fold(0.0, f64::max)
}

/// One standard Cantor system of radius `radius` per center, as a forest, and
/// the extent of each piece around its center.
pub(crate) fn cantor_pieces(centers: &[Point], radius: f64, depth: usize, seed: u64) -> Result<(BallTree, Vec<f64>)> {
    check_resolution(centers, radius * 0.25f64.powi(depth as i32))?;
    let mut pieces = Vec::with_capacity(centers.len());
    let mut extents = Vec::with_capacity(centers.len());
    for (i, c) in centers.iter().enumerate() {
        let t = standard_cantor_in_ball(&Ball::new(c.clone(), radius)?, depth, rng::child_seed(seed, 1000 + i as u64));
        extents.push(extent(&t, c));
        pieces.push(t);
    }
    Ok((BallTree::union(&pieces)?, extents))
}

pub(crate) fn check_depth(depth: usize) -> Result<()> {
    if depth > 24 {
        return Err(Error::InvalidArgument(format!("depth {depth} is too large (max 24)")));
    }
    Ok(())
}

/// Leaves must stay this many units in the last place above the coordinates
/// they sit at; below that, sibling gaps and containment are rounding noise.
pub const RESOLUTION_ULPS: f64 = 64.0;

/// Fails with [`Error::PrecisionExhausted`] when balls of radius `leaf_radius`
/// around `centers` cannot be resolved in double precision.
pub(crate) fn check_resolution(centers: &[Point], leaf_radius: f64) -> Result<()> {
    let scale = centers
        .iter()
        .flat_map(|c| c.0.iter())
        .fold(f64::MIN_POSITIVE, |m, x| m.max(x.abs()));
    let floor = RESOLUTION_ULPS * f64::EPSILON * scale;
    if !(leaf_radius > floor) {
        return Err(Error::PrecisionExhausted { leaf_radius, floor });
    }
    Ok(())
}
