use serde::{Deserialize, Serialize};

use crate::ball_system::{hausdorff_between, BallTree};
use crate::error::{Error, Result};
use crate::geom::{min_pairwise_distance, Ball};
use crate::projection_cert::{lambda_certified_with, Stop, ZkCertificate, DEFAULT_CELL_BUDGET};

use super::{approximate_leaves, cantor_pieces, check_depth, PIECE_SCALE, SHRINK};

/// Relative width to which `lambda` is refined before choosing `delta`.
const LAMBDA_REL_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZkOutcome {
    pub tree: BallTree,
    pub certificate: ZkCertificate,
    pub hausdorff_ub: f64,
    /// The four strict upper bounds `delta` was chosen below.
    pub delta_bounds: DeltaBounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaBounds {
    pub half_min_distance: f64,
    /// `lb(lambda(A)) / (2(|A| - 1))`; absent for `N = 1`, where no subspace
    /// is admissible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub approximation: f64,
    pub inverse_k: f64,
}

impl DeltaBounds {
    fn min(&self) -> f64 {
        self.half_min_distance
            .min(self.lambda.unwrap_or(f64::INFINITY))
            .min(self.approximation)
            .min(self.inverse_k)
    }
}

/// Moves `x` into `Z_k`: a general-position approximation `A` of its leaves,
/// disjoint balls `B(a_i, delta)` with
/// `delta < min{ min|a_i - a_j| / 2, lambda(A) / (2(|A| - 1)), eps_A, 1/(2k(N+1)) }`,
/// and a small standard Cantor system inside each ball.
///
/// `eps_A = (eps - r_X) / 2` absorbs the leaf radius `r_X` of `x`, so the
/// Hausdorff distance to `x` stays below `eps`.
pub fn into_zk(x: &BallTree, eps: f64, k: u32, depth: usize, seed: u64) -> Result<ZkOutcome> {
    check_depth(depth)?;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let (a, eps_a) = approximate_leaves(x, eps, seed)?;
    let n = a.dim();
    let t = a.len();

    let (lambda, lambda_bound) = if n >= 2 {
        let b = lambda_certified_with(&a, Stop::Relative(LAMBDA_REL_TOL), DEFAULT_CELL_BUDGET)?;
        let bound = b.lb / (2.0 * (t as f64 - 1.0));
        (Some(b), Some(bound))
    } else {
        (None, None)
    };
    let bounds = DeltaBounds {
        half_min_distance: 0.5 * min_pairwise_distance(a.points()),
        lambda: lambda_bound,
        approximation: eps_a,
        inverse_k: 1.0 / (2.0 * k as f64 * (n as f64 + 1.0)),
    };
    let delta = SHRINK * bounds.min();
    if !(delta > 0.0) {
        return Err(Error::Construction(format!("no admissible delta ({bounds:?})")));
    }

    let (tree, extents) = cantor_pieces(a.points(), PIECE_SCALE * delta, depth, crate::rng::child_seed(seed, 1))?;
    let ub = hausdorff_between(x, &tree)?.ub;
    if !(ub < eps) {
        return Err(Error::Construction(format!(
            "Hausdorff bound {ub:e} is not below eps = {eps:e}"
        )));
    }
    let balls: Vec<Ball> = a
        .points()
        .iter()
        .map(|c| Ball::new(c.clone(), delta))
        .collect::<Result<_>>()?;
    let robustness = SHRINK * extents.iter().map(|e| delta - e).fold(f64::INFINITY, f64::min);
    let certificate = ZkCertificate {
        k,
        dim: n,
        diameters: vec![2.0 * delta; balls.len()],
        balls,
        delta,
        generating_set: a,
        lambda,
        robustness_radius: robustness,
    };
    Ok(ZkOutcome {
        tree,
        certificate,
        hausdorff_ub: ub,
        delta_bounds: bounds,
    })
}
