use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ball_system::{hausdorff_between, BallTree};
use crate::error::{Error, Result};
use crate::geom::{affine_rank, general_position_margin, min_pairwise_distance, Point, PointSet};
use crate::grassmann::{random_subspace_with, Subspace};
use crate::rng;

use super::{approximate_leaves, cantor_pieces, check_depth, PIECE_SCALE, SHRINK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RobustKind {
    /// No projection onto a nonzero subspace is a single point.
    NoPointProjection,
    /// No projection onto an admissible subspace has a `1/k`-isolated point.
    NoIsolatedPoint,
}

/// A ball system `tree` together with a radius `delta` such that every
/// compactum within Hausdorff distance `delta` of it has the property `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessCertificate {
    pub kind: RobustKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    pub dim: usize,
    pub tree: BallTree,
    pub delta: f64,
    /// Radius of the open balls `O(a_i, r)` around the generating points.
    pub r: f64,
    pub generating_set: PointSet,
    /// `(N+1)`-point clusters `A_i` inside `O(a_i, r)` (isolated-point kind).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clusters: Vec<PointSet>,
    /// Radius of the open balls around cluster points (isolated-point kind).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Displacement below which the selected points stay in general position.
    pub stability_radius: f64,
    /// Largest distance from a selection center to the boundary of its piece.
    pub piece_extent: f64,
    /// Upper bound on the Hausdorff distance from the input system.
    pub hausdorff_ub: f64,
}

impl RobustnessCertificate {
    /// The open balls a nearby compactum must meet, with their radius.
    fn selection_balls(&self) -> (Vec<&Point>, f64) {
        match self.kind {
            RobustKind::NoPointProjection => (self.generating_set.points().iter().collect(), self.r),
            RobustKind::NoIsolatedPoint => (
                self.clusters.iter().flat_map(|c| c.points()).collect(),
                self.rho.expect("isolated-point certificates carry rho"),
            ),
        }
    }
}

fn max_extent(extents: &[f64]) -> f64 {
    extents.iter().copied().fold(0.0, f64::max)
}

/// Replaces `x` by finitely many small Cantor pieces around a general-position
/// set `A`, `|A| >= N + 1`, such that every compactum `Y` within `delta` of the
/// result meets every `O(a_i, r)`, and any choice of one point of `Y` in each
/// of these balls is in general position. Such a `Y` has no one-point
/// projection onto a nonzero subspace.
///
/// `r` stays below the stability radius of `A`; pieces live in `B(a_i, r/16)`
/// and `delta = 0.9 min_i (r - extent_i)`.
pub fn avoid_one_point_projections(x: &BallTree, eps: f64, depth: usize, seed: u64) -> Result<RobustnessCertificate> {
    check_depth(depth)?;
    let (a, eps_a) = approximate_leaves(x, eps, seed)?;
    let n = a.dim();
    let margin = general_position_margin(a.points());
    let stability = margin.stability_radius();
    let half_gap = 0.5 * min_pairwise_distance(a.points());
    let r = SHRINK * half_gap.min(eps_a).min(stability);
    if !(r > 0.0) {
        return Err(Error::Construction(format!("no admissible radius (r = {r:e})")));
    }
    let (tree, extents) = cantor_pieces(a.points(), PIECE_SCALE * r, depth, rng::child_seed(seed, 1))?;
    let delta = SHRINK * extents.iter().map(|e| r - e).fold(f64::INFINITY, f64::min);
    let ub = hausdorff_between(x, &tree)?.ub;
    if !(ub < eps) {
        return Err(Error::Construction(format!(
            "Hausdorff bound {ub:e} is not below eps = {eps:e}"
        )));
    }
    Ok(RobustnessCertificate {
        kind: RobustKind::NoPointProjection,
        k: None,
        dim: n,
        tree,
        delta,
        r,
        generating_set: a,
        clusters: vec![],
        rho: None,
        stability_radius: stability,
        piece_extent: max_extent(&extents),
        hausdorff_ub: ub,
    })
}

/// Vertices of a regular simplex in `R^n` with circumradius 1, centered at 0.
fn regular_simplex(n: usize) -> Vec<Vec<f64>> {
    let alpha = (1.0 - ((n + 1) as f64).sqrt()) / n as f64;
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    v.push(vec![alpha; n]);
    let centroid: Vec<f64> = (0..n).map(|j| v.iter().map(|p| p[j]).sum::<f64>() / (n + 1) as f64).collect();
    for p in &mut v {
        for (x, c) in p.iter_mut().zip(&centroid) {
            *x -= c;
        }
        let s = crate::geom::norm(p);
        for x in p.iter_mut() {
            *x /= s;
        }
    }
    v
}

/// Rotations tried per cluster in [`avoid_isolated_projections`].
const ORIENTATION_CANDIDATES: usize = 48;

fn place_simplex(simplex: &[Vec<f64>], center: &Point, radius: f64, frame: &[Vec<f64>]) -> Vec<Point> {
    simplex
        .iter()
        .map(|v| {
            let mut c = center.0.clone();
            for (coef, f) in v.iter().zip(frame) {
                for (x, fx) in c.iter_mut().zip(f) {
                    *x += radius * coef * fx;
                }
            }
            Point(c)
        })
        .collect()
}

/// Smallest altitude of the triangle `u v w`: twice its area over its longest side.
fn altitude(u: &Point, v: &Point, w: &Point) -> f64 {
    let a = v.sub(u);
    let b = w.sub(u);
    let c = w.sub(v);
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let (aa, bb, ab) = (dot(&a, &a), dot(&b, &b), dot(&a, &b));
    let area2 = (aa * bb - ab * ab).max(0.0).sqrt();
    let longest = aa.max(bb).max(dot(&c, &c)).sqrt();
    area2 / longest
}

/// Thinnest triangle with an edge inside the cluster `pts`. For `N = 2` the
/// minimum altitude over all triangles of a point set is exactly its
/// `lambda`, so maximizing this keeps the next stage's `lambda` from
/// collapsing; for larger `N` it is a proxy.
fn thinnest_altitude(pts: &[Point], others: &[&Point]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            for x in others.iter().copied().chain(&pts[j + 1..]) {
                m = m.min(altitude(&pts[i], &pts[j], x));
            }
        }
    }
    m
}

/// Replaces `x` by clusters: around each `a_i` of a general-position set `A`,
/// the `N + 1` vertices `a_ij` of a regular simplex of circumradius `r/2`,
/// rotated (best of several random candidates) to avoid thin triangles with
/// the other clusters, `r < 1/(2k)`, each carrying a small Cantor piece.
///
/// Every compactum `Y` within `delta` of the result meets each `O(a_ij, rho)`
/// and lies in their union; picking one point per ball of a cluster gives
/// `N + 1` points in general position, so every projection of the cluster's
/// part of `Y` onto a nonzero subspace has at least two points and diameter
/// `< 2r < 1/k`. Hence no projected point is `1/k`-isolated.
pub fn avoid_isolated_projections(
    x: &BallTree,
    eps: f64,
    k: u32,
    depth: usize,
    seed: u64,
) -> Result<RobustnessCertificate> {
    check_depth(depth)?;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let n = x.dim();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "isolated-point step needs N >= 2: no subspace with 0 < dim L < N".into(),
        ));
    }
    let (a, eps_a) = approximate_leaves(x, eps, seed)?;
    let half_gap = 0.5 * min_pairwise_distance(a.points());
    let r = SHRINK * half_gap.min(eps_a).min(0.5 / k as f64);

    let mut rot = rng::seeded(seed, rng::stream::SIMPLEX);
    let simplex = regular_simplex(n);
    let mut clusters: Vec<PointSet> = Vec::with_capacity(a.len());
    let mut rho = f64::INFINITY;
    let mut stability = f64::INFINITY;
    for (i, ai) in a.points().iter().enumerate() {
        // Points the cluster is seen against: vertices placed so far and the
        // centers of the clusters still to come.
        let others: Vec<&Point> = clusters
            .iter()
            .flat_map(|c| c.points())
            .chain(&a.points()[i + 1..])
            .collect();
        let mut best: Option<(f64, Vec<Point>)> = None;
        for _ in 0..ORIENTATION_CANDIDATES {
            let q = random_subspace_with(&mut rot, n, n);
            let pts = place_simplex(&simplex, ai, 0.5 * r, q.frame());
            let score = thinnest_altitude(&pts, &others);
            if best.as_ref().map_or(true, |b| score > b.0) {
                best = Some((score, pts));
            }
        }
        let pts = best.expect("at least one candidate").1;
        let s = general_position_margin(&pts).stability_radius();
        stability = stability.min(s);
        rho = rho.min(0.5 * min_pairwise_distance(&pts)).min(0.5 * r).min(s);
        clusters.push(PointSet::new(pts)?);
    }
    rho *= SHRINK;
    if !(rho > 0.0) {
        return Err(Error::Construction(format!("no admissible cluster radius (rho = {rho:e})")));
    }
    let centers: Vec<Point> = clusters.iter().flat_map(|c| c.points().iter().cloned()).collect();
    let (tree, extents) = cantor_pieces(&centers, PIECE_SCALE * rho, depth, rng::child_seed(seed, 1))?;
    let delta = SHRINK * extents.iter().map(|e| rho - e).fold(f64::INFINITY, f64::min);
    let ub = hausdorff_between(x, &tree)?.ub;
    if !(ub < eps) {
        return Err(Error::Construction(format!(
            "Hausdorff bound {ub:e} is not below eps = {eps:e}"
        )));
    }
    Ok(RobustnessCertificate {
        kind: RobustKind::NoIsolatedPoint,
        k: Some(k),
        dim: n,
        tree,
        delta,
        r,
        generating_set: a,
        clusters,
        rho: Some(rho),
        stability_radius: stability,
        piece_extent: max_extent(&extents),
        hausdorff_ub: ub,
    })
}

// ---------------------------------------------------------------------------
// audits

/// A finite compactum within Hausdorff distance `< delta` of the certified
/// set: every leaf center of the certificate's tree moved by less than
/// `delta - leaf_radius` in a random direction.
pub fn jittered_compactum(cert: &RobustnessCertificate, seed: u64) -> Result<PointSet> {
    let reach = cert.delta - cert.tree.leaf_radius();
    if !(reach > 0.0) {
        return Err(Error::Construction(format!(
            "leaf radius {:e} leaves no room inside delta = {:e}",
            cert.tree.leaf_radius(),
            cert.delta
        )));
    }
    let mut r = rng::seeded(seed, rng::stream::AUDIT);
    let pts = cert
        .tree
        .leaf_centers()
        .into_iter()
        .map(|c| Point(c.0.iter().zip(rng::in_ball(&mut r, cert.dim, reach)).map(|(a, b)| a + b).collect()))
        .collect();
    PointSet::new(pts)
}

/// Checks the one-point conclusion on a sample `y`: every selection ball is
/// met, and a random selection of one point per ball spans `R^N` affinely
/// with positive general-position margin.
pub fn audit_one_point(cert: &RobustnessCertificate, y: &[Point], seed: u64) -> std::result::Result<(), String> {
    let (centers, radius) = cert.selection_balls();
    let mut r = rng::seeded(seed, rng::stream::AUDIT);
    let mut selection = Vec::with_capacity(centers.len());
    for (i, c) in centers.iter().enumerate() {
        let inside: Vec<&Point> = y.iter().filter(|p| p.dist(c) < radius).collect();
        if inside.is_empty() {
            return Err(format!("selection ball {i} is not met"));
        }
        selection.push(inside[r.gen_range(0..inside.len())].clone());
    }
    if cert.kind == RobustKind::NoIsolatedPoint {
        // Each cluster alone must be in general position.
        let m = cert.dim + 1;
        for (i, chunk) in selection.chunks(m).enumerate() {
            if !general_position_margin(chunk).is_positive() || affine_rank(chunk) != cert.dim {
                return Err(format!("cluster {i} selection is degenerate"));
            }
        }
        return Ok(());
    }
    let rank = affine_rank(&selection);
    if rank != cert.dim || !general_position_margin(&selection).is_positive() {
        return Err(format!("selection has affine rank {rank}, expected {}", cert.dim));
    }
    Ok(())
}

/// Checks that no point of `p_L y` is `1/k`-isolated: each has a different
/// projected point at distance `< 1/k`. Returns the offending index.
pub fn audit_isolated(y: &[Point], l: &Subspace, k: u32) -> std::result::Result<(), usize> {
    let h = 1.0 / k as f64;
    let proj: Vec<Vec<f64>> = y.iter().map(|p| l.coords(&p.0)).collect();
    let cell = |x: &[f64]| -> Vec<i64> { x.iter().map(|v| (v / h).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, p) in proj.iter().enumerate() {
        grid.entry(cell(p)).or_default().push(i);
    }
    let ell = l.dim();
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(ell as u32))
        .map(|mut code| {
            (0..ell)
                .map(|_| {
                    let d = (code % 3) as i64 - 1;
                    code /= 3;
                    d
                })
                .collect()
        })
        .collect();
    for (i, p) in proj.iter().enumerate() {
        let base = cell(p);
        let found = offsets.iter().any(|off| {
            let key: Vec<i64> = base.iter().zip(off).map(|(b, o)| b + o).collect();
            grid.get(&key).is_some_and(|members| {
                members.iter().any(|&j| {
                    let d = crate::geom::dist2(p, &proj[j]).sqrt();
                    d > 0.0 && d < h
                })
            })
        });
        if !found {
            return Err(i);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub kind: RobustKind,
    pub pass: bool,
    pub delta: f64,
    /// Upper bound on the Hausdorff distance between the certified system and
    /// the audited one; the certificate applies when it is below `delta`.
    pub hausdorff_ub: f64,
    pub within_delta: bool,
    pub subspaces: usize,
    pub failures: Vec<String>,
}

/// Checks that `y` lies within the certificate's radius and audits the
/// certified conclusion on its leaf centers (isolated kind: on `samples`
/// subspaces per admissible dimension).
pub fn verify_robustness(
    cert: &RobustnessCertificate,
    y: &BallTree,
    samples: usize,
    seed: u64,
) -> Result<RobustnessReport> {
    if y.dim() != cert.dim {
        return Err(Error::DimensionMismatch {
            expected: cert.dim,
            found: y.dim(),
        });
    }
    let ub = hausdorff_between(&cert.tree, y)?.ub;
    let within = ub < cert.delta;
    let pts = y.leaf_centers();
    let mut failures = Vec::new();
    if let Err(e) = audit_one_point(cert, &pts, seed) {
        failures.push(e);
    }
    let mut subspaces = 0;
    if cert.kind == RobustKind::NoIsolatedPoint {
        let k = cert.k.ok_or_else(|| Error::MalformedCertificate("missing k".into()))?;
        let mut r = rng::seeded(seed, rng::stream::SUBSPACE);
        for ell in 1..cert.dim {
            for _ in 0..samples {
                let l = random_subspace_with(&mut r, ell, cert.dim);
                subspaces += 1;
                if let Err(i) = audit_isolated(&pts, &l, k) {
                    failures.push(format!("point {i} is 1/k-isolated in a projection of dim {ell}"));
                    break;
                }
            }
        }
    }
    Ok(RobustnessReport {
        kind: cert.kind,
        pass: within && failures.is_empty(),
        delta: cert.delta,
        hausdorff_ub: ub,
        within_delta: within,
        subspaces,
        failures,
    })
}
