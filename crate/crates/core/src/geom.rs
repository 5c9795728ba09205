//! Points, balls and finite point sets in R^N: Hausdorff distance, farthest-point
//! nets and a numeric general-position margin.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// A point of R^N. Serializes as a bare JSON array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("point of dimension 0".into()));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Point(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn dist2(&self, other: &Point) -> f64 {
        dist2(&self.0, &other.0)
    }

    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn sub(&self, other: &Point) -> Vec<f64> {
        self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()
    }

    pub fn translate(&self, v: &[f64]) -> Point {
        Point(self.0.iter().zip(v).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, c: f64) -> Point {
        Point(self.0.iter().map(|a| a * c).collect())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Closed ball `B(center, radius)`; the open ball with the same data is `O(center, radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    #[serde(rename = "c")]
    pub center: Point,
    #[serde(rename = "r")]
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Distance between the two closed balls (negative when they overlap).
    pub fn gap(&self, other: &Ball) -> f64 {
        self.center.dist(&other.center) - self.radius - other.radius
    }

    pub fn is_disjoint(&self, other: &Ball) -> bool {
        self.gap(other) > 0.0
    }

    /// True when `inner` lies in the open interior of `self`.
    pub fn contains_in_interior(&self, inner: &Ball) -> bool {
        self.center.dist(&inner.center) + inner.radius < self.radius
    }

    pub fn contains_point_in_interior(&self, p: &Point) -> bool {
        self.center.dist(p) < self.radius
    }
}

/// A nonempty finite set of points of a common dimension. Serializes as a JSON
/// array of arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct PointSet {
    points: Vec<Point>,
}

impl TryFrom<Vec<Point>> for PointSet {
    type Error = Error;

    fn try_from(points: Vec<Point>) -> Result<Self> {
        PointSet::new(points)
    }
}

impl From<PointSet> for Vec<Point> {
    fn from(s: PointSet) -> Self {
        s.points
    }
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptySet)?;
        let dim = first.dim();
        if dim == 0 {
            return Err(Error::InvalidArgument("point of dimension 0".into()));
        }
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            if p.0.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(PointSet { points })
    }

    pub fn from_coords(rows: Vec<Vec<f64>>) -> Result<Self> {
        PointSet::new(rows.into_iter().map(Point).collect())
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn scaled(&self, c: f64) -> PointSet {
        PointSet {
            points: self.points.iter().map(|p| p.scale(c)).collect(),
        }
    }
}

fn check_same_dim(p: &[Point], q: &[Point]) -> Result<()> {
    let (a, b) = match (p.first(), q.first()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::EmptySet),
    };
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// `max_{p in P} min_{q in Q} d(p, q)`.
pub fn directed_hausdorff(p: &[Point], q: &[Point]) -> Result<f64> {
    check_same_dim(p, q)?;
    let mut worst = 0.0f64;
    for a in p {
        let mut best = f64::INFINITY;
        for b in q {
            let d = a.dist2(b);
            if d < best {
                best = d;
                // Cannot raise the maximum any further.
                if best <= worst {
                    break;
                }
            }
        }
        worst = worst.max(best);
    }
    Ok(worst.sqrt())
}

/// Hausdorff distance between two nonempty finite point sets.
pub fn hausdorff_distance(p: &[Point], q: &[Point]) -> Result<f64> {
    Ok(directed_hausdorff(p, q)?.max(directed_hausdorff(q, p)?))
}

pub fn diameter(points: &[Point]) -> f64 {
    let mut d = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            d = d.max(a.dist2(b));
        }
    }
    d.sqrt()
}

/// Smallest distance between two distinct entries (`inf` for a singleton).
pub fn min_pairwise_distance(points: &[Point]) -> f64 {
    let mut d = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            d = d.min(a.dist2(b));
        }
    }
    d.sqrt()
}

/// Numeric general-position margin of a finite point system.
///
/// `value` is the minimum, over all subsystems of `k + 1 <= N + 1` points, of the
/// smallest singular value of the `k x N` matrix of difference vectors
/// `x_i - x_0` (x_0 the lowest-indexed point of the subsystem). It is zero
/// exactly when some subsystem is affinely dependent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralPositionMargin {
    /// `None` for a single point, where no subsystem can degenerate.
    #[serde(rename = "margin")]
    pub value: Option<f64>,
    /// Indices of the subsystem attaining the minimum.
    pub subset: Vec<usize>,
    /// Largest number of difference vectors `k` over the examined subsystems.
    pub max_rows: usize,
}

impl GeneralPositionMargin {
    pub fn is_positive(&self) -> bool {
        self.value.map_or(true, |v| v > 0.0)
    }

    pub fn value_or_inf(&self) -> f64 {
        self.value.unwrap_or(f64::INFINITY)
    }

    /// Radius `eta` such that moving every point by less than `eta` keeps the
    /// system in general position: a displacement below `eta` changes each
    /// difference row by less than `2 eta`, hence the matrix by less than
    /// `2 eta sqrt(k)` in operator norm.
    pub fn stability_radius(&self) -> f64 {
        match self.value {
            None => f64::INFINITY,
            Some(v) => v / (2.0 * (self.max_rows.max(1) as f64).sqrt()),
        }
    }
}

/// Relative threshold under which a singular value is treated as zero.
const RANK_TOL: f64 = 1e-12;

fn smallest_singular_value(rows: &[Vec<f64>]) -> f64 {
    let scale = rows.iter().map(|r| norm(r)).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let s = match rows.len() {
        1 => scale,
        2 => {
            let (u, v) = (&rows[0], &rows[1]);
            // |u ^ v|^2 = det(Gram), accumulated without cancellation.
            let mut wedge2 = 0.0;
            for i in 0..u.len() {
                for j in i + 1..u.len() {
                    let w = u[i] * v[j] - u[j] * v[i];
                    wedge2 += w * w;
                }
            }
            let a = dot(u, u);
            let c = dot(v, v);
            let b = dot(u, v);
            let smax2 = 0.5 * (a + c + ((a - c) * (a - c) + 4.0 * b * b).sqrt());
            if smax2 == 0.0 {
                0.0
            } else {
                (wedge2 / smax2).sqrt()
            }
        }
        k => {
            let n = rows[0].len();
            if k > n {
                return 0.0;
            }
            let m = DMatrix::from_fn(k, n, |i, j| rows[i][j]);
            m.singular_values().min()
        }
    };
    if s <= RANK_TOL * scale {
        0.0
    } else {
        s
    }
}

/// Visits every k-subset of `0..n` in lexicographic order until `f` returns false.
pub(crate) fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Computes the general-position margin of `points` in R^N.
pub fn general_position_margin(points: &[Point]) -> GeneralPositionMargin {
    let n = points.len();
    let dim = points.first().map_or(1, Point::dim);
    let max_size = (dim + 1).min(n);
    let mut best: Option<f64> = None;
    let mut subset = Vec::new();
    if max_size < 2 {
        return GeneralPositionMargin {
            value: None,
            subset: (0..n).collect(),
            max_rows: 0,
        };
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(max_size);
    'sizes: for size in 2..=max_size {
        let mut stop = false;
        for_each_combination(n, size, |idx| {
            rows.clear();
            for &i in &idx[1..] {
                rows.push(points[i].sub(&points[idx[0]]));
            }
            let s = smallest_singular_value(&rows);
            if best.map_or(true, |b| s < b) {
                best = Some(s);
                subset = idx.to_vec();
            }
            if s == 0.0 {
                stop = true;
                return false;
            }
            true
        });
        if stop {
            break 'sizes;
        }
    }
    GeneralPositionMargin {
        value: best,
        subset,
        max_rows: max_size - 1,
    }
}

/// Numerical affine rank of a point system (rank of its difference matrix).
pub fn affine_rank(points: &[Point]) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let n = points[0].dim();
    let k = points.len() - 1;
    let m = DMatrix::from_fn(k, n, |i, j| points[i + 1].0[j] - points[0].0[j]);
    let sv = m.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-9 * top).count()
}

/// Default cap on resampling rounds in [`perturb_to_general_position`].
pub const MAX_PERTURB_ATTEMPTS: usize = 64;

/// Moves every point by less than `bound` so that the result is in general
/// position. A system that already is in general position is returned as is.
pub fn perturb_to_general_position(points: &PointSet, bound: f64, seed: u64) -> Result<PointSet> {
    perturb_to_general_position_with(points, bound, seed, MAX_PERTURB_ATTEMPTS)
}

pub fn perturb_to_general_position_with(
    points: &PointSet,
    bound: f64,
    seed: u64,
    max_attempts: usize,
) -> Result<PointSet> {
    if !(bound > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "perturbation bound must be positive, got {bound}"
        )));
    }
    if general_position_margin(points.points()).is_positive() {
        return Ok(points.clone());
    }
    let dim = points.dim();
    let mut rng = rng::seeded(seed, rng::stream::PERTURB);
    for _ in 0..max_attempts {
        let moved: Vec<Point> = points
            .points()
            .iter()
            .map(|p| p.translate(&rng::in_ball(&mut rng, dim, bound)))
            .collect();
        if general_position_margin(&moved).is_positive() {
            return PointSet::new(moved);
        }
    }
    Err(Error::PerturbationFailed {
        attempts: max_attempts,
    })
}

/// Greedy farthest-point net: returns indices of a subset whose covering radius
/// over `points` is strictly below `radius`, together with that covering radius.
pub fn farthest_point_net(points: &[Point], radius: f64) -> (Vec<usize>, f64) {
    let mut chosen = vec![0usize];
    let mut nearest: Vec<f64> = points.iter().map(|p| p.dist(&points[0])).collect();
    loop {
        let (far, &dmax) = nearest
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        if dmax < radius {
            return (chosen, dmax);
        }
        chosen.push(far);
        for (d, p) in nearest.iter_mut().zip(points) {
            *d = d.min(p.dist(&points[far]));
        }
    }
}

/// Finite approximation `A` of `k` with `d_H(k, A) < eps`, `|A| >= N + 1` and
/// `A` in general position.
///
/// Built from a greedy `eps/2`-net of `k`, padded by repeating net points when
/// it has fewer than `N + 1` elements, then displaced by less than `eps/2`.
pub fn finite_general_position_approx(k: &PointSet, eps: f64, seed: u64) -> Result<PointSet> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "approximation radius must be positive, got {eps}"
        )));
    }
    let (idx, _) = farthest_point_net(k.points(), eps / 2.0);
    let mut net: Vec<Point> = idx.iter().map(|&i| k.points()[i].clone()).collect();
    let needed = k.dim() + 1;
    let base = net.len();
    let mut j = 0;
    while net.len() < needed {
        net.push(net[j % base].clone());
        j += 1;
    }
    perturb_to_general_position(&PointSet::new(net)?, eps / 2.0, seed)
}

/// Checks the three postconditions of [`finite_general_position_approx`].
pub fn is_admissible_approximation(k: &PointSet, a: &PointSet, eps: f64) -> bool {
    a.len() >= k.dim() + 1
        && general_position_margin(a.points()).is_positive()
        && hausdorff_distance(k.points(), a.points()).map_or(false, |d| d < eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(rows: &[&[f64]]) -> PointSet {
        PointSet::from_coords(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn hausdorff_trivial_cases() {
        let a = ps(&[&[0.0, 0.0]]);
        assert_eq!(hausdorff_distance(a.points(), a.points()).unwrap(), 0.0);
        let p = ps(&[&[0.0]]);
        let q = ps(&[&[3.0]]);
        assert_eq!(hausdorff_distance(p.points(), q.points()).unwrap(), 3.0);
    }

    #[test]
    fn hausdorff_empty_is_error() {
        let a = ps(&[&[0.0, 0.0]]);
        assert_eq!(hausdorff_distance(&[], a.points()), Err(Error::EmptySet));
        assert!(PointSet::new(vec![]).is_err());
    }

    #[test]
    fn hausdorff_dimension_mismatch() {
        let a = ps(&[&[0.0, 0.0]]);
        let b = ps(&[&[0.0]]);
        assert!(matches!(
            hausdorff_distance(a.points(), b.points()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn margin_degenerate_systems_are_zero() {
        let collinear = ps(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]]);
        assert_eq!(general_position_margin(collinear.points()).value, Some(0.0));
        let skew = ps(&[&[0.1, 0.3], &[0.4, 0.5], &[1.0, 0.9]]);
        assert_eq!(general_position_margin(skew.points()).value, Some(0.0));
        let repeated = ps(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 0.0], &[5.0, 7.0]]);
        let m = general_position_margin(repeated.points());
        assert_eq!(m.value, Some(0.0));
        assert_eq!(m.subset, vec![0, 2]);
    }

    #[test]
    fn margin_singleton_is_unbounded() {
        let one = ps(&[&[1.0, 2.0]]);
        let m = general_position_margin(one.points());
        assert!(m.is_positive());
        assert_eq!(m.value, None);
    }

    #[test]
    fn margin_scale_equivariant() {
        let a = ps(&[&[0.0, 0.0], &[1.0, 0.2], &[0.3, 1.1], &[1.7, 1.3]]);
        let m1 = general_position_margin(a.points()).value.unwrap();
        let m3 = general_position_margin(a.scaled(3.0).points()).value.unwrap();
        assert!((m3 - 3.0 * m1).abs() < 1e-12 * m3);
    }

    #[test]
    fn perturb_leaves_general_sets_alone() {
        let a = ps(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(perturb_to_general_position(&a, 0.5, 3).unwrap(), a);
    }

    #[test]
    fn perturb_collinear_triple() {
        let a = ps(&[&[0.0, 0.0], &[1.0, 0.0], &[2.0, 0.0]]);
        let b = perturb_to_general_position(&a, 1e-3, 11).unwrap();
        assert!(general_position_margin(b.points()).value.unwrap() > 0.0);
        for (p, q) in a.points().iter().zip(b.points()) {
            assert!(p.dist(q) < 1e-3);
        }
        assert_eq!(b, perturb_to_general_position(&a, 1e-3, 11).unwrap());
    }

    #[test]
    fn perturb_rejects_bad_bound() {
        let a = ps(&[&[0.0, 0.0]]);
        assert!(perturb_to_general_position(&a, 0.0, 0).is_err());
    }

    #[test]
    fn perturb_reports_exhaustion() {
        let a = ps(&[&[0.0, 0.0], &[0.0, 0.0]]);
        assert_eq!(
            perturb_to_general_position_with(&a, 1e-3, 0, 0),
            Err(Error::PerturbationFailed { attempts: 0 })
        );
    }

    #[test]
    fn perturb_grid() {
        let mut rows = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                rows.push(vec![i as f64, j as f64]);
            }
        }
        let grid = PointSet::from_coords(rows).unwrap();
        let out = perturb_to_general_position(&grid, 1e-2, 5).unwrap();
        assert!(general_position_margin(out.points()).value.unwrap() > 0.0);
        for (p, q) in grid.points().iter().zip(out.points()) {
            assert!(p.dist(q) < 1e-2);
        }
    }

    #[test]
    fn approx_single_point_pads_to_simplex() {
        let k = ps(&[&[0.5, -0.5]]);
        let a = finite_general_position_approx(&k, 0.1, 1).unwrap();
        assert_eq!(a.len(), 3);
        assert!(is_admissible_approximation(&k, &a, 0.1));
    }

    #[test]
    fn approx_keeps_admissible_input_valid() {
        let k = ps(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        assert!(is_admissible_approximation(&k, &k, 10.0));
        let a = finite_general_position_approx(&k, 10.0, 2).unwrap();
        assert!(is_admissible_approximation(&k, &a, 10.0));
    }

    #[test]
    fn net_covering_radius_is_strict() {
        let k = ps(&[&[0.0], &[1.0], &[2.0], &[3.0]]);
        let (idx, cov) = farthest_point_net(k.points(), 1.0);
        assert!(cov < 1.0);
        assert_eq!(idx.len(), 4);
        let (idx, cov) = farthest_point_net(k.points(), 1.5);
        assert!(cov < 1.5);
        assert_eq!(idx, vec![0, 3]);
    }

    #[test]
    fn combinations_enumerate_all() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |c| {
            seen.push(c.to_vec());
            true
        });
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1]);
        assert_eq!(seen[5], vec![2, 3]);
    }

    #[test]
    fn affine_rank_basic() {
        let a = ps(&[&[0.0, 0.0], &[1.0, 0.0], &[2.0, 0.0]]);
        assert_eq!(affine_rank(a.points()), 1);
        let b = ps(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 2.0]]);
        assert_eq!(affine_rank(b.points()), 2);
    }

    #[test]
    fn point_set_json_round_trip() {
        let a = ps(&[&[0.0, 1.5], &[2.0, -1.0]]);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "[[0.0,1.5],[2.0,-1.0]]");
        let back: PointSet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<PointSet>("[]").is_err());
        assert!(serde_json::from_str::<PointSet>("[[1.0],[1.0,2.0]]").is_err());
    }
}
