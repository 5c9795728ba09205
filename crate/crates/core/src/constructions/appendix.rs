use crate::ball_system::{hausdorff_between, standard_cantor_along, BallTree};
use crate::error::{Error, Result};
use crate::geom::{diameter, hausdorff_distance, min_pairwise_distance, Ball, Point, PointSet};
use crate::grassmann::Subspace;

use super::{approximate_leaves, check_depth, SHRINK};

/// A ball with its subtree, before flattening into levels.
struct Nested {
    ball: Ball,
    children: Vec<Nested>,
}

impl Nested {
    fn translate(&mut self, v: &[f64]) {
        self.ball.center = self.ball.center.translate(v);
        for c in &mut self.children {
            c.translate(v);
        }
    }

    fn into_tree(self, dim: usize) -> Result<BallTree> {
        let mut levels: Vec<Vec<Ball>> = vec![];
        let mut parents: Vec<Vec<usize>> = vec![];
        let mut frontier = vec![(self, usize::MAX)];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            let mut balls = Vec::with_capacity(frontier.len());
            let mut pars = Vec::with_capacity(frontier.len());
            for (i, (node, parent)) in frontier.into_iter().enumerate() {
                balls.push(node.ball);
                if parent != usize::MAX {
                    pars.push(parent);
                }
                next.extend(node.children.into_iter().map(|c| (c, i)));
            }
            levels.push(balls);
            parents.push(pars);
            frontier = next;
        }
        BallTree::new(dim, levels, parents)
    }
}

/// Ratio-1/4 Cantor pattern in `B(center, radius)` along the unit vector `v`.
fn fiber(center: Point, radius: f64, v: &[f64], depth: usize) -> Nested {
    let children = if depth == 0 {
        vec![]
    } else {
        [-0.5, 0.5]
            .iter()
            .map(|s| {
                let off: Vec<f64> = v.iter().map(|x| x * s * radius).collect();
                fiber(center.translate(&off), 0.25 * radius, v, depth - 1)
            })
            .collect()
    };
    Nested {
        ball: Ball { center, radius },
        children,
    }
}

/// Bisects `idx` (net points with coordinates `coords` in `L`) recursively;
/// each cell is realized by stacking its two halves along the fiber `v`.
fn bisect(idx: &mut [usize], coords: &[Vec<f64>], net: &[Point], v: &[f64], r0: f64, depth: usize) -> Nested {
    if idx.len() == 1 {
        return fiber(net[idx[0]].clone(), r0, v, depth);
    }
    let ell = coords[0].len();
    let spread = |axis: usize| {
        let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
            (lo.min(coords[i][axis]), hi.max(coords[i][axis]))
        });
        hi - lo
    };
    let axis = (0..ell)
        .max_by(|&a, &b| spread(a).total_cmp(&spread(b)))
        .expect("dim L >= 1");
    idx.sort_by(|&a, &b| coords[a][axis].total_cmp(&coords[b][axis]).then(a.cmp(&b)));
    let mid = idx.len() / 2;
    let (left, right) = idx.split_at_mut(mid);
    let mut a = bisect(left, coords, net, v, r0, depth);
    let mut b = bisect(right, coords, net, v, r0, depth);
    // Separate the halves along the fiber; the offset is orthogonal to L, so
    // it never moves projections.
    let s = 1.01 * (a.ball.radius + b.ball.radius);
    a.translate(&v.iter().map(|x| -0.5 * s * x).collect::<Vec<_>>());
    b.translate(&v.iter().map(|x| 0.5 * s * x).collect::<Vec<_>>());
    let center = Point(
        a.ball
            .center
            .0
            .iter()
            .zip(&b.ball.center.0)
            .map(|(x, y)| 0.5 * (x + y))
            .collect(),
    );
    let reach = [&a, &b]
        .iter()
        .map(|c| c.ball.center.dist(&center) + c.ball.radius)
        .fold(0.0, f64::max);
    let radius = (1.01 * reach).max(2.0 * a.ball.radius.max(b.ball.radius));
    Nested {
        ball: Ball { center, radius },
        children: vec![a, b],
    }
}

/// Cantor ball system whose projection onto `L` is the net `ynet` (a finite
/// subset of `L`): the graph of the bisection coding of the net, realized with
/// the Cantor coordinate along a line `V` in the orthogonal complement of `L`.
///
/// Each net point carries a ratio-1/4 Cantor pattern of the given depth along
/// `V`; halves of every bisection cell are stacked along `V`. Leaf centers
/// project exactly onto the net points.
pub fn graph_surjection_cantor(ynet: &PointSet, l: &Subspace, depth: usize) -> Result<BallTree> {
    check_depth(depth)?;
    let n = l.ambient();
    if l.dim() == 0 || l.dim() == n {
        return Err(Error::InvalidArgument(format!(
            "need 0 < dim L < N, got dim L = {} in R^{n}",
            l.dim()
        )));
    }
    if ynet.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: ynet.dim(),
        });
    }
    let unit = diameter(ynet.points()).max(ynet.points().iter().map(Point::norm).fold(0.0, f64::max)).max(1.0);
    let mut net: Vec<Point> = Vec::new();
    for y in ynet.points() {
        if l.distance_to(&y.0) > 1e-9 * unit {
            return Err(Error::InvalidArgument(format!("net point {:?} does not lie in L", y.0)));
        }
        if !net.iter().any(|p| p.dist(y) <= 1e-12 * unit) {
            net.push(y.clone());
        }
    }
    let v = l.complement().frame()[0].clone();
    let coords: Vec<Vec<f64>> = net.iter().map(|p| l.coords(&p.0)).collect();
    let spread = diameter(&net);
    let r0 = 0.25 * if spread > 0.0 { spread } else { 1.0 };
    let mut idx: Vec<usize> = (0..net.len()).collect();
    bisect(&mut idx, &coords, &net, &v, r0, depth).into_tree(n)
}

/// Hausdorff distance between the projected leaf centers of `t` and `ynet`.
pub fn projection_defect(t: &BallTree, ynet: &PointSet, l: &Subspace) -> Result<f64> {
    let proj: Vec<Point> = t
        .leaf_centers()
        .iter()
        .map(|c| l.project(c))
        .collect::<Result<_>>()?;
    hausdorff_distance(&proj, ynet.points())
}

/// Replaces `x` by short Cantor segments parallel to `L`: for each point
/// `a_j` of a general-position approximation, a ratio-1/4 Cantor pattern
/// along the first frame vector of `L` in `B(a_j, r/2)`. `r` is also below
/// half the smallest distance between projections `p_L a_j`, so `p_L` of the
/// result is a disjoint union of linear Cantor patterns.
pub fn densify_for_l(x: &BallTree, eps: f64, l: &Subspace, depth: usize, seed: u64) -> Result<BallTree> {
    check_depth(depth)?;
    if l.dim() == 0 {
        return Err(Error::InvalidArgument("L must be nonzero".into()));
    }
    if l.ambient() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: l.ambient(),
        });
    }
    let (a, eps_a) = approximate_leaves(x, eps, seed)?;
    let proj: Vec<Point> = a.points().iter().map(|p| l.project(p)).collect::<Result<_>>()?;
    let r = SHRINK
        * (0.5 * min_pairwise_distance(a.points()))
            .min(0.5 * min_pairwise_distance(&proj))
            .min(eps_a);
    if !(r > 0.0) {
        return Err(Error::Construction(format!(
            "projections of the approximation collide (r = {r:e})"
        )));
    }
    let e = &l.frame()[0];
    let pieces: Vec<BallTree> = a
        .points()
        .iter()
        .map(|c| standard_cantor_along(&Ball::new(c.clone(), 0.5 * r)?, depth, e))
        .collect::<Result<_>>()?;
    let k = BallTree::union(&pieces)?;
    let ub = hausdorff_between(x, &k)?.ub;
    if !(ub < eps) {
        return Err(Error::Construction(format!(
            "Hausdorff bound {ub:e} is not below eps = {eps:e}"
        )));
    }
    Ok(k)
}
