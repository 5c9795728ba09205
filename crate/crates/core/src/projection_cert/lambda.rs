//! The functional `lambda(A)`: the infimum, over linear subspaces `L` with
//! `0 < dim L < N` and ordered `(N+1)`-tuples of distinct points of `A`, of the
//! sum of consecutive distances after projecting onto `L`.
//!
//! Projecting further onto a line inside `L` never increases a projected
//! distance, so the infimum over all admissible `L` equals the infimum over
//! lines. Both the certified search and the lattice oracle parameterize lines
//! by one shared dyadic chart: angles in `[0, pi)` for `N = 2`, and the three
//! faces `x_axis = 1`, `(u, v) in [-1, 1]^2` of the cube for `N = 3`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{general_position_margin, norm, PointSet};
use crate::grassmann::{LineCell, Subspace};

/// Default number of chart cells the certified search may evaluate.
pub const DEFAULT_CELL_BUDGET: usize = 1_000_000;

/// Deepest chart level; dyadic parameters stay exact in `f64` well past it.
const MAX_LEVEL: u32 = 48;

/// Relative slack added to cell radii to absorb rounding.
const RADIUS_SLACK: f64 = 1.0 + 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaBracket {
    pub lb: f64,
    pub ub: f64,
    pub tol: f64,
    /// Tuple attaining `ub` (indices into `A`).
    pub tuple: Vec<usize>,
    /// Line attaining `ub`.
    pub subspace: Subspace,
    /// `max` over tuples of `sum_j |a_(i_j) - a_(i_(j+1))|`, the global
    /// Lipschitz constant of the tuple sums with respect to the subspace.
    pub lipschitz: f64,
    pub cells: usize,
    pub max_depth: u32,
}

impl LambdaBracket {
    pub fn width(&self) -> f64 {
        self.ub - self.lb
    }
}

/// Result of the lattice oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub value: f64,
    pub tuple: Vec<usize>,
    pub subspace: Subspace,
    /// Requested spacing and the dyadic level actually used.
    pub grid_step: f64,
    pub levels: u32,
    /// Chart cells visited (lines and plane normals).
    pub evaluated: usize,
}

// ---------------------------------------------------------------------------
// chart

/// Dyadic chart cell `[i, i+1] x [j, j+1]` in units of `2^-depth` of the
/// chart span (`j` unused for angles).
#[derive(Debug, Clone, Copy, PartialEq)]
struct ChartCell {
    axis: usize,
    i: u64,
    j: u64,
    depth: u32,
}

/// `a * 2^-level`, exact for the ranges used here.
fn dyadic(a: u64, level: u32) -> f64 {
    a as f64 * (-(level as f64)).exp2()
}

/// Unit direction at chart lattice point `(a, b)` of level `level`.
fn chart_point(ambient: usize, axis: usize, a: u64, b: u64, level: u32) -> Vec<f64> {
    if ambient == 2 {
        half_turn_direction(dyadic(a, level))
    } else {
        let u = -1.0 + 2.0 * dyadic(a, level);
        let v = -1.0 + 2.0 * dyadic(b, level);
        let w = LineCell::face_vector(axis, u, v);
        let n = norm(&w);
        w.iter().map(|x| x / n).collect()
    }
}

/// `(cos(pi q), sin(pi q))` for `q in [0, 1]`, reduced so that multiples of
/// `pi / 2` give exact axis directions.
fn half_turn_direction(q: f64) -> Vec<f64> {
    use std::f64::consts::PI;
    if q <= 0.25 {
        vec![(PI * q).cos(), (PI * q).sin()]
    } else if q <= 0.75 {
        let r = PI * (0.5 - q);
        vec![r.sin(), r.cos()]
    } else {
        let r = PI * (1.0 - q);
        vec![-r.cos(), r.sin()]
    }
}

impl ChartCell {
    fn roots(ambient: usize) -> Vec<ChartCell> {
        let faces = if ambient == 2 { 1 } else { 3 };
        (0..faces)
            .map(|axis| ChartCell {
                axis,
                i: 0,
                j: 0,
                depth: 0,
            })
            .collect()
    }

    fn center(&self, ambient: usize) -> Vec<f64> {
        chart_point(ambient, self.axis, 2 * self.i + 1, 2 * self.j + 1, self.depth + 1)
    }

    fn corners(&self, ambient: usize) -> Vec<Vec<f64>> {
        let l = self.depth;
        if ambient == 2 {
            (0..2).map(|da| chart_point(2, 0, self.i + da, 0, l)).collect()
        } else {
            let mut out = Vec::with_capacity(4);
            for da in 0..2 {
                for db in 0..2 {
                    out.push(chart_point(3, self.axis, self.i + da, self.j + db, l));
                }
            }
            out
        }
    }

    /// Bound on `|d - c|` over unit representatives `d` of lines in the
    /// closed cell, `c` the unit center.
    fn radius(&self, ambient: usize) -> f64 {
        let r = if ambient == 2 {
            let width = std::f64::consts::PI * dyadic(1, self.depth);
            2.0 * (0.25 * width).sin()
        } else {
            let half = dyadic(1, self.depth);
            let half_diag = std::f64::consts::SQRT_2 * half;
            let u = -1.0 + 2.0 * dyadic(2 * self.i + 1, self.depth + 1);
            let v = -1.0 + 2.0 * dyadic(2 * self.j + 1, self.depth + 1);
            let wc = LineCell::face_vector(self.axis, u, v);
            (2.0 * half_diag / (1.0 + norm(&wc))).min(2.0)
        };
        r * RADIUS_SLACK
    }

    fn split(&self, ambient: usize) -> Vec<ChartCell> {
        let d = self.depth + 1;
        if ambient == 2 {
            (0..2)
                .map(|di| ChartCell {
                    axis: 0,
                    i: 2 * self.i + di,
                    j: 0,
                    depth: d,
                })
                .collect()
        } else {
            let mut out = Vec::with_capacity(4);
            for di in 0..2 {
                for dj in 0..2 {
                    out.push(ChartCell {
                        axis: self.axis,
                        i: 2 * self.i + di,
                        j: 2 * self.j + dj,
                        depth: d,
                    });
                }
            }
            out
        }
    }
}

/// Lattice spacing of chart level `levels` (angle for `N = 2`, face parameter
/// for `N = 3`).
pub fn dyadic_grid_step(ambient: usize, levels: u32) -> f64 {
    let span = if ambient == 2 { std::f64::consts::PI } else { 2.0 };
    span * dyadic(1, levels)
}

// ---------------------------------------------------------------------------
// tuple sums

/// Per-pair data of `A`, plus scratch buffers for evaluating directions.
pub(crate) struct Evaluator {
    t: usize,
    n: usize,
    coords: Vec<f64>,
    /// `|a_i - a_j|`, row-major `t x t`.
    dist: Vec<f64>,
    x: Vec<f64>,
    w: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Line,
    /// Planes in `R^3` given by their unit normal.
    Plane,
}

impl Evaluator {
    pub(crate) fn new(a: &PointSet) -> Self {
        let t = a.len();
        let n = a.dim();
        let coords: Vec<f64> = a.points().iter().flat_map(|p| p.0.iter().copied()).collect();
        let mut dist = vec![0.0; t * t];
        for i in 0..t {
            for j in 0..t {
                dist[i * t + j] = a.points()[i].dist(&a.points()[j]);
            }
        }
        Evaluator {
            t,
            n,
            coords,
            dist,
            x: vec![0.0; t],
            w: vec![0.0; t * t],
        }
    }

    fn project(&mut self, dir: &[f64]) {
        for i in 0..self.t {
            let p = &self.coords[i * self.n..(i + 1) * self.n];
            self.x[i] = p.iter().zip(dir).map(|(a, b)| a * b).sum();
        }
    }

    /// Fills the weights with lower bounds, valid for every direction within
    /// `rho` of `dir`, of the per-pair projected distances (exact at `rho = 0`).
    fn weights(&mut self, kind: Kind, dir: &[f64], rho: f64) {
        self.project(dir);
        let t = self.t;
        for i in 0..t {
            self.w[i * t + i] = 0.0;
            for j in i + 1..t {
                let d = self.dist[i * t + j];
                let s = (self.x[i] - self.x[j]).abs();
                let val = match kind {
                    Kind::Line => (s - d * rho).max(0.0),
                    Kind::Plane => {
                        let along = (s + d * rho).min(d);
                        ((d - along) * (d + along)).max(0.0).sqrt()
                    }
                };
                self.w[i * t + j] = val;
                self.w[j * t + i] = val;
            }
        }
    }

    fn eval(&mut self, kind: Kind, dir: &[f64], rho: f64, edges: usize) -> (f64, Vec<usize>) {
        self.weights(kind, dir, rho);
        min_path(&self.w, self.t, edges)
    }

}

/// Minimum total weight of a simple path with `edges` edges in the complete
/// graph with symmetric weights `w` (`t x t`), and a path attaining it.
pub(crate) fn min_path(w: &[f64], t: usize, edges: usize) -> (f64, Vec<usize>) {
    assert!(t > edges, "need at least edges + 1 vertices");
    match edges {
        1 => {
            let mut best = (f64::INFINITY, vec![]);
            for i in 0..t {
                for j in i + 1..t {
                    if w[i * t + j] < best.0 {
                        best = (w[i * t + j], vec![i, j]);
                    }
                }
            }
            best
        }
        2 => {
            let mut best = (f64::INFINITY, vec![]);
            for j in 0..t {
                let (mut a, mut b) = (usize::MAX, usize::MAX);
                for i in (0..t).filter(|&i| i != j) {
                    if a == usize::MAX || w[j * t + i] < w[j * t + a] {
                        b = a;
                        a = i;
                    } else if b == usize::MAX || w[j * t + i] < w[j * t + b] {
                        b = i;
                    }
                }
                let v = w[j * t + a] + w[j * t + b];
                if v < best.0 {
                    best = (v, vec![a, j, b]);
                }
            }
            best
        }
        3 => {
            // Three nearest neighbours per vertex suffice: an optimal path
            // i-j-k-l uses one of the two best i for j (other than k), and
            // likewise for l.
            let near: Vec<[usize; 3]> = (0..t)
                .map(|j| {
                    let mut top = [usize::MAX; 3];
                    for i in (0..t).filter(|&i| i != j) {
                        let wi = w[j * t + i];
                        let mut pos = 3;
                        while pos > 0 && (top[pos - 1] == usize::MAX || wi < w[j * t + top[pos - 1]]) {
                            pos -= 1;
                        }
                        if pos < 3 {
                            top.copy_within(pos..2, pos + 1);
                            top[pos] = i;
                        }
                    }
                    top
                })
                .collect();
            let mut best = (f64::INFINITY, vec![]);
            for j in 0..t {
                for k in j + 1..t {
                    let mid = w[j * t + k];
                    if mid >= best.0 {
                        continue;
                    }
                    for &i in near[j].iter().filter(|&&i| i != usize::MAX && i != k) {
                        for &l in near[k].iter().filter(|&&l| l != usize::MAX && l != j && l != i) {
                            let v = w[i * t + j] + mid + w[k * t + l];
                            if v < best.0 {
                                best = (v, vec![i, j, k, l]);
                            }
                        }
                    }
                }
            }
            best
        }
        _ => {
            let mut best = (f64::INFINITY, vec![]);
            let mut path = Vec::with_capacity(edges + 1);
            let mut used = vec![false; t];
            fn dfs(
                w: &[f64],
                t: usize,
                edges: usize,
                acc: f64,
                path: &mut Vec<usize>,
                used: &mut [bool],
                best: &mut (f64, Vec<usize>),
            ) {
                if acc >= best.0 {
                    return;
                }
                if path.len() == edges + 1 {
                    *best = (acc, path.clone());
                    return;
                }
                for j in 0..t {
                    if used[j] {
                        continue;
                    }
                    let add = path.last().map_or(0.0, |&i| w[i * t + j]);
                    used[j] = true;
                    path.push(j);
                    dfs(w, t, edges, acc + add, path, used, best);
                    path.pop();
                    used[j] = false;
                }
            }
            dfs(w, t, edges, 0.0, &mut path, &mut used, &mut best);
            best
        }
    }
}

/// Maximum total weight of a simple path with `edges` edges.
fn max_path(w: &[f64], t: usize, edges: usize) -> f64 {
    let neg: Vec<f64> = w.iter().map(|x| -x).collect();
    -min_path_exhaustive(&neg, t, edges)
}

fn min_path_exhaustive(w: &[f64], t: usize, edges: usize) -> f64 {
    fn go(w: &[f64], t: usize, left: usize, last: usize, used: &mut [bool]) -> f64 {
        if left == 0 {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for j in 0..t {
            if !used[j] {
                used[j] = true;
                best = best.min(w[last * t + j] + go(w, t, left - 1, j, used));
                used[j] = false;
            }
        }
        best
    }
    let mut used = vec![false; t];
    let mut best = f64::INFINITY;
    for i in 0..t {
        used[i] = true;
        best = best.min(go(w, t, edges, i, &mut used));
        used[i] = false;
    }
    best
}

fn check_lambda_input(a: &PointSet) -> Result<()> {
    let n = a.dim();
    if n == 1 {
        return Err(Error::LambdaUndefined(n));
    }
    if !(2..=3).contains(&n) {
        return Err(Error::CertifiedNetUnavailable(n));
    }
    if a.len() < n + 1 {
        return Err(Error::TooFewPoints {
            required: n + 1,
            found: a.len(),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// oracle

/// Minimum of the tuple sums over the chart lattice of spacing at most
/// `grid_step`: lines for every `N`, and additionally planes (by their normal
/// on the same lattice) for `N = 3`.
///
/// The lattice at level `M` contains every lattice point of coarser levels, so
/// the value is non-increasing as `grid_step` decreases. Regions of the chart
/// are skipped only when a rigorous per-cell lower bound shows they cannot
/// improve on the best value found, so the result is the exact lattice minimum.
pub fn lambda_bruteforce(a: &PointSet, grid_step: f64) -> Result<LambdaEstimate> {
    if !(grid_step > 0.0) || !grid_step.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "grid_step must be positive, got {grid_step}"
        )));
    }
    check_lambda_input(a)?;
    let n = a.dim();
    let mut levels = 0;
    while dyadic_grid_step(n, levels) > grid_step {
        levels += 1;
        if levels > MAX_LEVEL {
            return Err(Error::InvalidArgument(format!("grid_step {grid_step:e} is too fine")));
        }
    }

    let mut ev = Evaluator::new(a);
    let mut search = LatticeSearch {
        n,
        levels,
        best: f64::INFINITY,
        tuple: vec![],
        dir: vec![],
        kind: Kind::Line,
        evaluated: 0,
        slack: 1e-12 * crate::geom::diameter(a.points()).max(f64::MIN_POSITIVE),
    };
    let mut kinds = vec![Kind::Line];
    if n == 3 {
        kinds.push(Kind::Plane);
    }
    for kind in kinds {
        for root in ChartCell::roots(n) {
            search.visit(&mut ev, kind, root);
        }
    }
    let subspace = match search.kind {
        Kind::Line => Subspace::line(&search.dir)?,
        Kind::Plane => Subspace::line(&search.dir)?.complement(),
    };
    Ok(LambdaEstimate {
        value: search.best,
        tuple: search.tuple,
        subspace,
        grid_step,
        levels,
        evaluated: search.evaluated,
    })
}

struct LatticeSearch {
    n: usize,
    levels: u32,
    best: f64,
    tuple: Vec<usize>,
    dir: Vec<f64>,
    kind: Kind,
    evaluated: usize,
    slack: f64,
}

impl LatticeSearch {
    fn offer(&mut self, ev: &mut Evaluator, kind: Kind, dir: Vec<f64>) {
        let (v, tuple) = ev.eval(kind, &dir, 0.0, self.n);
        if v < self.best {
            self.best = v;
            self.tuple = tuple;
            self.dir = dir;
            self.kind = kind;
        }
    }

    fn visit(&mut self, ev: &mut Evaluator, kind: Kind, cell: ChartCell) {
        self.evaluated += 1;
        if cell.depth == self.levels {
            for c in cell.corners(self.n) {
                self.offer(ev, kind, c);
            }
            return;
        }
        let center = cell.center(self.n);
        let (lb, _) = ev.eval(kind, &center, cell.radius(self.n), self.n);
        if lb > self.best + self.slack {
            return;
        }
        self.offer(ev, kind, center);
        let mut children: Vec<(f64, ChartCell)> = cell
            .split(self.n)
            .into_iter()
            .map(|c| (ev.eval(kind, &c.center(self.n), 0.0, self.n).0, c))
            .collect();
        children.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, c) in children {
            self.visit(ev, kind, c);
        }
    }
}

// ---------------------------------------------------------------------------
// certified search

/// When the certified search may stop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    /// `ub - lb <= tol`.
    Absolute(f64),
    /// `ub - lb <= frac * ub`.
    Relative(f64),
}

struct Pending {
    lb: f64,
    seq: u64,
    cell: ChartCell,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    // Reversed: the heap pops the smallest lower bound first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.lb.total_cmp(&self.lb).then(other.seq.cmp(&self.seq))
    }
}

/// Certified bracket `lb <= lambda(A) <= ub` with `ub - lb <= tol` and
/// `lb > 0`, by branch and bound over the line chart.
///
/// A cell of chord radius `rho` around the unit direction `c` contains only
/// directions `d` with `|d - c| <= rho`, so every pair term obeys
/// `|<a_i - a_j, d>| >= |<a_i - a_j, c>| - |a_i - a_j| rho`. Clamping each term
/// at zero and minimizing over tuples gives the cell's lower bound; it is never
/// below `f(c) - Lip * rho`.
pub fn lambda_certified(a: &PointSet, tol: f64) -> Result<LambdaBracket> {
    lambda_certified_with(a, Stop::Absolute(tol), DEFAULT_CELL_BUDGET)
}

pub fn lambda_certified_with(a: &PointSet, stop: Stop, budget: usize) -> Result<LambdaBracket> {
    let tol_ok = match stop {
        Stop::Absolute(t) => t > 0.0 && t.is_finite(),
        Stop::Relative(f) => f > 0.0 && f < 1.0,
    };
    if !tol_ok {
        return Err(Error::InvalidArgument(format!("invalid stopping rule {stop:?}")));
    }
    check_lambda_input(a)?;
    let margin = general_position_margin(a.points());
    if !margin.is_positive() {
        return Err(Error::NotInGeneralPosition {
            margin: margin.value.unwrap_or(0.0),
        });
    }
    let n = a.dim();
    let mut ev = Evaluator::new(a);
    let lipschitz = max_path(&ev.dist, ev.t, n);

    let mut st = Search {
        n,
        ub: f64::INFINITY,
        tuple: vec![],
        dir: vec![],
        cells: 0,
        max_depth: 0,
    };
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    for root in ChartCell::roots(n) {
        let lb = st.evaluate(&mut ev, root);
        heap.push(Pending { lb, seq, cell: root });
        seq += 1;
    }

    loop {
        let ub = st.ub;
        let global_lb = heap.peek().map_or(ub, |p: &Pending| p.lb.min(ub));
        let tol = match stop {
            Stop::Absolute(t) => t,
            Stop::Relative(f) => f * ub,
        };
        if ub - global_lb <= tol && global_lb > 0.0 {
            return Ok(LambdaBracket {
                lb: global_lb,
                ub,
                tol,
                subspace: Subspace::line(&st.dir)?,
                tuple: st.tuple,
                lipschitz,
                cells: st.cells,
                max_depth: st.max_depth,
            });
        }
        let exhausted = Error::BudgetExhausted {
            budget,
            lb: global_lb,
            ub,
        };
        let Some(p) = heap.pop() else {
            return Err(exhausted);
        };
        if p.lb >= ub {
            continue;
        }
        if st.cells >= budget || p.cell.depth >= MAX_LEVEL {
            return Err(exhausted);
        }
        for child in p.cell.split(n) {
            let lb = st.evaluate(&mut ev, child);
            if lb < st.ub {
                heap.push(Pending { lb, seq, cell: child });
                seq += 1;
            }
        }
    }
}

struct Search {
    n: usize,
    ub: f64,
    tuple: Vec<usize>,
    dir: Vec<f64>,
    cells: usize,
    max_depth: u32,
}

impl Search {
    /// Updates the incumbent with the cell center and returns the cell's
    /// lower bound.
    fn evaluate(&mut self, ev: &mut Evaluator, cell: ChartCell) -> f64 {
        self.cells += 1;
        self.max_depth = self.max_depth.max(cell.depth);
        let c = cell.center(self.n);
        let (val, tuple) = ev.eval(Kind::Line, &c, 0.0, self.n);
        let lb = ev.eval(Kind::Line, &c, cell.radius(self.n), self.n).0;
        if val < self.ub {
            self.ub = val;
            self.tuple = tuple;
            self.dir = c;
        }
        lb
    }
}

/// Tuple sum at an arbitrary subspace (any dimension).
pub fn lambda_at_subspace(a: &PointSet, l: &Subspace) -> Result<(f64, Vec<usize>)> {
    if l.ambient() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: l.ambient(),
        });
    }
    let n = a.dim();
    if a.len() < n + 1 {
        return Err(Error::TooFewPoints {
            required: n + 1,
            found: a.len(),
        });
    }
    let t = a.len();
    let proj: Vec<Vec<f64>> = a.points().iter().map(|p| l.coords(&p.0)).collect();
    let mut w = vec![0.0; t * t];
    for i in 0..t {
        for j in 0..t {
            w[i * t + j] = crate::geom::dist2(&proj[i], &proj[j]).sqrt();
        }
    }
    Ok(min_path(&w, t, n))
}
