use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{dist2, Point};

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn reset(&mut self, n: usize) {
        self.parent.clear();
        self.parent.extend(0..n);
        self.size.clear();
        self.size.resize(n, 1);
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Connected components of a union of closed balls of equal radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentPartition {
    pub centers: Vec<Vec<f64>>,
    pub delta: f64,
    /// Blocks of indices, each sorted, ordered by smallest member.
    pub blocks: Vec<Vec<usize>>,
    /// Diameter of each block's union: max center distance plus `2 delta`.
    pub diameters: Vec<f64>,
}

impl ComponentPartition {
    pub fn max_diameter(&self) -> f64 {
        self.diameters.iter().copied().fold(0.0, f64::max)
    }
}

/// Components of `union_i B(c_i, delta)`. Closed balls touch when their centers
/// are exactly `2 delta` apart.
pub fn components_of_ball_union(centers: &[Point], delta: f64) -> Result<ComponentPartition> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if let Some(first) = centers.first() {
        if let Some(p) = centers.iter().find(|p| p.dim() != first.dim()) {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                found: p.dim(),
            });
        }
    }
    let coords: Vec<Vec<f64>> = centers.iter().map(|p| p.0.clone()).collect();
    let radii = vec![delta; coords.len()];
    let (blocks, diameters) = components_with_radii(&coords, &radii);
    Ok(ComponentPartition {
        centers: coords,
        delta,
        blocks,
        diameters,
    })
}

/// Components of a union of closed balls with individual radii, with the
/// diameter of each block (`max_{i,j} |c_i - c_j| + r_i + r_j`).
pub(crate) fn components_with_radii(centers: &[Vec<f64>], radii: &[f64]) -> (Vec<Vec<usize>>, Vec<f64>) {
    let n = centers.len();
    let mut dsu = DisjointSet::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if dist2(&centers[i], &centers[j]).sqrt() <= radii[i] + radii[j] {
                dsu.union(i, j);
            }
        }
    }
    let mut root_block = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = dsu.find(i);
        if root_block[r] == usize::MAX {
            root_block[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[root_block[r]].push(i);
    }
    let diameters = blocks
        .iter()
        .map(|b| {
            let mut d = 0.0f64;
            for (x, &i) in b.iter().enumerate() {
                d = d.max(2.0 * radii[i]);
                for &j in &b[x + 1..] {
                    d = d.max(dist2(&centers[i], &centers[j]).sqrt() + radii[i] + radii[j]);
                }
            }
            d
        })
        .collect();
    (blocks, diameters)
}

/// Largest component diameter of equal balls with centers given as a flat
/// `n x dim` array; also returns the block attaining it. Allocation-light
/// variant used by the sampled audits.
pub(crate) fn max_component_diameter(
    flat: &[f64],
    dim: usize,
    delta: f64,
    dsu: &mut DisjointSet,
) -> (f64, Vec<usize>) {
    let n = flat.len() / dim;
    dsu.reset(n);
    let at = |i: usize| &flat[i * dim..(i + 1) * dim];
    let touch = 4.0 * delta * delta;
    for i in 0..n {
        for j in i + 1..n {
            let d2 = dist2(at(i), at(j));
            // Squared comparison first; the exact test only near tangency.
            if d2 < touch * (1.0 - 1e-12) || (d2 <= touch * (1.0 + 1e-12) && d2.sqrt() <= 2.0 * delta) {
                dsu.union(i, j);
            }
        }
    }
    let mut best = 2.0 * delta;
    let mut pair = (0usize, 0usize);
    for i in 0..n {
        for j in i + 1..n {
            if dsu.find(i) == dsu.find(j) {
                let d = dist2(at(i), at(j)).sqrt() + 2.0 * delta;
                if d > best {
                    best = d;
                    pair = (i, j);
                }
            }
        }
    }
    let root = dsu.find(pair.0);
    let block = (0..n).filter(|&i| dsu.find(i) == root).collect();
    (best, block)
}
