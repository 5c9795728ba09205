//! Finite-resolution Cantor sets as nested families of closed balls.
//!
//! A [`BallTree`] with disjoint siblings, children inside the open interior of
//! their parent, branching at least two and radii shrinking by at least half per
//! level represents every Cantor set that meets each leaf ball and lies in their
//! union; any such set is within `leaf_radius` of the leaf centers in the
//! Hausdorff metric. All conclusions drawn from trees are therefore stated at
//! resolution `leaf_radius`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Ball, Point};
use crate::rng;

/// Identifies a node by level and index within the level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId {
    pub level: usize,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeRepr", into = "TreeRepr")]
pub struct BallTree {
    dim: usize,
    levels: Vec<Vec<Ball>>,
    /// `parents[j][i]` is the index in level `j - 1` of the parent of node `(j, i)`.
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<Vec<usize>>>,
}

#[derive(Serialize, Deserialize)]
struct TreeRepr {
    dim: usize,
    levels: Vec<Vec<Ball>>,
    parents: Vec<Vec<usize>>,
}

impl TryFrom<TreeRepr> for BallTree {
    type Error = Error;
    fn try_from(r: TreeRepr) -> Result<Self> {
        BallTree::new(r.dim, r.levels, r.parents)
    }
}

impl From<BallTree> for TreeRepr {
    fn from(t: BallTree) -> Self {
        TreeRepr {
            dim: t.dim,
            levels: t.levels,
            parents: t.parents,
        }
    }
}

impl BallTree {
    /// Builds a tree from levels and parent links and checks every invariant.
    pub fn new(dim: usize, levels: Vec<Vec<Ball>>, mut parents: Vec<Vec<usize>>) -> Result<Self> {
        if levels.is_empty() || levels[0].is_empty() {
            return Err(Error::InvalidTree("no root balls".into()));
        }
        if parents.is_empty() {
            parents.push(Vec::new());
        }
        if parents.len() != levels.len() {
            return Err(Error::InvalidTree(format!(
                "{} levels but {} parent lists",
                levels.len(),
                parents.len()
            )));
        }
        if !parents[0].is_empty() {
            return Err(Error::InvalidTree("roots cannot have parents".into()));
        }
        let mut children: Vec<Vec<Vec<usize>>> = levels.iter().map(|l| vec![Vec::new(); l.len()]).collect();
        for j in 1..levels.len() {
            if parents[j].len() != levels[j].len() {
                return Err(Error::InvalidTree(format!("level {j}: parent list length")));
            }
            if levels[j].is_empty() {
                return Err(Error::InvalidTree(format!("level {j} is empty")));
            }
            for (i, &p) in parents[j].iter().enumerate() {
                if p >= levels[j - 1].len() {
                    return Err(Error::InvalidTree(format!("node ({j},{i}): dangling parent {p}")));
                }
                children[j - 1][p].push(i);
            }
        }
        let tree = BallTree {
            dim,
            levels,
            parents,
            children,
        };
        tree.check_invariants()?;
        Ok(tree)
    }

    pub fn single(ball: Ball) -> Self {
        BallTree {
            dim: ball.dim(),
            levels: vec![vec![ball]],
            parents: vec![Vec::new()],
            children: vec![vec![Vec::new()]],
        }
    }

    /// Disjoint union of trees as a forest; levels are aligned from the roots.
    pub fn union(trees: &[BallTree]) -> Result<Self> {
        let first = trees.first().ok_or(Error::InvalidTree("empty union".into()))?;
        let dim = first.dim;
        let depth = trees.iter().map(|t| t.levels.len()).max().unwrap_or(1);
        let mut levels: Vec<Vec<Ball>> = vec![Vec::new(); depth];
        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); depth];
        for t in trees {
            if t.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: t.dim,
                });
            }
            let offsets: Vec<usize> = levels.iter().map(Vec::len).collect();
            for (j, level) in t.levels.iter().enumerate() {
                levels[j].extend(level.iter().cloned());
                if j > 0 {
                    parents[j].extend(t.parents[j].iter().map(|p| p + offsets[j - 1]));
                }
            }
        }
        BallTree::new(dim, levels, parents)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index of the deepest level.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[Vec<Ball>] {
        &self.levels
    }

    pub fn ball(&self, id: NodeId) -> &Ball {
        &self.levels[id.level][id.index]
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        (id.level > 0).then(|| NodeId {
            level: id.level - 1,
            index: self.parents[id.level][id.index],
        })
    }

    pub fn children(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.children[id.level][id.index].iter().map(move |&i| NodeId {
            level: id.level + 1,
            index: i,
        })
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.children[id.level][id.index].is_empty()
    }

    pub fn roots(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.levels[0].len()).map(|index| NodeId { level: 0, index })
    }

    /// Leaves in level-major order; this order defines leaf indices.
    pub fn leaves(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        for (level, nodes) in self.levels.iter().enumerate() {
            for index in 0..nodes.len() {
                if self.children[level][index].is_empty() {
                    out.push(NodeId { level, index });
                }
            }
        }
        out
    }

    pub fn leaf_balls(&self) -> Vec<&Ball> {
        self.leaves().into_iter().map(|id| self.ball(id)).collect()
    }

    pub fn leaf_centers(&self) -> Vec<Point> {
        self.leaves().into_iter().map(|id| self.ball(id).center.clone()).collect()
    }

    /// Largest leaf radius: the resolution of the tree.
    pub fn leaf_radius(&self) -> f64 {
        self.leaf_balls().iter().map(|b| b.radius).fold(0.0, f64::max)
    }

    /// Leaves below (or equal to) a node.
    pub fn leaves_under(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            if self.is_leaf(n) {
                out.push(n);
            } else {
                let mut kids: Vec<NodeId> = self.children(n).collect();
                kids.reverse();
                stack.extend(kids);
            }
        }
        out
    }

    /// Checks disjointness, interior containment, branching and radius decay.
    pub fn check_invariants(&self) -> Result<()> {
        for (j, level) in self.levels.iter().enumerate() {
            for (i, b) in level.iter().enumerate() {
                if b.dim() != self.dim {
                    return Err(Error::InvalidTree(format!("node ({j},{i}): wrong dimension")));
                }
                if !(b.radius > 0.0) || !b.radius.is_finite() {
                    return Err(Error::InvalidTree(format!("node ({j},{i}): bad radius")));
                }
                if b.center.0.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidTree(format!("node ({j},{i}): non-finite center")));
                }
            }
        }
        let roots = &self.levels[0];
        for a in 0..roots.len() {
            for b in a + 1..roots.len() {
                if !roots[a].is_disjoint(&roots[b]) {
                    return Err(Error::InvalidTree(format!("roots {a} and {b} intersect")));
                }
            }
        }
        for j in 0..self.levels.len() {
            for i in 0..self.levels[j].len() {
                let kids = &self.children[j][i];
                if kids.is_empty() {
                    continue;
                }
                if kids.len() < 2 {
                    return Err(Error::InvalidTree(format!("node ({j},{i}) has a single child")));
                }
                let parent = &self.levels[j][i];
                for (x, &a) in kids.iter().enumerate() {
                    let child = &self.levels[j + 1][a];
                    if !parent.contains_in_interior(child) {
                        return Err(Error::InvalidTree(format!(
                            "node ({},{a}) is not inside the interior of its parent",
                            j + 1
                        )));
                    }
                    if child.radius > 0.5 * parent.radius {
                        return Err(Error::InvalidTree(format!(
                            "node ({},{a}): radius decays by less than one half",
                            j + 1
                        )));
                    }
                    for &b in &kids[x + 1..] {
                        if !child.is_disjoint(&self.levels[j + 1][b]) {
                            return Err(Error::InvalidTree(format!(
                                "siblings ({},{a}) and ({},{b}) intersect",
                                j + 1,
                                j + 1
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Same tree moved by `v`.
    pub fn translated(&self, v: &[f64]) -> BallTree {
        let mut t = self.clone();
        for level in &mut t.levels {
            for b in level {
                b.center = b.center.translate(v);
            }
        }
        t
    }
}

/// Binary tree in `ball`: two children per node, child radius a quarter of the
/// parent radius, children centered at `+-radius/2` along a direction drawn per
/// node from `seed`.
pub fn standard_cantor_in_ball(ball: &Ball, depth: usize, seed: u64) -> BallTree {
    let mut rng = rng::seeded(seed, rng::stream::CANTOR);
    let dim = ball.dim();
    build_binary(ball, depth, || rng::unit_vec(&mut rng, dim))
}

/// Binary tree in `ball` with every split along the fixed unit `direction`; its
/// leaves form the linear ratio-1/4 Cantor pattern on a segment.
pub fn standard_cantor_along(ball: &Ball, depth: usize, direction: &[f64]) -> Result<BallTree> {
    let n = geom::norm(direction);
    if direction.len() != ball.dim() || !(n > 0.0) {
        return Err(Error::InvalidArgument("bad Cantor direction".into()));
    }
    let u: Vec<f64> = direction.iter().map(|x| x / n).collect();
    Ok(build_binary(ball, depth, || u.clone()))
}

fn build_binary(ball: &Ball, depth: usize, mut direction: impl FnMut() -> Vec<f64>) -> BallTree {
    let mut levels = vec![vec![ball.clone()]];
    let mut parents = vec![Vec::new()];
    for j in 0..depth {
        let mut next = Vec::with_capacity(levels[j].len() * 2);
        let mut next_parents = Vec::with_capacity(levels[j].len() * 2);
        for (i, b) in levels[j].iter().enumerate() {
            let u = direction();
            let off: Vec<f64> = u.iter().map(|x| x * 0.5 * b.radius).collect();
            let neg: Vec<f64> = off.iter().map(|x| -x).collect();
            for o in [&neg, &off] {
                next.push(Ball {
                    center: b.center.translate(o),
                    radius: 0.25 * b.radius,
                });
                next_parents.push(i);
            }
        }
        levels.push(next);
        parents.push(next_parents);
    }
    let children = (0..levels.len())
        .map(|j| {
            (0..levels[j].len())
                .map(|i| if j < depth { vec![2 * i, 2 * i + 1] } else { Vec::new() })
                .collect()
        })
        .collect();
    BallTree {
        dim: ball.dim(),
        levels,
        parents,
        children,
    }
}

/// Closed interval `[lb, ub]` of reals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lb: f64,
    pub ub: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lb <= x && x <= self.ub
    }

    pub fn width(&self) -> f64 {
        self.ub - self.lb
    }
}

impl BallTree {
    /// Squared distance from `p` to the nearest leaf center, or any value
    /// `<= stop2` once the nearest is known to be that close. Every leaf center
    /// lies inside each ancestor ball, which prunes whole subtrees.
    pub(crate) fn nearest_leaf_dist2(&self, p: &[f64], stop2: f64) -> f64 {
        let mut best = f64::INFINITY;
        let mut stack: Vec<(f64, NodeId)> = self.roots().map(|id| (self.node_bound(id, p), id)).collect();
        stack.sort_by(|a, b| b.0.total_cmp(&a.0));
        while let Some((bound, id)) = stack.pop() {
            if bound >= best {
                continue;
            }
            if self.is_leaf(id) {
                best = best.min(geom::dist2(p, &self.ball(id).center.0));
                if best <= stop2 {
                    return best;
                }
                continue;
            }
            let mut kids: Vec<(f64, NodeId)> = self.children(id).map(|c| (self.node_bound(c, p), c)).collect();
            kids.sort_by(|a, b| b.0.total_cmp(&a.0));
            stack.extend(kids.into_iter().filter(|k| k.0 < best));
        }
        best
    }

    /// Lower bound on the squared distance from `p` to leaf centers under `id`.
    fn node_bound(&self, id: NodeId, p: &[f64]) -> f64 {
        let b = self.ball(id);
        if self.is_leaf(id) {
            return geom::dist2(p, &b.center.0);
        }
        let d = (geom::dist2(p, &b.center.0).sqrt() - b.radius).max(0.0);
        d * d
    }
}

/// Directed Hausdorff distance from `points` to the leaf centers of `t`.
fn directed_to_tree(points: &[Point], t: &BallTree) -> f64 {
    let mut worst = 0.0f64;
    for p in points {
        worst = worst.max(t.nearest_leaf_dist2(&p.0, worst));
    }
    worst.sqrt()
}

/// Bracket on the Hausdorff distance between the compacta represented by two trees.
pub fn hausdorff_between(t1: &BallTree, t2: &BallTree) -> Result<Interval> {
    if t1.dim() != t2.dim() {
        return Err(Error::DimensionMismatch {
            expected: t1.dim(),
            found: t2.dim(),
        });
    }
    let m = directed_to_tree(&t1.leaf_centers(), t2).max(directed_to_tree(&t2.leaf_centers(), t1));
    let slack = t1.leaf_radius() + t2.leaf_radius();
    Ok(Interval {
        lb: (m - slack).max(0.0),
        ub: m + slack,
    })
}

/// Bracket on the Hausdorff distance between a tree and a finite point set.
pub fn hausdorff_to_points(t: &BallTree, points: &[Point]) -> Result<Interval> {
    let m = geom::hausdorff_distance(&t.leaf_centers(), points)?;
    let slack = t.leaf_radius();
    Ok(Interval {
        lb: (m - slack).max(0.0),
        ub: m + slack,
    })
}

/// A finite binary word, an address of a cylinder of the Cantor set {0,1}^N.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Word(String);

impl TryFrom<String> for Word {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        if s.chars().all(|c| c == '0' || c == '1') {
            Ok(Word(s))
        } else {
            Err(Error::InvalidArgument(format!("not a binary word: {s:?}")))
        }
    }
}

impl From<Word> for String {
    fn from(w: Word) -> Self {
        w.0
    }
}

impl Word {
    pub fn empty() -> Self {
        Word(String::new())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, bit: u8) -> Word {
        let mut s = self.0.clone();
        s.push(if bit == 0 { '0' } else { '1' });
        Word(s)
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn compatible(&self, other: &Word) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    fn concat(&self, tail: &Word) -> Word {
        Word(format!("{}{}", self.0, tail.0))
    }
}

/// Balanced complete prefix code with `m >= 1` words, in lexicographic order.
pub fn balanced_code(m: usize) -> Vec<Word> {
    fn go(prefix: Word, m: usize, out: &mut Vec<Word>) {
        if m == 1 {
            out.push(prefix);
        } else {
            let left = m.div_ceil(2);
            go(prefix.child(0), left, out);
            go(prefix.child(1), m - left, out);
        }
    }
    let mut out = Vec::with_capacity(m);
    if m > 0 {
        go(Word::empty(), m, &mut out);
    }
    out
}

/// Finite-resolution embedding of the Cantor set: a complete prefix code whose
/// words are mapped bijectively onto the leaves of a ball tree. The cylinder of
/// each word is sent into the corresponding leaf ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EmbeddingRepr", into = "EmbeddingRepr")]
pub struct CodedEmbedding {
    tree: BallTree,
    code: BTreeMap<Word, usize>,
}

#[derive(Serialize, Deserialize)]
struct EmbeddingRepr {
    tree: BallTree,
    code: BTreeMap<Word, usize>,
}

impl TryFrom<EmbeddingRepr> for CodedEmbedding {
    type Error = Error;
    fn try_from(r: EmbeddingRepr) -> Result<Self> {
        CodedEmbedding::new(r.tree, r.code)
    }
}

impl From<CodedEmbedding> for EmbeddingRepr {
    fn from(e: CodedEmbedding) -> Self {
        EmbeddingRepr {
            tree: e.tree,
            code: e.code,
        }
    }
}

/// True when the words form a complete prefix code (the cylinders partition the
/// Cantor set).
pub fn is_complete_prefix_code<'a>(words: impl IntoIterator<Item = &'a Word>) -> bool {
    let words: Vec<&Word> = words.into_iter().collect();
    if words.is_empty() {
        return false;
    }
    let max_len = words.iter().map(|w| w.len()).max().unwrap_or(0);
    if max_len > 120 {
        return false;
    }
    let mut sorted = words.clone();
    sorted.sort();
    for w in sorted.windows(2) {
        if w[0].is_prefix_of(w[1]) {
            return false;
        }
    }
    let kraft: u128 = words.iter().map(|w| 1u128 << (max_len - w.len())).sum();
    kraft == 1u128 << max_len
}

impl CodedEmbedding {
    pub fn new(tree: BallTree, code: BTreeMap<Word, usize>) -> Result<Self> {
        let leaves = tree.leaves().len();
        if code.len() != leaves {
            return Err(Error::InvalidArgument(format!(
                "{} code words for {leaves} leaves",
                code.len()
            )));
        }
        let mut seen = vec![false; leaves];
        for &i in code.values() {
            if i >= leaves || seen[i] {
                return Err(Error::InvalidArgument(
                    "code must map words bijectively onto leaves".into(),
                ));
            }
            seen[i] = true;
        }
        if !is_complete_prefix_code(code.keys()) {
            return Err(Error::InvalidArgument("words do not form a complete prefix code".into()));
        }
        Ok(CodedEmbedding { tree, code })
    }

    /// Codes a tree in which every internal node has exactly two children by
    /// its root-to-leaf paths; a forest's roots are first spread over a balanced code.
    pub fn from_tree(tree: BallTree) -> Result<Self> {
        let leaf_index: BTreeMap<NodeId, usize> =
            tree.leaves().into_iter().enumerate().map(|(i, id)| (id, i)).collect();
        let mut code = BTreeMap::new();
        let roots: Vec<NodeId> = tree.roots().collect();
        let root_words = balanced_code(roots.len());
        let mut stack: Vec<(NodeId, Word)> = roots.into_iter().zip(root_words).collect();
        while let Some((id, w)) = stack.pop() {
            if tree.is_leaf(id) {
                code.insert(w, leaf_index[&id]);
                continue;
            }
            let kids: Vec<NodeId> = tree.children(id).collect();
            if kids.len() != 2 {
                return Err(Error::InvalidArgument(
                    "path coding needs exactly two children per internal node".into(),
                ));
            }
            stack.push((kids[0], w.child(0)));
            stack.push((kids[1], w.child(1)));
        }
        CodedEmbedding::new(tree, code)
    }

    pub fn tree(&self) -> &BallTree {
        &self.tree
    }

    pub fn code(&self) -> &BTreeMap<Word, usize> {
        &self.code
    }

    /// Longest code word.
    pub fn depth(&self) -> usize {
        self.code.keys().map(Word::len).max().unwrap_or(0)
    }

    /// `(word, leaf ball)` pairs in word order.
    pub fn assignments(&self) -> Vec<(&Word, &Ball)> {
        let leaves = self.tree.leaves();
        self.code
            .iter()
            .map(|(w, &i)| (w, self.tree.ball(leaves[i])))
            .collect()
    }

    /// Leaf balls of the image.
    pub fn image(&self) -> &BallTree {
        &self.tree
    }
}

/// Upper bound on the sup-distance between two coded embeddings.
///
/// Points of the Cantor set with addresses in compatible words `u`, `v` land in
/// the balls of `u` and `v`, so their images are at most
/// `|c_u - c_v| + r_u + r_v` apart. Identical word and ball contribute nothing.
pub fn rho_bound(f: &CodedEmbedding, g: &CodedEmbedding) -> f64 {
    let fa = f.assignments();
    let ga = g.assignments();
    let mut worst = 0.0f64;
    for (u, bu) in &fa {
        for (v, bv) in &ga {
            if !u.compatible(v) {
                continue;
            }
            if u == v && bu == bv {
                continue;
            }
            worst = worst.max(bu.center.dist(&bv.center) + bu.radius + bv.radius);
        }
    }
    worst
}

/// Result of [`reglue_embedding`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReglueOutcome {
    pub embedding: CodedEmbedding,
    pub delta: f64,
    /// Tree level of the cluster nodes `X_i`.
    pub cluster_level: usize,
    /// Number of leaves of the target assigned to each cluster.
    pub cluster_sizes: Vec<usize>,
    pub rho: f64,
    pub hausdorff_ub: f64,
}

/// Re-codes the embedding `f` onto the leaves of `target` when the two images
/// are closer than the computed `delta`; the new embedding is within `eps` of `f`.
pub fn reglue_embedding(f: &CodedEmbedding, target: &BallTree, eps: f64) -> Result<ReglueOutcome> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let tree = f.tree();
    if tree.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: tree.dim(),
            found: target.dim(),
        });
    }
    let (level, clusters) = cluster_frontier(tree, eps / 3.0)?;

    let f_leaves = tree.leaves();
    let leaf_pos: BTreeMap<NodeId, usize> = f_leaves.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut cluster_of_leaf = vec![0usize; f_leaves.len()];
    for (c, &node) in clusters.iter().enumerate() {
        for leaf in tree.leaves_under(node) {
            cluster_of_leaf[leaf_pos[&leaf]] = c;
        }
    }

    // Lower bound on the distance between distinct clusters.
    let mut gap = f64::INFINITY;
    for a in 0..f_leaves.len() {
        for b in a + 1..f_leaves.len() {
            if cluster_of_leaf[a] != cluster_of_leaf[b] {
                gap = gap.min(tree.ball(f_leaves[a]).gap(tree.ball(f_leaves[b])));
            }
        }
    }
    let delta = 0.99 * (eps / 3.0).min(gap / 3.0);
    if !(delta > 0.0) {
        return Err(Error::Construction("clusters are not separated".into()));
    }
    let bracket = hausdorff_between(tree, target)?;
    if !(bracket.ub < delta) {
        return Err(Error::ReglueTooFar {
            delta,
            ub: bracket.ub,
        });
    }

    // Word of each f-leaf, and the cylinder prefix of each cluster.
    let mut word_of_leaf: Vec<Option<&Word>> = vec![None; f_leaves.len()];
    for (w, &i) in f.code() {
        word_of_leaf[i] = Some(w);
    }
    let mut prefixes = Vec::with_capacity(clusters.len());
    for c in 0..clusters.len() {
        let words: Vec<&Word> = (0..f_leaves.len())
            .filter(|&i| cluster_of_leaf[i] == c)
            .map(|i| word_of_leaf[i].expect("bijective code"))
            .collect();
        prefixes.push(cylinder_prefix(&words).ok_or_else(|| {
            Error::Construction(format!("cluster {c} is not a single cylinder of the code"))
        })?);
    }

    // Nearest f-leaf for every target leaf.
    let f_centers = tree.leaf_centers();
    let t_leaves = target.leaves();
    let mut members: Vec<Vec<(&Word, f64, usize)>> = vec![Vec::new(); clusters.len()];
    for (ti, &tid) in t_leaves.iter().enumerate() {
        let c = &target.ball(tid).center;
        let (best, d) = f_centers
            .iter()
            .enumerate()
            .map(|(i, fc)| (i, fc.dist2(c)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        members[cluster_of_leaf[best]].push((word_of_leaf[best].expect("bijective"), d, ti));
    }

    let mut code = BTreeMap::new();
    let mut cluster_sizes = Vec::with_capacity(clusters.len());
    for (c, mut m) in members.into_iter().enumerate() {
        if m.is_empty() {
            return Err(Error::Construction(format!("cluster {c} received no target leaves")));
        }
        m.sort_by(|a, b| a.0.cmp(b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
        cluster_sizes.push(m.len());
        for (tail, (_, _, ti)) in balanced_code(m.len()).into_iter().zip(m) {
            code.insert(prefixes[c].concat(&tail), ti);
        }
    }
    let g = CodedEmbedding::new(target.clone(), code)?;
    let rho = rho_bound(f, &g);
    if !(rho < eps) {
        return Err(Error::Construction(format!("regluing moved points by {rho:e} >= eps")));
    }
    Ok(ReglueOutcome {
        embedding: g,
        delta,
        cluster_level: level,
        cluster_sizes,
        rho,
        hausdorff_ub: bracket.ub,
    })
}

/// Nodes at the shallowest level `j` such that they, together with the leaves
/// above level `j`, all have diameter below `max_diam`.
fn cluster_frontier(tree: &BallTree, max_diam: f64) -> Result<(usize, Vec<NodeId>)> {
    for j in 0..=tree.depth() {
        let mut frontier = Vec::new();
        let mut ok = true;
        for (level, nodes) in tree.levels().iter().enumerate().take(j + 1) {
            for index in 0..nodes.len() {
                let id = NodeId { level, index };
                if level == j || tree.is_leaf(id) {
                    if 2.0 * tree.ball(id).radius >= max_diam {
                        ok = false;
                    }
                    frontier.push(id);
                }
            }
        }
        if ok {
            return Ok((j, frontier));
        }
    }
    Err(Error::ResolutionTooCoarse {
        leaf_radius: tree.leaf_radius(),
        budget: max_diam,
    })
}

/// Common prefix `p` of `words` when they partition the cylinder of `p`.
fn cylinder_prefix(words: &[&Word]) -> Option<Word> {
    let first = words.first()?;
    let mut len = first.len();
    for w in &words[1..] {
        len = len.min(
            first
                .as_str()
                .bytes()
                .zip(w.as_str().bytes())
                .take_while(|(a, b)| a == b)
                .count(),
        );
    }
    let prefix = Word(first.as_str()[..len].to_string());
    let tails: Vec<Word> = words.iter().map(|w| Word(w.as_str()[len..].to_string())).collect();
    is_complete_prefix_code(tails.iter()).then_some(prefix)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pruned_hausdorff_matches_brute_force() {
        for seed in 0..20 {
            let a = standard_cantor_in_ball(&Ball::new(Point(vec![0.0, 0.0]), 1.0).unwrap(), 5, seed);
            let b = standard_cantor_in_ball(&Ball::new(Point(vec![0.3, -0.2]), 0.7).unwrap(), 4, seed + 100);
            let brute = geom::hausdorff_distance(&a.leaf_centers(), &b.leaf_centers()).unwrap();
            let iv = hausdorff_between(&a, &b).unwrap();
            let slack = a.leaf_radius() + b.leaf_radius();
            assert!((iv.ub - slack - brute).abs() < 1e-12, "{seed}");
        }
    }

    fn unit_ball(dim: usize) -> Ball {
        Ball::new(Point::origin(dim), 1.0).unwrap()
    }

    #[test]
    fn depth_zero_is_the_ball() {
        let b = unit_ball(2);
        let t = standard_cantor_in_ball(&b, 0, 1);
        assert_eq!(t.leaf_balls(), vec![&b]);
    }

    #[test]
    fn standard_cantor_shape() {
        let b = Ball::new(Point(vec![1.0, -2.0]), 2.0).unwrap();
        let t = standard_cantor_in_ball(&b, 5, 3);
        t.check_invariants().unwrap();
        let leaves = t.leaf_balls();
        assert_eq!(leaves.len(), 32);
        for l in &leaves {
            assert!((l.radius - 2.0 / 4f64.powi(5)).abs() < 1e-15);
            assert!(b.contains_in_interior(l));
        }
        for a in 0..leaves.len() {
            for c in a + 1..leaves.len() {
                assert!(leaves[a].gap(leaves[c]) > 0.0);
            }
        }
        let d = geom::hausdorff_distance(&t.leaf_centers(), &[b.center.clone()]).unwrap();
        assert!(d <= b.radius);
    }

    #[test]
    fn invariant_checker_rejects_bad_trees() {
        let root = unit_ball(1);
        let overlap = BallTree::new(
            1,
            vec![
                vec![root.clone()],
                vec![
                    Ball::new(Point(vec![-0.2]), 0.3).unwrap(),
                    Ball::new(Point(vec![0.2]), 0.3).unwrap(),
                ],
            ],
            vec![vec![], vec![0, 0]],
        );
        assert!(matches!(overlap, Err(Error::InvalidTree(_))));
        let single_child = BallTree::new(
            1,
            vec![vec![root.clone()], vec![Ball::new(Point(vec![0.0]), 0.3).unwrap()]],
            vec![vec![], vec![0]],
        );
        assert!(single_child.is_err());
        let slow_decay = BallTree::new(
            1,
            vec![
                vec![Ball::new(Point(vec![0.0]), 10.0).unwrap()],
                vec![
                    Ball::new(Point(vec![-6.0]), 3.9).unwrap(),
                    Ball::new(Point(vec![4.0]), 5.5).unwrap(),
                ],
            ],
            vec![vec![], vec![0, 0]],
        );
        assert!(slow_decay.is_err());
        let escaping = BallTree::new(
            1,
            vec![
                vec![root],
                vec![
                    Ball::new(Point(vec![-0.6]), 0.4).unwrap(),
                    Ball::new(Point(vec![0.5]), 0.2).unwrap(),
                ],
            ],
            vec![vec![], vec![0, 0]],
        );
        assert!(escaping.is_err());
    }

    #[test]
    fn tree_json_round_trip() {
        let t = standard_cantor_in_ball(&unit_ball(2), 2, 9);
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.starts_with("{\"dim\":2,\"levels\":[[{\"c\":[0.0,0.0],\"r\":1.0}]"));
        let back: BallTree = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn hausdorff_between_self_and_translate() {
        let t = standard_cantor_in_ball(&unit_ball(2), 4, 2);
        let i = hausdorff_between(&t, &t).unwrap();
        assert!(i.contains(0.0));
        assert!(i.width() <= 4.0 * t.leaf_radius() + 1e-15);
        let v = [30.0, -40.0];
        let j = hausdorff_between(&t, &t.translated(&v)).unwrap();
        assert!(j.contains(50.0));
        assert!(j.width() <= 2.0 * 2.0 * t.leaf_radius() + 1e-12);
    }

    #[test]
    fn union_rejects_overlapping_roots() {
        let a = standard_cantor_in_ball(&unit_ball(2), 1, 1);
        let b = a.translated(&[1.5, 0.0]);
        assert!(BallTree::union(&[a.clone(), b]).is_err());
        let c = a.translated(&[3.0, 0.0]);
        let u = BallTree::union(&[a, c]).unwrap();
        assert_eq!(u.leaves().len(), 4);
    }

    #[test]
    fn balanced_codes_are_complete() {
        for m in 1..40 {
            let code = balanced_code(m);
            assert_eq!(code.len(), m);
            assert!(is_complete_prefix_code(code.iter()));
        }
        assert_eq!(
            balanced_code(3).iter().map(Word::as_str).collect::<Vec<_>>(),
            vec!["00", "01", "1"]
        );
        assert!(!is_complete_prefix_code(
            [Word::try_from("0".to_string()).unwrap()].iter()
        ));
    }

    #[test]
    fn path_code_of_standard_tree() {
        let t = standard_cantor_in_ball(&unit_ball(2), 3, 5);
        let f = CodedEmbedding::from_tree(t).unwrap();
        assert_eq!(f.depth(), 3);
        assert_eq!(f.code().len(), 8);
        assert_eq!(rho_bound(&f, &f), 0.0);
    }

    #[test]
    fn reglue_identity() {
        let t = standard_cantor_in_ball(&unit_ball(2), 6, 8);
        let f = CodedEmbedding::from_tree(t.clone()).unwrap();
        let out = reglue_embedding(&f, &t, 0.5).unwrap();
        assert_eq!(out.embedding, f);
        assert_eq!(out.rho, 0.0);
    }

    #[test]
    fn reglue_rejects_distant_target() {
        let t = standard_cantor_in_ball(&unit_ball(2), 4, 8);
        let f = CodedEmbedding::from_tree(t.clone()).unwrap();
        let far = t.translated(&[0.3, 0.0]);
        match reglue_embedding(&f, &far, 0.5) {
            Err(Error::ReglueTooFar { delta, ub }) => assert!(ub >= delta && delta > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
