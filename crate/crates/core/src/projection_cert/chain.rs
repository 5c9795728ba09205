use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::geom::Point;

use super::components::components_of_ball_union;

/// Extracts pairwise distinct indices `i_1, ..., i_s` with `s >= n + 1` and
/// consecutive centers at most `2 delta` apart from a connected union of
/// `delta`-balls whose diameter is at least `2 delta (n + 1)`.
///
/// The walk starts at one end `i_1` of a farthest center pair and descends the
/// breadth-first layers `A_0 = {alpha} ⊂ A_1 ⊂ ...` grown from the other end
/// `alpha`, always stepping to a neighbour of strictly smaller layer index.
pub fn extract_chain(centers: &[Point], delta: f64, n: usize) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    let partition = components_of_ball_union(centers, delta)?;
    if partition.blocks.len() != 1 {
        return Err(Error::ChainPrecondition(format!(
            "union of balls is not connected ({} components)",
            partition.blocks.len()
        )));
    }
    let required = 2.0 * delta * (n as f64 + 1.0);
    let diameter = partition.diameters[0];
    if diameter < required {
        return Err(Error::ChainPrecondition(format!(
            "diameter {diameter:e} is below 2*delta*(N+1) = {required:e}"
        )));
    }

    let q = centers.len();
    let (mut start, mut alpha, mut far) = (0, 0, -1.0);
    for i in 0..q {
        for j in i + 1..q {
            let d = centers[i].dist2(&centers[j]);
            if d > far {
                far = d;
                start = i;
                alpha = j;
            }
        }
    }

    let touching = |i: usize, j: usize| centers[i].dist(&centers[j]) <= 2.0 * delta;
    let mut layer = vec![usize::MAX; q];
    layer[alpha] = 0;
    let mut queue = VecDeque::from([alpha]);
    while let Some(i) = queue.pop_front() {
        for j in 0..q {
            if layer[j] == usize::MAX && touching(i, j) {
                layer[j] = layer[i] + 1;
                queue.push_back(j);
            }
        }
    }

    let mut chain = vec![start];
    let mut current = start;
    while current != alpha {
        let next = (0..q)
            .find(|&j| layer[j] + 1 == layer[current] && touching(current, j))
            .expect("breadth-first layers always admit a descent");
        chain.push(next);
        current = next;
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_collinear_chain() {
        let delta = 0.25;
        let n = 3;
        let centers: Vec<Point> = (0..=n).map(|i| Point(vec![2.0 * delta * i as f64, 0.0])).collect();
        let chain = extract_chain(&centers, delta, n).unwrap();
        assert_eq!(chain.len(), n + 1);
        let mut sorted = chain.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
        assert!(chain == vec![0, 1, 2, 3] || chain == vec![3, 2, 1, 0]);
    }

    #[test]
    fn small_diameter_is_rejected() {
        let centers = vec![Point(vec![0.0]), Point(vec![0.5])];
        let err = extract_chain(&centers, 0.5, 2).unwrap_err();
        assert!(matches!(err, Error::ChainPrecondition(ref m) if m.contains("diameter")));
    }

    #[test]
    fn disconnected_union_is_rejected() {
        let centers = vec![Point(vec![0.0]), Point(vec![5.0])];
        let err = extract_chain(&centers, 0.5, 1).unwrap_err();
        assert!(matches!(err, Error::ChainPrecondition(ref m) if m.contains("connected")));
    }
}
