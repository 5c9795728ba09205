//! Test oracles shared by the integration and acceptance targets.
#![allow(dead_code)]

use cantor_proj::{Point, PointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> PointSet {
    let rows = (0..count)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    PointSet::from_coords(rows).unwrap()
}

/// Minimum over ordered `(n+1)`-tuples of distinct points of the summed
/// consecutive distances of the scalars `x`: for reals this is the smallest
/// range of `n + 1` consecutive sorted values.
pub fn window_min(x: &[f64], n: usize) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    s.windows(n + 1).map(|w| w[n] - w[0]).fold(f64::INFINITY, f64::min)
}

fn line_value(a: &PointSet, u: &[f64]) -> f64 {
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let x: Vec<f64> = a
        .points()
        .iter()
        .map(|p| p.0.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() / nu)
        .collect();
    window_min(&x, a.dim())
}

fn diff(p: &Point, q: &Point) -> Vec<f64> {
    p.0.iter().zip(&q.0).map(|(a, b)| a - b).collect()
}

/// Exact `lambda(A)` for `N in {2, 3}` by vertex enumeration.
///
/// For a fixed tuple the sum `sum_j |<v_j, u>|` restricted to a region of
/// constant signs is linear in `u`, so on the sphere its minimum lies on the
/// zero set of some term; repeating the argument on that great circle, the
/// minimum sits where `u` is orthogonal to `N - 1` of the differences. The
/// candidates are therefore the normals to single differences (`N = 2`) and
/// the cross products of pairs of differences (`N = 3`).
pub fn exact_lambda(a: &PointSet) -> f64 {
    let pts = a.points();
    let t = pts.len();
    let mut diffs = Vec::new();
    for i in 0..t {
        for j in i + 1..t {
            diffs.push(diff(&pts[i], &pts[j]));
        }
    }
    let mut best = f64::INFINITY;
    match a.dim() {
        2 => {
            for d in &diffs {
                best = best.min(line_value(a, &[-d[1], d[0]]));
            }
        }
        3 => {
            for (x, d) in diffs.iter().enumerate() {
                for e in &diffs[x + 1..] {
                    let c = [
                        d[1] * e[2] - d[2] * e[1],
                        d[2] * e[0] - d[0] * e[2],
                        d[0] * e[1] - d[1] * e[0],
                    ];
                    let cn = c.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let scale = d.iter().map(|v| v * v).sum::<f64>().sqrt()
                        * e.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if cn > 1e-12 * scale {
                        best = best.min(line_value(a, &c));
                    }
                }
            }
        }
        n => panic!("exact oracle covers N = 2, 3 only, got {n}"),
    }
    best
}

/// Samples uniformly random unit directions and returns the smallest line
/// value seen; always an upper bound on `lambda(A)`.
pub fn sampled_lambda(a: &PointSet, samples: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let n = a.dim();
    (0..samples)
        .map(|_| {
            let u: Vec<f64> = (0..n).map(|_| r.sample::<f64, _>(rand_distr::StandardNormal)).collect();
            line_value(a, &u)
        })
        .fold(f64::INFINITY, f64::min)
}
