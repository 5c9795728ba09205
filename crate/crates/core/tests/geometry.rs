mod support;

use proptest::prelude::*;
use rand::Rng;

use cantor_proj::geom::{
    finite_general_position_approx, general_position_margin, hausdorff_distance, is_admissible_approximation,
    perturb_to_general_position,
};
use cantor_proj::grassmann::{gr_distance, random_subspace, Subspace};
use cantor_proj::{Point, PointSet};

use support::{random_points, rng};

fn coords(dim: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0..10.0f64, dim), 1..max)
}

fn dim_and_sets() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    (1usize..=3).prop_flat_map(|n| (coords(n, 12), coords(n, 12), coords(n, 12)))
}

fn pts(rows: &[Vec<f64>]) -> Vec<Point> {
    rows.iter().map(|r| Point(r.clone())).collect()
}

proptest! {
    #[test]
    fn hausdorff_is_a_metric((a, b, c) in dim_and_sets()) {
        let (a, b, c) = (pts(&a), pts(&b), pts(&c));
        let ab = hausdorff_distance(&a, &b).unwrap();
        let ba = hausdorff_distance(&b, &a).unwrap();
        let bc = hausdorff_distance(&b, &c).unwrap();
        let ac = hausdorff_distance(&a, &c).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn projection_is_a_contraction((p, q, _) in dim_and_sets(), seed in any::<u64>()) {
        let n = p[0].len();
        let ell = 1 + (seed as usize % n);
        let l = random_subspace(ell, n, seed).unwrap();
        let proj = |s: &[Point]| -> Vec<Point> { s.iter().map(|x| l.project(x).unwrap()).collect() };
        let (p, q) = (pts(&p), pts(&q));
        let before = hausdorff_distance(&p, &q).unwrap();
        let after = hausdorff_distance(&proj(&p), &proj(&q)).unwrap();
        prop_assert!(after <= before + 1e-10);
    }

    #[test]
    fn projection_moves_with_the_subspace(x in coords(3, 12), s1 in any::<u64>(), s2 in any::<u64>(), ell in 1usize..=2) {
        let x = pts(&x);
        let l1 = random_subspace(ell, 3, s1).unwrap();
        let l2 = random_subspace(ell, 3, s2).unwrap();
        let p1: Vec<Point> = x.iter().map(|p| l1.project(p).unwrap()).collect();
        let p2: Vec<Point> = x.iter().map(|p| l2.project(p).unwrap()).collect();
        let radius = x.iter().map(Point::norm).fold(0.0, f64::max);
        let d = hausdorff_distance(&p1, &p2).unwrap();
        prop_assert!(d <= gr_distance(&l1, &l2).unwrap() * radius + 1e-9);
    }

    #[test]
    fn grassmann_distance_is_a_metric(n in 2usize..=4, s in any::<[u64; 3]>()) {
        let ell = 1 + (s[0] as usize % (n - 1));
        let [a, b, c] = s.map(|seed| random_subspace(ell, n, seed).unwrap());
        let ab = gr_distance(&a, &b).unwrap();
        prop_assert!((ab - gr_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(gr_distance(&a, &a).unwrap() < 1e-7);
        prop_assert!(gr_distance(&a, &c).unwrap() <= ab + gr_distance(&b, &c).unwrap() + 1e-12);
        prop_assert!(ab <= 2f64.sqrt() + 1e-12);
    }

    #[test]
    fn random_frames_are_orthonormal(n in 1usize..=5, seed in any::<u64>()) {
        let ell = seed as usize % (n + 1);
        let l = random_subspace(ell, n, seed).unwrap();
        prop_assert_eq!(l.dim(), ell);
        prop_assert!(l.frame_residual() < 1e-10);
        prop_assert_eq!(l.complement().dim(), n - ell);
        prop_assert_eq!(&random_subspace(ell, n, seed).unwrap(), &l);
    }
}

#[test]
fn general_position_survives_small_jitter() {
    let mut r = rng(11);
    for trial in 0..300u64 {
        let n = 1 + (trial % 3) as usize;
        let count = r.gen_range(2..=7);
        let a = random_points(&mut r, count, n);
        let a = perturb_to_general_position(&a, 1e-3, trial).unwrap();
        let m = general_position_margin(a.points());
        assert!(m.is_positive());
        let eta = m.stability_radius();
        if !eta.is_finite() {
            continue;
        }
        for _ in 0..10 {
            let moved: Vec<Point> = a
                .points()
                .iter()
                .map(|p| p.translate(&cantor_proj::rng::in_ball(&mut r, n, 0.999 * eta)))
                .collect();
            assert!(general_position_margin(&moved).is_positive(), "trial {trial}");
        }
    }
}

#[test]
fn degenerate_systems_have_zero_margin() {
    let collinear = PointSet::from_coords(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
    assert!(!general_position_margin(collinear.points()).is_positive());
    let fixed = perturb_to_general_position(&collinear, 0.01, 3).unwrap();
    assert!(general_position_margin(fixed.points()).is_positive());
    for (p, q) in fixed.points().iter().zip(collinear.points()) {
        assert!(p.dist(q) < 0.01);
    }
}

#[test]
fn approximations_meet_their_postconditions() {
    let mut r = rng(12);
    for trial in 0..1000u64 {
        let n = 1 + (trial % 3) as usize;
        let count = r.gen_range(1..=30);
        let k = random_points(&mut r, count, n);
        let eps = r.gen_range(0.01..1.0);
        let a = finite_general_position_approx(&k, eps, trial).unwrap();
        assert!(is_admissible_approximation(&k, &a, eps), "trial {trial}");
    }
}

#[test]
fn orthogonal_lines_are_at_distance_sqrt_two() {
    let a = Subspace::line(&[1.0, 0.0]).unwrap();
    let b = Subspace::line(&[0.0, 1.0]).unwrap();
    assert!((gr_distance(&a, &b).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    let c = Subspace::line(&[0.0, 1.0, 0.0]).unwrap();
    assert!(gr_distance(&a, &c).is_err());
}
