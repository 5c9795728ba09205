mod support;

use proptest::prelude::*;
use rand::Rng;

use cantor_proj::ball_system::{
    balanced_code, hausdorff_between, is_complete_prefix_code, reglue_embedding, rho_bound, standard_cantor_along,
    standard_cantor_in_ball, BallTree, CodedEmbedding,
};
use cantor_proj::geom::hausdorff_distance;
use cantor_proj::{Ball, Point};

use support::rng;

fn ball(center: Vec<f64>, radius: f64) -> Ball {
    Ball::new(Point(center), radius).unwrap()
}

proptest! {
    #[test]
    fn generated_systems_are_valid(
        n in 1usize..=3,
        depth in 0usize..=7,
        radius in 0.01..10.0f64,
        seed in any::<u64>(),
    ) {
        let t = standard_cantor_in_ball(&ball(vec![0.5; n], radius), depth, seed);
        prop_assert!(t.check_invariants().is_ok());
        prop_assert_eq!(t.leaves().len(), 1 << depth);
        prop_assert!((t.leaf_radius() - radius * 0.25f64.powi(depth as i32)).abs() <= 1e-12 * radius);
    }

    #[test]
    fn leaf_centers_resolve_the_limit(n in 1usize..=3, depth in 0usize..=5, seed in any::<u64>()) {
        // Deeper trees from the same seed refine the shallow one.
        let b = ball(vec![0.0; n], 1.0);
        let coarse = standard_cantor_in_ball(&b, depth, seed);
        let fine = standard_cantor_in_ball(&b, depth + 4, seed);
        let d = hausdorff_distance(&coarse.leaf_centers(), &fine.leaf_centers()).unwrap();
        prop_assert!(d <= coarse.leaf_radius());
        let i = hausdorff_between(&coarse, &fine).unwrap();
        prop_assert!(i.lb <= d && d <= i.ub);
    }

    #[test]
    fn balanced_codes_are_complete(m in 1usize..300) {
        let code = balanced_code(m);
        prop_assert_eq!(code.len(), m);
        prop_assert!(is_complete_prefix_code(&code));
        let (lo, hi) = code.iter().fold((usize::MAX, 0), |(lo, hi), w| (lo.min(w.len()), hi.max(w.len())));
        prop_assert!(hi - lo <= 1);
    }
}

#[test]
fn invariant_checker_rejects_bad_systems() {
    let parent = ball(vec![0.0, 0.0], 1.0);
    let overlapping = vec![ball(vec![-0.1, 0.0], 0.2), ball(vec![0.1, 0.0], 0.2)];
    assert!(BallTree::new(2, vec![vec![parent.clone()], overlapping], vec![vec![], vec![0, 0]]).is_err());
    let escaping = vec![ball(vec![-0.9, 0.0], 0.2), ball(vec![0.5, 0.0], 0.2)];
    assert!(BallTree::new(2, vec![vec![parent.clone()], escaping], vec![vec![], vec![0, 0]]).is_err());
    let only_child = vec![ball(vec![0.0, 0.0], 0.2)];
    assert!(BallTree::new(2, vec![vec![parent.clone()], only_child], vec![vec![], vec![0]]).is_err());
    let fine = vec![ball(vec![-0.5, 0.0], 0.25), ball(vec![0.5, 0.0], 0.25)];
    assert!(BallTree::new(2, vec![vec![parent], fine], vec![vec![], vec![0, 0]]).is_ok());
}

#[test]
fn linear_pattern_stays_on_its_line() {
    let t = standard_cantor_along(&ball(vec![1.0, 2.0, 3.0], 2.0), 5, &[0.0, 3.0, 4.0]).unwrap();
    t.check_invariants().unwrap();
    for c in t.leaf_centers() {
        assert!((c.0[0] - 1.0).abs() < 1e-12);
        assert!((4.0 * (c.0[1] - 2.0) - 3.0 * (c.0[2] - 3.0)).abs() < 1e-12);
    }
    assert!(standard_cantor_along(&ball(vec![0.0], 1.0), 2, &[0.0]).is_err());
}

#[test]
fn union_keeps_pieces_apart() {
    let a = standard_cantor_in_ball(&ball(vec![0.0, 0.0], 1.0), 3, 1);
    let b = standard_cantor_in_ball(&ball(vec![3.0, 0.0], 1.0), 3, 2);
    let u = BallTree::union(&[a.clone(), b]).unwrap();
    u.check_invariants().unwrap();
    assert_eq!(u.leaves().len(), 16);
    let c = standard_cantor_in_ball(&ball(vec![0.5, 0.0], 1.0), 3, 2);
    assert!(BallTree::union(&[a, c]).is_err());
}

/// A target near `x`: each leaf replaced by one to three tiny balls.
fn nearby(r: &mut impl Rng, x: &BallTree) -> BallTree {
    let tiny = x.leaf_radius() / 50.0;
    let balls = x
        .leaf_centers()
        .iter()
        .flat_map(|c| {
            let count = r.gen_range(1..=3);
            (0..count)
                .map(|j| {
                    let mut p = c.0.clone();
                    p[0] += 3.0 * tiny * j as f64;
                    ball(p, tiny)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    BallTree::new(x.dim(), vec![balls], vec![vec![]]).unwrap()
}

#[test]
fn regluing_hits_the_target_exactly() {
    let mut r = rng(21);
    for trial in 0..200u64 {
        let n = 1 + (trial % 3) as usize;
        let x = standard_cantor_in_ball(&ball(vec![0.0; n], 1.0), 4, trial);
        let target = nearby(&mut r, &x);
        let f = CodedEmbedding::from_tree(x).unwrap();
        let out = reglue_embedding(&f, &target, 0.3).unwrap();
        assert_eq!(out.embedding.image(), &target);
        assert_eq!(out.embedding.code().len(), target.leaves().len());
        assert!(out.rho < 0.3, "trial {trial}: rho {}", out.rho);
        assert!((rho_bound(&f, &out.embedding) - out.rho).abs() <= 1e-12);
    }
}

#[test]
fn regluing_refuses_far_targets() {
    let x = standard_cantor_in_ball(&ball(vec![0.0, 0.0], 1.0), 3, 0);
    let far = x.translated(&[10.0, 0.0]);
    let f = CodedEmbedding::from_tree(x).unwrap();
    assert!(reglue_embedding(&f, &far, 0.3).is_err());
}

#[test]
fn embeddings_roundtrip_through_json() {
    let x = standard_cantor_in_ball(&ball(vec![0.0, 0.0], 1.0), 3, 4);
    let f = CodedEmbedding::from_tree(x).unwrap();
    let s = serde_json::to_string(&f).unwrap();
    let back: CodedEmbedding = serde_json::from_str(&s).unwrap();
    assert_eq!(back, f);
    // A code that is not a bijection is refused on load.
    let broken = s.replacen("\"000\":0", "\"000\":1", 1);
    assert!(serde_json::from_str::<CodedEmbedding>(&broken).is_err());
}
