//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

mod support;

use std::time::{Duration, Instant};

use rand::Rng;

use cantor_proj::ball_system::{hausdorff_between, reglue_embedding, standard_cantor_in_ball, BallTree, CodedEmbedding};
use cantor_proj::constructions::{
    audit_isolated, audit_one_point, avoid_isolated_projections, avoid_one_point_projections, graph_surjection_cantor,
    into_zk, jittered_compactum, projection_defect, typical_cantor, verify_bundle, RobustnessCertificate,
};
use cantor_proj::geom::{affine_rank, diameter, general_position_margin, hausdorff_distance};
use cantor_proj::grassmann::{gr_distance, random_subspace};
use cantor_proj::projection_cert::{
    dyadic_grid_step, extract_chain, lambda_bruteforce, lambda_certified, verify_component_bound, verify_zk,
    VerifyMode, VerifyOptions,
};
use cantor_proj::{Ball, Point, PointSet, Subspace};

use support::{exact_lambda, random_points, rng};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn project_all(l: &Subspace, p: &PointSet) -> Vec<Point> {
    p.points().iter().map(|x| l.project(x).unwrap()).collect()
}

fn random_dims(r: &mut impl Rng) -> (usize, usize) {
    let n = r.gen_range(1..=3);
    (n, r.gen_range(1..=n))
}

// 1 ---------------------------------------------------------------------------

fn projection_contraction() -> Verdict {
    let mut r = rng(1);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for trial in 0..1000u64 {
        let (n, ell) = random_dims(&mut r);
        let (np, nq) = (r.gen_range(1..=20), r.gen_range(1..=20));
        let p = random_points(&mut r, np, n);
        let q = random_points(&mut r, nq, n);
        let l = random_subspace(ell, n, trial).unwrap();
        let before = hausdorff_distance(p.points(), q.points()).unwrap();
        let after = hausdorff_distance(&project_all(&l, &p), &project_all(&l, &q)).unwrap();
        worst = worst.max(after - before);
        if after > before + 1e-10 {
            violations += 1;
        }
    }
    verdict(
        violations == 0,
        format!("1000 (L, P, Q): {violations} violations, max excess {worst:.2e}"),
    )
}

// 2 ---------------------------------------------------------------------------

/// Unit sphere of a line: its two unit vectors.
fn sphere_of_line(l: &Subspace) -> Vec<Point> {
    let u = &l.frame()[0];
    vec![Point(u.clone()), Point(u.iter().map(|x| -x).collect())]
}

fn grassmann_bridge() -> Verdict {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for n in [2usize, 3] {
        for _ in 0..100 {
            let l1 = random_subspace(1, n, r.gen()).unwrap();
            let l2 = random_subspace(1, n, r.gen()).unwrap();
            let oracle = hausdorff_distance(&sphere_of_line(&l1), &sphere_of_line(&l2)).unwrap();
            worst = worst.max((gr_distance(&l1, &l2).unwrap() - oracle).abs());
        }
    }
    verdict(worst < 1e-3, format!("200 line pairs in R^2, R^3: max deviation {worst:.2e}"))
}

// 3 ---------------------------------------------------------------------------

/// Random walk of `delta`-balls, each within `2 delta` of an earlier one, until
/// the union has diameter at least `2 delta (n + 1)`.
fn connected_cluster(r: &mut impl Rng, n: usize, delta: f64) -> Vec<Point> {
    let mut pts = vec![Point::origin(n)];
    let target = 2.0 * delta * (n as f64 + 1.0);
    loop {
        let base = pts[r.gen_range(0..pts.len())].clone();
        let step = cantor_proj::rng::in_ball(r, n, 2.0 * delta);
        pts.push(base.translate(&step));
        if diameter(&pts) + 2.0 * delta >= target && r.gen_bool(0.3) {
            return pts;
        }
    }
}

fn chain_extraction() -> Verdict {
    let mut r = rng(3);
    let mut bad = Vec::new();
    for trial in 0..1000 {
        let n = 1 + trial % 3;
        let delta = r.gen_range(0.01..1.0);
        let pts = connected_cluster(&mut r, n, delta);
        match extract_chain(&pts, delta, n) {
            Ok(chain) => {
                let mut sorted = chain.clone();
                sorted.sort_unstable();
                sorted.dedup();
                let gaps_ok = chain
                    .windows(2)
                    .all(|w| pts[w[0]].dist(&pts[w[1]]) <= 2.0 * delta * (1.0 + 1e-12));
                if chain.len() < n + 1 || sorted.len() != chain.len() || !gaps_ok {
                    bad.push(trial);
                }
            }
            Err(_) => bad.push(trial),
        }
    }
    verdict(bad.is_empty(), format!("1000 clusters: {} failures {:?}", bad.len(), &bad[..bad.len().min(5)]))
}

// 4, 5 ------------------------------------------------------------------------

fn general_position_sets() -> Vec<PointSet> {
    let mut r = rng(4);
    let mut sets = Vec::new();
    for (n, lo) in [(2usize, 3usize), (3, 4)] {
        while sets.iter().filter(|a: &&PointSet| a.dim() == n).count() < 100 {
            let count = r.gen_range(lo..=6);
            let a = random_points(&mut r, count, n);
            if general_position_margin(a.points()).value_or_inf() > 1e-3 {
                sets.push(a);
            }
        }
    }
    sets
}

fn lambda_bracketing(sets: &[PointSet]) -> (Verdict, Vec<f64>) {
    let mut failures = Vec::new();
    let mut lbs = Vec::new();
    let mut widest = 0.0f64;
    for (i, a) in sets.iter().enumerate() {
        let diam = diameter(a.points());
        let tol = 1e-3 * diam;
        let b = match lambda_certified(a, tol) {
            Ok(b) => b,
            Err(e) => {
                failures.push(format!("set {i}: {e}"));
                lbs.push(0.0);
                continue;
            }
        };
        let bf = lambda_bruteforce(a, dyadic_grid_step(a.dim(), b.max_depth + 1)).unwrap();
        let exact = exact_lambda(a);
        widest = widest.max(b.width() / diam);
        if !(b.lb > 0.0 && b.lb <= bf.value && bf.value <= b.ub && b.width() <= tol) {
            failures.push(format!("set {i}: lb {:e} bf {:e} ub {:e}", b.lb, bf.value, b.ub));
        }
        if !(b.lb <= exact * (1.0 + 1e-12) && exact <= b.ub * (1.0 + 1e-12)) {
            failures.push(format!("set {i}: exact {exact:e} outside [{:e}, {:e}]", b.lb, b.ub));
        }
        lbs.push(b.lb);
    }
    (
        verdict(
            failures.is_empty(),
            format!(
                "{} sets (N = 2, 3): {} failures, max width/diam {widest:.2e} {:?}",
                sets.len(),
                failures.len(),
                failures.first()
            ),
        ),
        lbs,
    )
}

fn component_bound(sets: &[PointSet], lbs: &[f64]) -> Verdict {
    let opts = VerifyOptions {
        samples_per_dim: 100_000,
        seed: 5,
        ..Default::default()
    };
    let mut violations = 0;
    let mut sampled = 0;
    let mut worst = 0.0f64;
    for (a, &lb) in sets.iter().zip(lbs) {
        if !(lb > 0.0) {
            return verdict(false, "missing lambda lower bound from criterion 4");
        }
        let delta = 0.9 * lb / (2.0 * (a.len() as f64 - 1.0));
        let rep = verify_component_bound(a, delta, VerifyMode::Sampled, &opts).unwrap();
        violations += rep.violations;
        sampled += rep.sampled;
        worst = worst.max(rep.max_ratio);
    }
    verdict(
        violations == 0,
        format!("{sampled} sampled subspaces: {violations} violations, max diameter/threshold {worst:.3}"),
    )
}

// 6 ---------------------------------------------------------------------------

fn random_system(r: &mut impl Rng, n: usize) -> BallTree {
    let center = Point((0..n).map(|_| r.gen_range(-1.0..1.0)).collect());
    let ball = Ball::new(center, r.gen_range(0.2..1.0)).unwrap();
    standard_cantor_in_ball(&ball, r.gen_range(2..=6), r.gen())
}

fn zk_density() -> Verdict {
    let mut r = rng(6);
    let mut failures = Vec::new();
    for trial in 0..100u32 {
        let x = random_system(&mut r, 2);
        let k = 1 + trial % 3;
        let eps = r.gen_range(0.05..0.3);
        match into_zk(&x, eps, k, 3, r.gen()) {
            Ok(out) => {
                let rep = verify_zk(&out.certificate, &out.tree, VerifyMode::Certified, &VerifyOptions::default())
                    .unwrap();
                if !(out.hausdorff_ub < eps) || !rep.pass {
                    failures.push(format!("X {trial}: ub {:e} eps {eps:e} failed {:?}", out.hausdorff_ub, rep.failed()));
                }
            }
            Err(e) => failures.push(format!("X {trial}: {e}")),
        }
    }
    verdict(
        failures.is_empty(),
        format!("100 X (N = 2, k <= 3): {} failures {:?}", failures.len(), failures.first()),
    )
}

// 7 ---------------------------------------------------------------------------

fn robustness() -> Verdict {
    let mut r = rng(7);
    let mut certs: Vec<RobustnessCertificate> = Vec::new();
    for n in 1..=3 {
        let x = random_system(&mut r, n);
        certs.push(avoid_one_point_projections(&x, 0.1, 3, r.gen()).unwrap());
    }
    for (n, k) in [(2, 1), (2, 3), (3, 2)] {
        let x = random_system(&mut r, n);
        certs.push(avoid_isolated_projections(&x, 0.1, k, 3, r.gen()).unwrap());
    }
    let mut rank_failures = 0;
    let mut isolated = 0;
    let mut pairs = 0;
    for cert in &certs {
        for trial in 0..100u64 {
            let y = jittered_compactum(cert, r.gen()).unwrap();
            if let Err(e) = audit_one_point(cert, y.points(), trial) {
                rank_failures += 1;
                eprintln!("  rank audit: {e}");
            }
            if let Some(k) = cert.k {
                // Ten subspaces per compactum: 10^3 (Y, L) pairs per certificate.
                for _ in 0..10 {
                    let ell = r.gen_range(1..cert.dim);
                    let l = random_subspace(ell, cert.dim, r.gen()).unwrap();
                    pairs += 1;
                    if audit_isolated(y.points(), &l, k).is_err() {
                        isolated += 1;
                    }
                }
            } else {
                // The selection of one point per ball spans R^N.
                let sel: Vec<Point> = cert
                    .generating_set
                    .points()
                    .iter()
                    .map(|c| {
                        y.points()
                            .iter()
                            .find(|p| p.dist(c) < cert.r)
                            .expect("every ball is met")
                            .clone()
                    })
                    .collect();
                if affine_rank(&sel) != cert.dim {
                    rank_failures += 1;
                }
            }
        }
    }
    verdict(
        rank_failures == 0 && isolated == 0,
        format!(
            "{} certificates x 100 compacta: {rank_failures} rank failures; {pairs} (Y, L) pairs: {isolated} isolated points",
            certs.len()
        ),
    )
}

// 8 ---------------------------------------------------------------------------

fn composition() -> Verdict {
    let x0 = standard_cantor_in_ball(&Ball::new(Point::origin(2), 0.01).unwrap(), 6, 8);
    match typical_cantor(&x0, 0.2, 3, 2, 8) {
        Ok((k, bundle)) => {
            let report = verify_bundle(&bundle, &x0, &k, 50, 8).unwrap();
            let ub = hausdorff_between(&x0, &k).unwrap().ub;
            verdict(
                report.pass && ub < 0.2,
                format!(
                    "k_max = 3: {} ledger steps, d_H ub {ub:.3e}, failed checks {:?}",
                    bundle.ledger.len(),
                    report.failed()
                ),
            )
        }
        Err(e) => verdict(false, format!("construction error: {e}")),
    }
}

// 9 ---------------------------------------------------------------------------

fn random_net(r: &mut impl Rng, l: &Subspace, count: usize) -> PointSet {
    let rows = (0..count)
        .map(|_| {
            let c: Vec<f64> = (0..l.dim()).map(|_| r.gen_range(-1.0..1.0)).collect();
            l.embed(&c)
        })
        .collect();
    PointSet::from_coords(rows).unwrap()
}

/// Target near `x`: every leaf replaced by 1 to 3 tiny balls close to it.
fn nearby_target(r: &mut impl Rng, x: &BallTree) -> BallTree {
    let rx = x.leaf_radius();
    let tiny = rx / 50.0;
    let mut balls = Vec::new();
    for c in x.leaf_centers() {
        let dir = cantor_proj::rng::unit_vec(r, x.dim());
        let base = c.translate(&cantor_proj::rng::in_ball(r, x.dim(), 0.5 * rx));
        for j in 0..r.gen_range(1..=3) {
            let off: Vec<f64> = dir.iter().map(|d| d * 3.0 * tiny * j as f64).collect();
            balls.push(Ball::new(base.translate(&off), tiny).unwrap());
        }
    }
    BallTree::new(x.dim(), vec![balls], vec![vec![]]).unwrap()
}

fn appendix() -> Verdict {
    let mut r = rng(9);
    let mut failures = Vec::new();
    for (n, ell) in [(2, 1), (3, 1), (3, 2)] {
        let l = random_subspace(ell, n, r.gen()).unwrap();
        let net = random_net(&mut r, &l, 64);
        let t = graph_surjection_cantor(&net, &l, 4).unwrap();
        let defect = projection_defect(&t, &net, &l).unwrap();
        if !(defect <= t.leaf_radius()) {
            failures.push(format!("surjection N = {n}, dim L = {ell}: defect {defect:e}"));
        }
    }
    let mut reglued = 0;
    for trial in 0..200 {
        let n = 1 + trial % 3;
        let center = Point((0..n).map(|_| r.gen_range(-1.0..1.0)).collect());
        let x = standard_cantor_in_ball(&Ball::new(center, 1.0).unwrap(), 5, r.gen());
        let target = nearby_target(&mut r, &x);
        let f = CodedEmbedding::from_tree(x).unwrap();
        match reglue_embedding(&f, &target, 0.3) {
            Ok(out) => {
                let image_ok = out.embedding.image() == &target && out.embedding.code().len() == target.leaves().len();
                if image_ok && out.rho < 0.3 {
                    reglued += 1;
                } else {
                    failures.push(format!("reglue {trial}: image {image_ok}, rho {:e}", out.rho));
                }
            }
            Err(e) => failures.push(format!("reglue {trial}: {e}")),
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "64-point nets in 3 (N, L) settings; {reglued}/200 regluings exact; {:?}",
            failures.first()
        ),
    )
}

fn main() {
    let sets = general_position_sets();
    let mut lbs = Vec::new();
    let run = |id: u32, name: &str, limit: Duration, f: &mut dyn FnMut() -> Verdict| {
        let t = Instant::now();
        let v = f();
        let el = t.elapsed();
        let pass = v.pass && el < limit;
        println!(
            "criterion {id} {}: {name}: {} [{:.2}s, limit {}s]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            el.as_secs_f64(),
            limit.as_secs()
        );
        pass
    };
    let secs = Duration::from_secs;
    let results = [
        run(1, "projection contraction", secs(10), &mut projection_contraction),
        run(2, "Grassmann metric bridge", secs(30), &mut grassmann_bridge),
        run(3, "chain extraction", secs(10), &mut chain_extraction),
        run(4, "lambda positivity and bracketing", secs(300), &mut || {
            let (v, l) = lambda_bracketing(&sets);
            lbs = l;
            v
        }),
        run(5, "component bound", secs(300), &mut || component_bound(&sets, &lbs)),
        run(6, "Z_k density", secs(120), &mut zk_density),
        run(7, "robustness certificates", secs(120), &mut robustness),
        run(8, "staged composition", secs(120), &mut composition),
        run(9, "surjectivity and regluing", secs(60), &mut appendix),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {}/{} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
