use serde::{Deserialize, Serialize};

use crate::ball_system::BallTree;
use crate::error::{Error, Result};
use crate::geom::{general_position_margin, Ball, PointSet};
use crate::grassmann::{random_subspace_with, Subspace};
use crate::par;
use crate::rng;

use super::components::{components_with_radii, max_component_diameter, DisjointSet};
use super::lambda::{lambda_certified_with, LambdaBracket, Stop, DEFAULT_CELL_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    Certified,
    Sampled,
}

impl std::str::FromStr for VerifyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "certified" => Ok(VerifyMode::Certified),
            "sampled" => Ok(VerifyMode::Sampled),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode {other:?} (expected certified or sampled)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Subspaces drawn per admissible dimension in sampled mode.
    pub samples_per_dim: usize,
    pub seed: u64,
    /// Witnesses kept in a FAIL report.
    pub max_witnesses: usize,
    /// Keep one row per sample for [`ComponentReport::to_csv`].
    pub record_samples: bool,
    /// Relative width at which the certified mode stops refining `lambda`.
    pub lambda_rel_tol: f64,
    pub cell_budget: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples_per_dim: 1000,
            seed: 0,
            max_witnesses: 8,
            record_samples: false,
            lambda_rel_tol: 0.05,
            cell_budget: DEFAULT_CELL_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceWitness {
    pub subspace: Subspace,
    pub block: Vec<usize>,
    pub diameter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub ell: usize,
    pub sample: usize,
    pub max_diameter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub mode: VerifyMode,
    pub pass: bool,
    pub dim: usize,
    pub points: usize,
    pub delta: f64,
    /// `2 delta (N + 1)`.
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<LambdaBracket>,
    /// `lb / (2 (|A| - 1))`: every `delta` below it is certified.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified_delta_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
    pub samples_per_dim: usize,
    pub sampled: usize,
    pub violations: usize,
    /// Largest observed component diameter divided by the threshold.
    pub max_ratio: f64,
    pub witnesses: Vec<SubspaceWitness>,
    #[serde(skip)]
    pub records: Vec<SampleRecord>,
}

impl ComponentReport {
    /// One row per recorded sample: `ell,sample,max_diameter,threshold`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ell,sample,max_diameter,threshold\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{:e},{:e}\n", r.ell, r.sample, r.max_diameter, self.threshold));
        }
        out
    }
}

const CHUNK: usize = 2048;

/// Checks that every connected component of `p_L(union_a B(a, delta))` has
/// diameter below `2 delta (N + 1)`.
///
/// Certified mode: the bound holds for every subspace once
/// `delta < lambda(A) / (2 (|A| - 1))`, which is checked against a certified
/// lower bound on `lambda`. Sets with `|A| <= N` need no `lambda`: a chain of at
/// most `N` balls is shorter than the threshold. For `N = 1` the only
/// admissible projections are trivial and the union itself is checked.
///
/// Sampled mode: draws subspaces of every dimension `1..N-1`, plus the
/// identity, and reports violating subspaces as witnesses.
pub fn verify_component_bound(
    a: &PointSet,
    delta: f64,
    mode: VerifyMode,
    opts: &VerifyOptions,
) -> Result<ComponentReport> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let margin = general_position_margin(a.points());
    if !margin.is_positive() {
        return Err(Error::NotInGeneralPosition {
            margin: margin.value.unwrap_or(0.0),
        });
    }
    let n = a.dim();
    let t = a.len();
    let threshold = 2.0 * delta * (n as f64 + 1.0);
    let mut report = ComponentReport {
        mode,
        pass: true,
        dim: n,
        points: t,
        delta,
        threshold,
        lambda: None,
        certified_delta_bound: None,
        certificate: None,
        samples_per_dim: 0,
        sampled: 0,
        violations: 0,
        max_ratio: 0.0,
        witnesses: vec![],
        records: vec![],
    };

    // The unprojected union (L = R^N) is always checked directly.
    let flat: Vec<f64> = a.points().iter().flat_map(|p| p.0.iter().copied()).collect();
    let (d_full, block) = max_component_diameter(&flat, n, delta, &mut DisjointSet::new(t));
    report.max_ratio = d_full / threshold;
    if d_full >= threshold {
        report.pass = false;
        report.violations += 1;
        report.witnesses.push(SubspaceWitness {
            subspace: Subspace::full(n),
            block,
            diameter: d_full,
        });
    }

    match mode {
        VerifyMode::Certified => {
            if t <= n {
                report.certificate = Some(format!(
                    "|A| = {t} <= N = {n}: a connected union of at most N balls of radius delta has diameter \
                     at most 2 delta N < 2 delta (N + 1)"
                ));
            } else if n == 1 {
                report.certificate =
                    Some("N = 1: admissible projections are only {0} and R, checked directly".into());
            } else {
                let bracket =
                    lambda_certified_with(a, Stop::Relative(opts.lambda_rel_tol), opts.cell_budget)?;
                let bound = bracket.lb / (2.0 * (t as f64 - 1.0));
                report.certified_delta_bound = Some(bound);
                if delta < bound {
                    report.certificate = Some(format!(
                        "delta = {delta:e} < lambda_lb / (2 (|A| - 1)) = {bound:e}, with lambda_lb = {:e}; \
                         hence every projected component has diameter < 2 delta (N + 1) = {threshold:e}",
                        bracket.lb
                    ));
                } else {
                    report.pass = false;
                }
                report.lambda = Some(bracket);
            }
        }
        VerifyMode::Sampled => {
            report.samples_per_dim = opts.samples_per_dim;
            for ell in 1..n {
                sample_dimension(a, &flat, ell, opts, &mut report);
            }
        }
    }
    Ok(report)
}

struct ChunkResult {
    max_diameter: f64,
    violations: usize,
    witnesses: Vec<SubspaceWitness>,
    records: Vec<SampleRecord>,
}

fn sample_dimension(a: &PointSet, flat: &[f64], ell: usize, opts: &VerifyOptions, report: &mut ComponentReport) {
    let n = a.dim();
    let t = a.len();
    let delta = report.delta;
    let threshold = report.threshold;
    let chunks = par::map_chunks(opts.samples_per_dim, CHUNK, |c, range| {
        let mut r = rng::seeded(
            rng::child_seed(opts.seed, ((ell as u64) << 32) | c as u64),
            rng::stream::AUDIT,
        );
        let mut dsu = DisjointSet::new(t);
        let mut proj = vec![0.0; t * ell];
        let mut out = ChunkResult {
            max_diameter: 0.0,
            violations: 0,
            witnesses: vec![],
            records: vec![],
        };
        for sample in range {
            let l = random_subspace_with(&mut r, ell, n);
            for i in 0..t {
                let p = &flat[i * n..(i + 1) * n];
                for (k, f) in l.frame().iter().enumerate() {
                    proj[i * ell + k] = p.iter().zip(f).map(|(x, y)| x * y).sum();
                }
            }
            let (d, block) = max_component_diameter(&proj, ell, delta, &mut dsu);
            out.max_diameter = out.max_diameter.max(d);
            if opts.record_samples {
                out.records.push(SampleRecord {
                    ell,
                    sample,
                    max_diameter: d,
                });
            }
            if d >= threshold {
                out.violations += 1;
                if out.witnesses.len() < opts.max_witnesses {
                    out.witnesses.push(SubspaceWitness {
                        subspace: l,
                        block,
                        diameter: d,
                    });
                }
            }
        }
        out
    });
    for c in chunks {
        report.max_ratio = report.max_ratio.max(c.max_diameter / threshold);
        report.violations += c.violations;
        for w in c.witnesses {
            if report.witnesses.len() < opts.max_witnesses {
                report.witnesses.push(w);
            }
        }
        report.records.extend(c.records);
    }
    report.sampled += opts.samples_per_dim;
    report.pass &= report.violations == 0;
}

// ---------------------------------------------------------------------------
// Z_k

/// Cover of a compactum by disjoint closed balls certifying membership in
/// `Z_k`: every ball has diameter `< 1/k` and every projected component of
/// their union has diameter `< 1/k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZkCertificate {
    pub k: u32,
    pub dim: usize,
    pub balls: Vec<Ball>,
    /// `2 r` per ball.
    pub diameters: Vec<f64>,
    /// Common radius of the balls (certified form).
    pub delta: f64,
    /// Centers of the balls, in general position.
    pub generating_set: PointSet,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<LambdaBracket>,
    /// Every compactum within this Hausdorff distance of the certified set is
    /// still covered by the same balls with the same conclusions.
    pub robustness_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZkReport {
    pub pass: bool,
    pub mode: VerifyMode,
    pub k: u32,
    pub conditions: Vec<ConditionCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<ComponentReport>,
    pub witnesses: Vec<SubspaceWitness>,
    /// Per-subspace rows when [`VerifyOptions::record_samples`] is set.
    #[serde(skip)]
    pub records: Vec<SampleRecord>,
}

impl ZkReport {
    /// `ell,sample,max_diameter,threshold` rows for the component condition;
    /// the threshold is `1/k`.
    pub fn to_csv(&self) -> String {
        let threshold = 1.0 / self.k as f64;
        let mut out = String::from("ell,sample,max_diameter,threshold\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{:e},{threshold:e}\n", r.ell, r.sample, r.max_diameter));
        }
        out
    }

    pub fn failed(&self) -> Vec<&str> {
        self.conditions.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }
}

fn check(name: &str, pass: bool, detail: String) -> ConditionCheck {
    ConditionCheck {
        name: name.into(),
        pass,
        detail,
    }
}

/// Verifies a `Z_k` certificate against the ball system `x` (its leaves stand
/// for the compactum): disjointness of the cover, then
/// (1) every leaf lies in the interior of a cover ball,
/// (2) every cover ball's interior meets a leaf,
/// (3) every cover ball has diameter `< 1/k`,
/// (4) every projected component of the cover has diameter `< 1/k`.
pub fn verify_zk(cert: &ZkCertificate, x: &BallTree, mode: VerifyMode, opts: &VerifyOptions) -> Result<ZkReport> {
    if cert.dim != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: cert.dim,
            found: x.dim(),
        });
    }
    if cert.k == 0 {
        return Err(Error::MalformedCertificate("k must be >= 1".into()));
    }
    if cert.balls.is_empty() {
        return Err(Error::MalformedCertificate("no balls".into()));
    }
    let consistent = cert.diameters.len() == cert.balls.len()
        && cert
            .balls
            .iter()
            .zip(&cert.diameters)
            .all(|(b, &d)| (d - 2.0 * b.radius).abs() <= 1e-12 * d.abs().max(f64::MIN_POSITIVE));
    if !consistent {
        return Err(Error::MalformedCertificate("diameters do not match the radii".into()));
    }
    if let Some(b) = cert.balls.iter().find(|b| b.dim() != cert.dim) {
        return Err(Error::DimensionMismatch {
            expected: cert.dim,
            found: b.dim(),
        });
    }
    if mode == VerifyMode::Certified {
        if let Some(b) = cert
            .balls
            .iter()
            .find(|b| (b.radius - cert.delta).abs() > 1e-12 * cert.delta.abs().max(f64::MIN_POSITIVE))
        {
            return Err(Error::MalformedCertificate(format!(
                "certified mode needs equal radii: found {} and {}",
                b.radius, cert.delta
            )));
        }
        let centers_match = cert.generating_set.len() == cert.balls.len()
            && cert.balls.iter().zip(cert.generating_set.points()).all(|(b, p)| &b.center == p);
        if !centers_match {
            return Err(Error::MalformedCertificate(
                "generating set differs from the ball centers".into(),
            ));
        }
    }

    let inv_k = 1.0 / cert.k as f64;
    let balls = &cert.balls;
    let mut conditions = Vec::new();

    let overlap = (0..balls.len())
        .flat_map(|i| (i + 1..balls.len()).map(move |j| (i, j)))
        .find(|&(i, j)| !balls[i].is_disjoint(&balls[j]));
    conditions.push(check(
        "disjointness",
        overlap.is_none(),
        match overlap {
            None => format!("{} balls pairwise disjoint", balls.len()),
            Some((i, j)) => format!("balls {i} and {j} intersect"),
        },
    ));

    let leaves = x.leaf_balls();
    let uncovered = leaves
        .iter()
        .position(|leaf| !balls.iter().any(|b| b.contains_in_interior(leaf)));
    conditions.push(check(
        "covering",
        uncovered.is_none(),
        match uncovered {
            None => format!("all {} leaves inside some ball interior", leaves.len()),
            Some(i) => format!("leaf {i} is not inside any ball interior"),
        },
    ));

    let empty = balls
        .iter()
        .position(|b| !leaves.iter().any(|leaf| b.contains_in_interior(leaf)));
    conditions.push(check(
        "nonempty",
        empty.is_none(),
        match empty {
            None => "every ball interior contains a leaf".into(),
            Some(i) => format!("ball {i} contains no leaf"),
        },
    ));

    let fat = balls.iter().position(|b| 2.0 * b.radius >= inv_k);
    conditions.push(check(
        "ball_diameter",
        fat.is_none(),
        match fat {
            None => format!("all diameters < 1/k = {inv_k:e}"),
            Some(i) => format!("ball {i} has diameter {:e} >= 1/k", 2.0 * balls[i].radius),
        },
    ));

    let mut components = None;
    let records;
    let witnesses;
    match mode {
        VerifyMode::Certified => {
            let report = verify_component_bound(&cert.generating_set, cert.delta, VerifyMode::Certified, opts)?;
            let small = report.threshold < inv_k;
            let pass = small && report.pass;
            let detail = if !small {
                format!("2 delta (N + 1) = {:e} is not below 1/k = {inv_k:e}", report.threshold)
            } else if !report.pass {
                "component bound not certified for this delta".into()
            } else {
                format!(
                    "components below 2 delta (N + 1) = {:e} < 1/k for every subspace",
                    report.threshold
                )
            };
            conditions.push(check("component_diameter", pass, detail));
            witnesses = report.witnesses.clone();
            records = report.records.clone();
            components = Some(report);
        }
        VerifyMode::Sampled => {
            let (count, found, rows) = sampled_zk_components(cert, opts);
            records = rows;
            let pass = found.is_empty();
            conditions.push(check(
                "component_diameter",
                pass,
                if pass {
                    format!("{count} sampled subspaces, all components < 1/k")
                } else {
                    format!("{} violating subspaces kept as witnesses", found.len())
                },
            ));
            witnesses = found;
        }
    }

    Ok(ZkReport {
        pass: conditions.iter().all(|c| c.pass),
        mode,
        k: cert.k,
        conditions,
        components,
        witnesses,
        records,
    })
}

/// Sampled check of condition (4) with individual radii.
fn sampled_zk_components(cert: &ZkCertificate, opts: &VerifyOptions) -> (usize, Vec<SubspaceWitness>, Vec<SampleRecord>) {
    let n = cert.dim;
    let inv_k = 1.0 / cert.k as f64;
    let radii: Vec<f64> = cert.balls.iter().map(|b| b.radius).collect();
    let mut witnesses = Vec::new();
    let mut records = Vec::new();
    let mut consider = |l: Subspace, ell: usize, sample: usize| {
        let proj: Vec<Vec<f64>> = cert.balls.iter().map(|b| l.coords(&b.center.0)).collect();
        let (blocks, diam) = components_with_radii(&proj, &radii);
        if opts.record_samples {
            records.push(SampleRecord {
                ell,
                sample,
                max_diameter: diam.iter().copied().fold(0.0, f64::max),
            });
        }
        if let Some((b, &d)) = blocks.iter().zip(&diam).find(|(_, &d)| d >= inv_k) {
            if witnesses.len() < opts.max_witnesses {
                witnesses.push(SubspaceWitness {
                    subspace: l,
                    block: b.clone(),
                    diameter: d,
                });
            }
        }
    };
    consider(Subspace::full(n), n, 0);
    let mut count = 1;
    for ell in 1..n {
        let mut r = rng::seeded(rng::child_seed(opts.seed, ell as u64), rng::stream::AUDIT);
        for sample in 0..opts.samples_per_dim {
            consider(random_subspace_with(&mut r, ell, n), ell, sample);
            count += 1;
        }
    }
    (count, witnesses, records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> PointSet {
        PointSet::from_coords(vec![vec![0.0, 0.0], vec![4.0, 0.0], vec![0.0, 3.0]]).unwrap()
    }

    #[test]
    fn certified_below_threshold_passes() {
        let a = triangle();
        // lambda = 2.4, so the certified bound on delta is just under 0.6.
        let r = verify_component_bound(&a, 0.5, VerifyMode::Certified, &VerifyOptions::default()).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.certified_delta_bound.unwrap() <= 0.6 + 1e-12);
        let r = verify_component_bound(&a, 0.7, VerifyMode::Certified, &VerifyOptions::default()).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn sampled_mode_is_deterministic() {
        let a = triangle();
        let opts = VerifyOptions {
            samples_per_dim: 5000,
            seed: 3,
            record_samples: true,
            ..Default::default()
        };
        let r1 = verify_component_bound(&a, 0.5, VerifyMode::Sampled, &opts).unwrap();
        let r2 = verify_component_bound(&a, 0.5, VerifyMode::Sampled, &opts).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.pass);
        assert_eq!(r1.sampled, 5000);
        assert_eq!(r1.to_csv().lines().count(), 5001);
    }

    #[test]
    fn large_delta_yields_witnesses() {
        // With |A| = N + 1 a component never reaches 2 delta (N + 1).
        let r = verify_component_bound(&triangle(), 100.0, VerifyMode::Sampled, &VerifyOptions::default()).unwrap();
        assert!(r.pass);
        let a = PointSet::from_coords(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.1],
            vec![2.0, -0.1],
            vec![3.0, 0.05],
            vec![4.0, 0.0],
        ])
        .unwrap();
        let r = verify_component_bound(&a, 0.6, VerifyMode::Sampled, &VerifyOptions::default()).unwrap();
        assert!(!r.pass && !r.witnesses.is_empty());
        assert!(r.witnesses.iter().all(|w| w.diameter >= r.threshold));
    }

    #[test]
    fn singleton_passes_trivially() {
        let a = PointSet::from_coords(vec![vec![0.3, 0.1]]).unwrap();
        let r = verify_component_bound(&a, 0.1, VerifyMode::Certified, &VerifyOptions::default()).unwrap();
        assert!(r.pass && r.lambda.is_none());
    }
}
