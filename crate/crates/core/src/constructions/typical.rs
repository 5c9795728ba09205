use serde::{Deserialize, Serialize};

use crate::ball_system::{hausdorff_between, BallTree};
use crate::error::{Error, Result};
use crate::projection_cert::{verify_zk, ConditionCheck, VerifyMode, VerifyOptions, ZkCertificate};
use crate::rng;

use super::robust::{avoid_isolated_projections, avoid_one_point_projections, verify_robustness, RobustnessCertificate};
use super::zk::into_zk;

/// Certificates produced at stage `k`, with the system each step returned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageCertificates {
    pub k: u32,
    pub zk: ZkCertificate,
    pub zk_tree: BallTree,
    pub one_point: RobustnessCertificate,
    /// Absent for `N = 1`, where no subspace has `0 < dim L < N`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isolated: Option<RobustnessCertificate>,
}

/// One perturbation step of the schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub stage: u32,
    pub step: String,
    /// Hausdorff budget granted to the step.
    pub budget: f64,
    /// Certified upper bound on the distance the step actually moved.
    pub hausdorff_ub: f64,
    /// Robustness radius of the certificate the step produced.
    pub robustness: f64,
    /// Smallest remaining radius over all earlier certificates after the step;
    /// absent for the first step.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_remaining: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateBundle {
    pub dim: usize,
    pub eps: f64,
    pub k_max: u32,
    pub depth: usize,
    pub seed: u64,
    pub stages: Vec<StageCertificates>,
    pub ledger: Vec<LedgerEntry>,
    /// Sum of the per-step bounds.
    pub total_hausdorff_ub: f64,
    /// Direct bound between the input and the output.
    pub final_hausdorff_ub: f64,
    pub notes: Vec<String>,
}

struct Ledger {
    remaining: Vec<(String, f64)>,
    entries: Vec<LedgerEntry>,
    total: f64,
}

impl Ledger {
    fn cap(&self) -> f64 {
        self.remaining.iter().map(|r| r.1).fold(f64::INFINITY, f64::min)
    }

    fn record(&mut self, stage: u32, step: &str, budget: f64, ub: f64, robustness: f64) -> Result<()> {
        for r in &mut self.remaining {
            r.1 -= ub;
        }
        let min_remaining = self.cap();
        if !(min_remaining > 0.0) {
            return Err(Error::StageBudgetExhausted {
                stage: stage as usize,
                step: step.into(),
                remaining: min_remaining,
            });
        }
        self.remaining.push((format!("{stage}:{step}"), robustness));
        self.total += ub;
        self.entries.push(LedgerEntry {
            stage,
            step: step.into(),
            budget,
            hausdorff_ub: ub,
            robustness,
            min_remaining: min_remaining.is_finite().then_some(min_remaining),
        });
        Ok(())
    }

    /// Budget for the next step: the stage share, and at most half of the
    /// smallest remaining robustness radius so that later steps keep room.
    fn budget(&self, stage: u32, step: &str, share: f64) -> Result<f64> {
        let b = share.min(0.5 * self.cap());
        if !(b > 0.0) {
            return Err(Error::StageBudgetExhausted {
                stage: stage as usize,
                step: step.into(),
                remaining: b,
            });
        }
        Ok(b)
    }
}

fn exhausted(stage: u32, step: &str, budget: f64) -> impl FnOnce(Error) -> Error + '_ {
    move |e| match e {
        Error::ResolutionTooCoarse { .. } => Error::StageBudgetExhausted {
            stage: stage as usize,
            step: step.into(),
            remaining: budget,
        },
        other => other,
    }
}

/// Runs stages `k = 1..k_max`; stage `k` moves the system into `Z_k`, then
/// away from one-point projections, then (for `N >= 2`) away from
/// `1/k`-isolated projected points. Each step gets `eps 2^-k / 3`, capped at
/// half the smallest remaining robustness radius of the earlier certificates,
/// so the output stays inside every earlier certificate's neighbourhood and
/// within `eps` of the input.
pub fn typical_cantor(
    x0: &BallTree,
    eps: f64,
    k_max: u32,
    depth: usize,
    seed: u64,
) -> Result<(BallTree, CertificateBundle)> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be >= 1".into()));
    }
    let n = x0.dim();
    let mut ledger = Ledger {
        remaining: vec![],
        entries: vec![],
        total: 0.0,
    };
    let mut current = x0.clone();
    let mut stages = Vec::new();
    for k in 1..=k_max {
        let share = eps * (-(k as f64)).exp2() / 3.0;
        let step_seed = |s: u64| rng::child_seed(seed, 16 * k as u64 + s);

        let b = ledger.budget(k, "zk", share)?;
        let zk = into_zk(&current, b, k, depth, step_seed(0)).map_err(exhausted(k, "zk", b))?;
        ledger.record(k, "zk", b, zk.hausdorff_ub, zk.certificate.robustness_radius)?;
        current = zk.tree.clone();

        let b = ledger.budget(k, "one-point", share)?;
        let one = avoid_one_point_projections(&current, b, depth, step_seed(1)).map_err(exhausted(k, "one-point", b))?;
        ledger.record(k, "one-point", b, one.hausdorff_ub, one.delta)?;
        current = one.tree.clone();

        let isolated = if n >= 2 {
            let b = ledger.budget(k, "isolated", share)?;
            let iso =
                avoid_isolated_projections(&current, b, k, depth, step_seed(2)).map_err(exhausted(k, "isolated", b))?;
            ledger.record(k, "isolated", b, iso.hausdorff_ub, iso.delta)?;
            current = iso.tree.clone();
            Some(iso)
        } else {
            None
        };
        stages.push(StageCertificates {
            k,
            zk: zk.certificate,
            zk_tree: zk.tree,
            one_point: one,
            isolated,
        });
    }
    let final_ub = hausdorff_between(x0, &current)?.ub;
    if !(final_ub < eps) {
        return Err(Error::Construction(format!(
            "final Hausdorff bound {final_ub:e} is not below eps = {eps:e}"
        )));
    }
    let mut notes = vec![];
    if n == 1 {
        notes.push(
            "N = 1: the isolated-point step is vacuous and skipped; the projected-component condition of Z_k only concerns L = R".into(),
        );
    }
    let bundle = CertificateBundle {
        dim: n,
        eps,
        k_max,
        depth,
        seed,
        stages,
        ledger: ledger.entries,
        total_hausdorff_ub: ledger.total,
        final_hausdorff_ub: final_ub,
        notes,
    };
    Ok((current, bundle))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleReport {
    pub pass: bool,
    pub checks: Vec<ConditionCheck>,
}

impl BundleReport {
    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }
}

/// Re-verifies every certificate of the bundle against the final system `k`:
/// `Z_k` conditions in certified mode, both robustness audits (with
/// `samples` subspaces per admissible dimension), membership of `k` in every
/// certificate's robustness neighbourhood, and the total budget.
pub fn verify_bundle(
    bundle: &CertificateBundle,
    x0: &BallTree,
    k: &BallTree,
    samples: usize,
    seed: u64,
) -> Result<BundleReport> {
    let mut checks = Vec::new();
    let mut push = |name: String, pass: bool, detail: String| checks.push(ConditionCheck { name, pass, detail });
    let opts = VerifyOptions {
        seed,
        ..Default::default()
    };
    for s in &bundle.stages {
        let zk = verify_zk(&s.zk, k, VerifyMode::Certified, &opts)?;
        push(
            format!("stage {} zk", s.k),
            zk.pass,
            if zk.pass {
                "all four conditions".into()
            } else {
                format!("failed: {:?}", zk.failed())
            },
        );
        let ub = hausdorff_between(&s.zk_tree, k)?.ub;
        push(
            format!("stage {} zk neighbourhood", s.k),
            ub < s.zk.robustness_radius,
            format!("d_H ub {ub:e} vs radius {:e}", s.zk.robustness_radius),
        );
        for (label, cert) in [("one-point", Some(&s.one_point)), ("isolated", s.isolated.as_ref())] {
            let Some(cert) = cert else { continue };
            let r = verify_robustness(cert, k, samples, rng::child_seed(seed, s.k as u64))?;
            push(
                format!("stage {} {label}", s.k),
                r.pass,
                format!(
                    "d_H ub {:e} vs delta {:e}; {} subspaces; failures {:?}",
                    r.hausdorff_ub, r.delta, r.subspaces, r.failures
                ),
            );
        }
    }
    let monotone = bundle.ledger.iter().all(|e| e.hausdorff_ub < e.budget && e.min_remaining.map_or(true, |m| m > 0.0));
    push("ledger".into(), monotone, format!("{} steps", bundle.ledger.len()));
    let final_ub = hausdorff_between(x0, k)?.ub;
    push(
        "total distance".into(),
        final_ub < bundle.eps,
        format!("d_H ub {final_ub:e} vs eps {:e}", bundle.eps),
    );
    Ok(BundleReport {
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball_system::standard_cantor_in_ball;
    use crate::geom::{Ball, Point};

    #[test]
    fn single_stage_in_the_plane() {
        let x0 = standard_cantor_in_ball(&Ball::new(Point::origin(2), 1.0).unwrap(), 3, 1);
        let (k, bundle) = typical_cantor(&x0, 0.3, 1, 3, 5).unwrap();
        assert_eq!(bundle.stages.len(), 1);
        assert_eq!(bundle.ledger.len(), 3);
        let report = verify_bundle(&bundle, &x0, &k, 20, 0).unwrap();
        assert!(report.pass, "{:?}", report.checks);
    }

    #[test]
    fn line_skips_isolated_step() {
        let x0 = standard_cantor_in_ball(&Ball::new(Point::origin(1), 1.0).unwrap(), 3, 1);
        let (k, bundle) = typical_cantor(&x0, 0.3, 2, 3, 5).unwrap();
        assert!(bundle.stages.iter().all(|s| s.isolated.is_none()));
        assert!(!bundle.notes.is_empty());
        assert!(verify_bundle(&bundle, &x0, &k, 10, 0).unwrap().pass);
    }
}
