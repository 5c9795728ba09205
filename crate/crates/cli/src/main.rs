//! `cantor-proj`: build ball systems, run the certified constructions, and
//! audit certificates.
//!
//! Exit codes: 0 success/PASS, 1 FAIL report written, 2 usage error,
//! 3 internal or budget error.

mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use cantor_proj::ball_system::{
    hausdorff_between, reglue_embedding, standard_cantor_along, standard_cantor_in_ball, BallTree, CodedEmbedding,
};
use cantor_proj::constructions::{
    avoid_isolated_projections, avoid_one_point_projections, densify_for_l, graph_surjection_cantor, into_zk,
    projection_defect, typical_cantor, verify_bundle, verify_robustness, CertificateBundle, RobustnessCertificate,
};
use cantor_proj::grassmann::random_subspace;
use cantor_proj::projection_cert::{
    lambda_certified_with, verify_zk, Stop, VerifyMode, VerifyOptions, ZkCertificate, DEFAULT_CELL_BUDGET,
};
use cantor_proj::{Ball, Error, Point, PointSet, Subspace};

#[derive(Parser)]
#[command(name = "cantor-proj", version, about = "Certified Cantor sets with Cantor-like projections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a standard Cantor ball system.
    Gen(GenArgs),
    /// Run the staged construction and verify the certificate bundle.
    Typical(TypicalArgs),
    /// Move a ball system into Z_k and verify the certificate.
    Zk(ZkArgs),
    /// Perturb away from one-point projections.
    AvoidPoint(AvoidPointArgs),
    /// Perturb away from 1/k-isolated projected points.
    AvoidIsolated(AvoidIsolatedArgs),
    /// Certified bracket for lambda(A).
    Lambda(LambdaArgs),
    /// Project leaves (or points) onto a subspace.
    Project(ProjectArgs),
    /// Ball system whose projection onto L is a given net.
    Surjection(SurjectionArgs),
    /// Replace a system by Cantor segments parallel to L.
    Densify(DensifyArgs),
    /// Re-code an embedding onto a nearby target system.
    Reglue(ReglueArgs),
    /// Hausdorff distance interval between two ball systems.
    Distance(DistanceArgs),
    /// Verify a certificate (Z_k, robustness, or bundle) against a system.
    Audit(AuditArgs),
}

// ---------------------------------------------------------------------------
// argument groups

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(x) => Err(format!("must be a positive finite number, got {x}")),
        Err(e) => Err(e.to_string()),
    }
}

/// A comma-separated vector flag; a newtype so clap treats it as one value.
#[derive(Clone, Debug)]
struct Vector(Vec<f64>);

fn vector_arg(s: &str) -> Result<Vector, String> {
    vector(s).map(Vector)
}

fn vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

#[derive(Args, Clone)]
struct Output {
    /// Main artifact (tree, certificate, or bundle) as JSON; the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG figure of the resulting system (N = 1, 2; N = 3 needs --svg-plane).
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Plane for SVG figures of systems in R^N, N >= 3: two vectors `a,b,c;d,e,f`.
    #[arg(long)]
    svg_plane: Option<String>,
}

#[derive(Args, Clone)]
struct SubspaceArgs {
    /// Subspace as JSON `{ambient, frame}`.
    #[arg(long, conflicts_with_all = ["direction", "span"])]
    subspace: Option<PathBuf>,
    /// Line spanned by a vector `a,b,...`.
    #[arg(long, value_parser = vector_arg, conflicts_with = "span")]
    direction: Option<Vector>,
    /// Span of vectors `a,b;c,d;...`.
    #[arg(long)]
    span: Option<String>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    dim: u32,
    #[arg(long, default_value_t = 6)]
    depth: usize,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    radius: f64,
    /// Center of the root ball (default: origin).
    #[arg(long, value_parser = vector_arg)]
    center: Option<Vector>,
    /// Split every ball along this direction (linear Cantor pattern).
    #[arg(long, value_parser = vector_arg)]
    along: Option<Vector>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TypicalArgs {
    /// Input system; if absent, a standard Cantor system is generated.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..), required_unless_present = "input")]
    dim: Option<u32>,
    /// Depth of the generated input.
    #[arg(long, default_value_t = 6)]
    depth: usize,
    /// Radius of the generated input.
    #[arg(long, default_value_t = 0.01, value_parser = positive)]
    radius: f64,
    #[arg(long, value_parser = positive)]
    eps: f64,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    kmax: u32,
    /// Depth of the Cantor pieces planted by every step.
    #[arg(long, default_value_t = 2)]
    piece_depth: usize,
    /// Subspaces per admissible dimension in the robustness audits.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Final ball system as JSON.
    #[arg(long)]
    tree_out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ZkArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    k: u32,
    #[arg(long, value_parser = positive)]
    eps: f64,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Certified)]
    mode: Mode,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long)]
    tree_out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct AvoidPointArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_parser = positive)]
    eps: f64,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tree_out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct AvoidIsolatedArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_parser = positive)]
    eps: f64,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    k: u32,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Subspaces per admissible dimension in the audit.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long)]
    tree_out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct LambdaArgs {
    /// Point set as a JSON array of coordinate arrays.
    #[arg(long)]
    points: PathBuf,
    /// Absolute bracket width.
    #[arg(long, value_parser = positive, conflicts_with = "rel_tol")]
    tol: Option<f64>,
    /// Bracket width relative to the upper bound.
    #[arg(long, value_parser = positive)]
    rel_tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_CELL_BUDGET)]
    budget: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ProjectArgs {
    /// Ball system whose leaf centers are projected.
    #[arg(long = "in", conflicts_with = "points", required_unless_present = "points")]
    input: Option<PathBuf>,
    /// Point set to project instead.
    #[arg(long)]
    points: Option<PathBuf>,
    #[command(flatten)]
    subspace: SubspaceArgs,
    /// Random subspace of this dimension (with --seed).
    #[arg(long, conflicts_with_all = ["subspace", "direction", "span"])]
    random_dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SurjectionArgs {
    /// Target net in L (ambient coordinates).
    #[arg(long)]
    net: PathBuf,
    #[command(flatten)]
    subspace: SubspaceArgs,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DensifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_parser = positive)]
    eps: f64,
    #[command(flatten)]
    subspace: SubspaceArgs,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ReglueArgs {
    /// Embedding as a coded-embedding JSON, or a ball system coded by its tree.
    #[arg(long = "in")]
    input: PathBuf,
    /// Target ball system.
    #[arg(long)]
    target: PathBuf,
    #[arg(long, value_parser = positive)]
    eps: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DistanceArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Certified,
    Sampled,
}

impl From<Mode> for VerifyMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Certified => VerifyMode::Certified,
            Mode::Sampled => VerifyMode::Sampled,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum CertKind {
    Auto,
    Zk,
    Robustness,
    Bundle,
}

#[derive(Args)]
struct AuditArgs {
    /// Certificate JSON.
    #[arg(long)]
    cert: PathBuf,
    /// Ball system to verify against.
    #[arg(long = "in")]
    input: PathBuf,
    /// Input system of a bundle (for the total-distance check).
    #[arg(long, required_if_eq("kind", "bundle"))]
    x0: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = CertKind::Auto)]
    kind: CertKind,
    #[arg(long, value_enum, default_value_t = Mode::Certified)]
    mode: Mode,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-sample component diameters (Z_k, sampled mode) as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// plumbing

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::DimensionMismatch { .. } | Error::SubspaceDimensionMismatch(..) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Internal(other.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    write_text(path, &to_json(value))
}

fn print_json<T: Serialize>(value: &T) {
    print!("{}", to_json(value));
}

fn parse_vectors(s: &str) -> Result<Vec<Vec<f64>>, Failure> {
    s.split(';').map(|v| vector(v).map_err(Failure::Usage)).collect()
}

impl SubspaceArgs {
    fn resolve(&self) -> Result<Option<Subspace>, Failure> {
        if let Some(p) = &self.subspace {
            return read_json(p).map(Some);
        }
        if let Some(Vector(d)) = &self.direction {
            return Ok(Some(Subspace::line(d)?));
        }
        if let Some(s) = &self.span {
            let vs = parse_vectors(s)?;
            let n = vs.first().map_or(0, Vec::len);
            return Ok(Some(Subspace::span(n, &vs)?));
        }
        Ok(None)
    }

    fn required(&self) -> Result<Subspace, Failure> {
        self.resolve()?
            .ok_or_else(|| Failure::Usage("a subspace is required (--subspace, --direction or --span)".into()))
    }
}

impl Output {
    fn plane(&self, dim: usize) -> Result<Option<Subspace>, Failure> {
        match &self.svg_plane {
            Some(s) => {
                let vs = parse_vectors(s)?;
                let p = Subspace::span(dim, &vs)?;
                if p.dim() != 2 {
                    return Err(Failure::Usage("--svg-plane must span a plane".into()));
                }
                Ok(Some(p))
            }
            None if dim >= 3 && self.svg.is_some() => {
                Err(Failure::Usage("--svg for N >= 3 needs --svg-plane".into()))
            }
            None => Ok(None),
        }
    }

    /// Writes the artifact and the optional figure of `tree`.
    fn emit<T: Serialize>(&self, artifact: &T, tree: Option<&BallTree>) -> Result<(), Failure> {
        if let Some(p) = &self.out {
            write_json(p, artifact)?;
        }
        if let (Some(p), Some(t)) = (&self.svg, tree) {
            let plane = self.plane(t.dim())?;
            write_text(p, &svg::render_tree(t, plane.as_ref()))?;
        }
        Ok(())
    }

    /// Validates figure options before any work is done.
    fn check(&self, dim: usize) -> Result<(), Failure> {
        self.plane(dim).map(|_| ())
    }
}

fn check_depth(depth: usize) -> Result<(), Failure> {
    if depth > 24 {
        return Err(Failure::Usage(format!("depth {depth} is too large (max 24)")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// commands

fn gen(a: &GenArgs) -> Outcome {
    let n = a.dim as usize;
    check_depth(a.depth)?;
    a.output.check(n)?;
    let center = match &a.center {
        Some(Vector(c)) if c.len() != n => return Err(Failure::Usage(format!("--center needs {n} coordinates"))),
        Some(Vector(c)) => Point::new(c.clone())?,
        None => Point::origin(n),
    };
    let ball = Ball::new(center, a.radius)?;
    let tree = match &a.along {
        Some(Vector(d)) => standard_cantor_along(&ball, a.depth, d)?,
        None => standard_cantor_in_ball(&ball, a.depth, a.seed),
    };
    a.output.emit(&tree, Some(&tree))?;
    if a.output.out.is_none() {
        print_json(&tree);
    }
    Ok(true)
}

fn typical(a: &TypicalArgs) -> Outcome {
    check_depth(a.depth)?;
    check_depth(a.piece_depth)?;
    let x0: BallTree = match &a.input {
        Some(p) => read_json(p)?,
        None => {
            let n = a.dim.expect("required by clap") as usize;
            standard_cantor_in_ball(&Ball::new(Point::origin(n), a.radius)?, a.depth, a.seed)
        }
    };
    a.output.check(x0.dim())?;
    let (k, bundle) = typical_cantor(&x0, a.eps, a.kmax, a.piece_depth, a.seed)?;
    let report = verify_bundle(&bundle, &x0, &k, a.samples, a.seed)?;
    a.output.emit(&bundle, Some(&k))?;
    if let Some(p) = &a.tree_out {
        write_json(p, &k)?;
    }
    print_json(&json!({
        "pass": report.pass,
        "dim": bundle.dim,
        "eps": bundle.eps,
        "k_max": bundle.k_max,
        "seed": bundle.seed,
        "leaves": k.leaves().len(),
        "final_hausdorff_ub": bundle.final_hausdorff_ub,
        "total_hausdorff_ub": bundle.total_hausdorff_ub,
        "ledger": bundle.ledger,
        "notes": bundle.notes,
        "checks": report.checks,
    }));
    Ok(report.pass)
}

fn zk(a: &ZkArgs) -> Outcome {
    check_depth(a.depth)?;
    let x: BallTree = read_json(&a.input)?;
    a.output.check(x.dim())?;
    let out = into_zk(&x, a.eps, a.k, a.depth, a.seed)?;
    let opts = VerifyOptions {
        samples_per_dim: a.samples,
        seed: a.seed,
        ..Default::default()
    };
    let report = verify_zk(&out.certificate, &out.tree, a.mode.into(), &opts)?;
    a.output.emit(&out.certificate, Some(&out.tree))?;
    if let Some(p) = &a.tree_out {
        write_json(p, &out.tree)?;
    }
    print_json(&json!({
        "pass": report.pass,
        "k": a.k,
        "delta": out.certificate.delta,
        "delta_bounds": out.delta_bounds,
        "robustness_radius": out.certificate.robustness_radius,
        "hausdorff_ub": out.hausdorff_ub,
        "within_eps": out.hausdorff_ub < a.eps,
        "report": report,
    }));
    Ok(report.pass && out.hausdorff_ub < a.eps)
}

fn robustness_summary(cert: &RobustnessCertificate, eps: f64, report: &Value, pass: bool) -> Value {
    json!({
        "pass": pass,
        "kind": cert.kind,
        "k": cert.k,
        "delta": cert.delta,
        "r": cert.r,
        "rho": cert.rho,
        "points": cert.generating_set.len(),
        "stability_radius": cert.stability_radius,
        "hausdorff_ub": cert.hausdorff_ub,
        "within_eps": cert.hausdorff_ub < eps,
        "audit": report,
    })
}

fn avoid_point(a: &AvoidPointArgs) -> Outcome {
    check_depth(a.depth)?;
    let x: BallTree = read_json(&a.input)?;
    a.output.check(x.dim())?;
    let cert = avoid_one_point_projections(&x, a.eps, a.depth, a.seed)?;
    let report = verify_robustness(&cert, &cert.tree, 0, a.seed)?;
    let pass = report.pass && cert.hausdorff_ub < a.eps;
    a.output.emit(&cert, Some(&cert.tree))?;
    if let Some(p) = &a.tree_out {
        write_json(p, &cert.tree)?;
    }
    print_json(&robustness_summary(&cert, a.eps, &json!(report), pass));
    Ok(pass)
}

fn avoid_isolated(a: &AvoidIsolatedArgs) -> Outcome {
    check_depth(a.depth)?;
    let x: BallTree = read_json(&a.input)?;
    a.output.check(x.dim())?;
    let cert = avoid_isolated_projections(&x, a.eps, a.k, a.depth, a.seed)?;
    let report = verify_robustness(&cert, &cert.tree, a.samples, a.seed)?;
    let pass = report.pass && cert.hausdorff_ub < a.eps;
    a.output.emit(&cert, Some(&cert.tree))?;
    if let Some(p) = &a.tree_out {
        write_json(p, &cert.tree)?;
    }
    print_json(&robustness_summary(&cert, a.eps, &json!(report), pass));
    Ok(pass)
}

fn lambda(a: &LambdaArgs) -> Outcome {
    let pts: PointSet = read_json(&a.points)?;
    let stop = match (a.tol, a.rel_tol) {
        (_, Some(r)) if r >= 1.0 => return Err(Failure::Usage("--rel-tol must be below 1".into())),
        (_, Some(r)) => Stop::Relative(r),
        (Some(t), None) => Stop::Absolute(t),
        (None, None) => Stop::Absolute(1e-3),
    };
    match lambda_certified_with(&pts, stop, a.budget) {
        Ok(b) => {
            if let Some(p) = &a.output.out {
                write_json(p, &b)?;
            }
            print_json(&b);
            Ok(b.lb > 0.0)
        }
        Err(e @ Error::NotInGeneralPosition { .. }) => {
            print_json(&json!({ "pass": false, "lb": 0.0, "reason": e.to_string() }));
            Ok(false)
        }
        Err(e) => Err(e.into()),
    }
}

fn project(a: &ProjectArgs) -> Outcome {
    let points: Vec<Point> = match (&a.input, &a.points) {
        (Some(p), _) => read_json::<BallTree>(p)?.leaf_centers(),
        (None, Some(p)) => read_json::<PointSet>(p)?.into_points(),
        (None, None) => unreachable!("required by clap"),
    };
    let n = points[0].dim();
    let l = match (a.subspace.resolve()?, a.random_dim) {
        (Some(l), _) => l,
        (None, Some(ell)) if ell <= n => random_subspace(ell, n, a.seed)?,
        (None, Some(ell)) => return Err(Failure::Usage(format!("--random-dim {ell} exceeds N = {n}"))),
        (None, None) => {
            return Err(Failure::Usage(
                "a subspace is required (--subspace, --direction, --span or --random-dim)".into(),
            ))
        }
    };
    if l.ambient() != n {
        return Err(Failure::Usage(format!("subspace lives in R^{}, points in R^{n}", l.ambient())));
    }
    let coords: Vec<Vec<f64>> = points.iter().map(|p| l.coords(&p.0)).collect();
    let result = json!({ "subspace": l, "coords": coords });
    if let Some(p) = &a.output.out {
        write_json(p, &result)?;
    } else {
        print_json(&result);
    }
    if let Some(p) = &a.output.svg {
        if l.dim() == 0 || l.dim() > 2 {
            return Err(Failure::Usage("--svg of a projection needs dim L in {1, 2}".into()));
        }
        write_text(p, &svg::render_points(&coords))?;
    }
    Ok(true)
}

fn surjection(a: &SurjectionArgs) -> Outcome {
    check_depth(a.depth)?;
    let net: PointSet = read_json(&a.net)?;
    let l = a.subspace.required()?;
    a.output.check(l.ambient())?;
    let tree = graph_surjection_cantor(&net, &l, a.depth)?;
    let defect = projection_defect(&tree, &net, &l)?;
    let pass = defect <= tree.leaf_radius();
    a.output.emit(&tree, Some(&tree))?;
    print_json(&json!({
        "pass": pass,
        "net_points": net.len(),
        "leaves": tree.leaves().len(),
        "leaf_radius": tree.leaf_radius(),
        "projection_defect": defect,
    }));
    Ok(pass)
}

fn densify(a: &DensifyArgs) -> Outcome {
    check_depth(a.depth)?;
    let x: BallTree = read_json(&a.input)?;
    let l = a.subspace.required()?;
    a.output.check(x.dim())?;
    let k = densify_for_l(&x, a.eps, &l, a.depth, a.seed)?;
    let d = hausdorff_between(&x, &k)?;
    a.output.emit(&k, Some(&k))?;
    print_json(&json!({
        "pass": d.ub < a.eps,
        "pieces": k.roots().count(),
        "leaves": k.leaves().len(),
        "hausdorff": d,
    }));
    Ok(d.ub < a.eps)
}

fn reglue(a: &ReglueArgs) -> Outcome {
    let f: CodedEmbedding = match read_json::<CodedEmbedding>(&a.input) {
        Ok(f) => f,
        Err(_) => CodedEmbedding::from_tree(read_json::<BallTree>(&a.input)?)?,
    };
    let target: BallTree = read_json(&a.target)?;
    let out = reglue_embedding(&f, &target, a.eps)?;
    // Every target leaf carries exactly one code word.
    let same_image = out.embedding.image() == &target && out.embedding.code().len() == target.leaves().len();
    let pass = same_image && out.rho < a.eps;
    if let Some(p) = &a.output.out {
        write_json(p, &out.embedding)?;
    }
    print_json(&json!({
        "pass": pass,
        "image_equals_target": same_image,
        "rho": out.rho,
        "delta": out.delta,
        "hausdorff_ub": out.hausdorff_ub,
        "cluster_level": out.cluster_level,
        "cluster_sizes": out.cluster_sizes,
    }));
    Ok(pass)
}

fn distance(a: &DistanceArgs) -> Outcome {
    let x: BallTree = read_json(&a.a)?;
    let y: BallTree = read_json(&a.b)?;
    print_json(&hausdorff_between(&x, &y)?);
    Ok(true)
}

fn audit(a: &AuditArgs) -> Outcome {
    let k: BallTree = read_json(&a.input)?;
    let raw: Value = read_json(&a.cert)?;
    let kind = match a.kind {
        CertKind::Auto if raw.get("stages").is_some() => CertKind::Bundle,
        CertKind::Auto if raw.get("kind").is_some() => CertKind::Robustness,
        CertKind::Auto => CertKind::Zk,
        other => other,
    };
    let parse = |what: &str, e: serde_json::Error| Failure::Usage(format!("{} is not a {what}: {e}", a.cert.display()));
    match kind {
        CertKind::Zk => {
            let cert: ZkCertificate = serde_json::from_value(raw).map_err(|e| parse("Z_k certificate", e))?;
            let opts = VerifyOptions {
                samples_per_dim: a.samples,
                seed: a.seed,
                record_samples: a.csv.is_some(),
                ..Default::default()
            };
            let report = verify_zk(&cert, &k, a.mode.into(), &opts)?;
            if let Some(p) = &a.csv {
                write_text(p, &report.to_csv())?;
            }
            print_json(&report);
            Ok(report.pass)
        }
        CertKind::Robustness => {
            let cert: RobustnessCertificate =
                serde_json::from_value(raw).map_err(|e| parse("robustness certificate", e))?;
            let report = verify_robustness(&cert, &k, a.samples, a.seed)?;
            print_json(&report);
            Ok(report.pass)
        }
        CertKind::Bundle => {
            let bundle: CertificateBundle = serde_json::from_value(raw).map_err(|e| parse("certificate bundle", e))?;
            let x0_path = a
                .x0
                .as_ref()
                .ok_or_else(|| Failure::Usage("auditing a bundle needs --x0".into()))?;
            let x0: BallTree = read_json(x0_path)?;
            let report = verify_bundle(&bundle, &x0, &k, a.samples, a.seed)?;
            print_json(&report);
            Ok(report.pass)
        }
        CertKind::Auto => unreachable!(),
    }
}

fn run(cmd: &Command) -> Outcome {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Typical(a) => typical(a),
        Command::Zk(a) => zk(a),
        Command::AvoidPoint(a) => avoid_point(a),
        Command::AvoidIsolated(a) => avoid_isolated(a),
        Command::Lambda(a) => lambda(a),
        Command::Project(a) => project(a),
        Command::Surjection(a) => surjection(a),
        Command::Densify(a) => densify(a),
        Command::Reglue(a) => reglue(a),
        Command::Distance(a) => distance(a),
        Command::Audit(a) => audit(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("FAIL");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
