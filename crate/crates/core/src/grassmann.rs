//! Linear subspaces of R^N, orthogonal projections, the Grassmann metric and
//! covering nets of G(l, R^N).
//!
//! The metric between two l-dimensional subspaces is the Hausdorff distance of
//! their unit spheres. For equal dimensions it equals `2 sin(theta_max / 2)`,
//! where `theta_max` is the largest principal angle; that closed form is what
//! [`gr_distance`] evaluates.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{dot, norm, Point};
use crate::rng;

/// Orthonormality tolerance for frames.
pub const FRAME_TOL: f64 = 1e-10;
/// Distances below this are reported as zero by [`gr_distance`].
pub const EQUALITY_TOL: f64 = 1e-9;

/// An l-dimensional linear subspace of R^N given by an orthonormal frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SubspaceRepr", into = "SubspaceRepr")]
pub struct Subspace {
    ambient: usize,
    frame: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct SubspaceRepr {
    ambient: usize,
    frame: Vec<Vec<f64>>,
}

impl TryFrom<SubspaceRepr> for Subspace {
    type Error = Error;
    fn try_from(r: SubspaceRepr) -> Result<Self> {
        Subspace::from_orthonormal(r.ambient, r.frame)
    }
}

impl From<Subspace> for SubspaceRepr {
    fn from(s: Subspace) -> Self {
        SubspaceRepr {
            ambient: s.ambient,
            frame: s.frame,
        }
    }
}

fn orthonormality_residual(frame: &[Vec<f64>]) -> f64 {
    let mut r = 0.0f64;
    for (i, a) in frame.iter().enumerate() {
        for (j, b) in frame.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            r = r.max((dot(a, b) - target).abs());
        }
    }
    r
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Vectors that are
/// (numerically) dependent on earlier ones are dropped.
fn gram_schmidt(vectors: &[Vec<f64>], basis: &mut Vec<Vec<f64>>) {
    for v in vectors {
        let scale = norm(v);
        if scale == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in basis.iter() {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let n = norm(&w);
        if n > 1e-10 * scale {
            basis.push(w.into_iter().map(|x| x / n).collect());
        }
    }
}

impl Subspace {
    /// Wraps an orthonormal frame (rows), checking orthonormality to [`FRAME_TOL`].
    pub fn from_orthonormal(ambient: usize, frame: Vec<Vec<f64>>) -> Result<Self> {
        if ambient == 0 {
            return Err(Error::InvalidArgument("ambient dimension must be >= 1".into()));
        }
        if frame.len() > ambient {
            return Err(Error::InvalidArgument(format!(
                "{} frame vectors in R^{ambient}",
                frame.len()
            )));
        }
        for row in &frame {
            if row.len() != ambient {
                return Err(Error::DimensionMismatch {
                    expected: ambient,
                    found: row.len(),
                });
            }
        }
        let residual = orthonormality_residual(&frame);
        if residual > FRAME_TOL {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(Subspace { ambient, frame })
    }

    /// The span of the given vectors (any spanning set; dependent vectors are dropped).
    pub fn span(ambient: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        for v in vectors {
            if v.len() != ambient {
                return Err(Error::DimensionMismatch {
                    expected: ambient,
                    found: v.len(),
                });
            }
        }
        let mut basis = Vec::new();
        gram_schmidt(vectors, &mut basis);
        Subspace::from_orthonormal(ambient, basis)
    }

    pub fn line(direction: &[f64]) -> Result<Self> {
        let s = Subspace::span(direction.len(), &[direction.to_vec()])?;
        if s.dim() != 1 {
            return Err(Error::InvalidArgument("zero direction vector".into()));
        }
        Ok(s)
    }

    pub fn full(ambient: usize) -> Self {
        let frame = (0..ambient)
            .map(|i| (0..ambient).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Subspace { ambient, frame }
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            frame: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn frame(&self) -> &[Vec<f64>] {
        &self.frame
    }

    pub fn frame_residual(&self) -> f64 {
        orthonormality_residual(&self.frame)
    }

    /// Orthogonal complement in R^N.
    pub fn complement(&self) -> Subspace {
        let mut basis = self.frame.clone();
        let ident: Vec<Vec<f64>> = Subspace::full(self.ambient).frame;
        gram_schmidt(&ident, &mut basis);
        Subspace {
            ambient: self.ambient,
            frame: basis.split_off(self.frame.len()),
        }
    }

    /// Coordinates of `p_L x` in the frame basis (a vector of R^l).
    pub fn coords(&self, x: &[f64]) -> Vec<f64> {
        self.frame.iter().map(|f| dot(f, x)).collect()
    }

    /// `p_L x` as a point of R^N.
    pub fn project(&self, x: &Point) -> Result<Point> {
        if x.dim() != self.ambient {
            return Err(Error::DimensionMismatch {
                expected: self.ambient,
                found: x.dim(),
            });
        }
        Ok(Point(self.project_slice(x.coords())))
    }

    pub(crate) fn project_slice(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient];
        for f in &self.frame {
            let c = dot(f, x);
            for (o, fi) in out.iter_mut().zip(f) {
                *o += c * fi;
            }
        }
        out
    }

    /// Maps frame coordinates back to R^N.
    pub fn embed(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient];
        for (c, f) in coords.iter().zip(&self.frame) {
            for (o, fi) in out.iter_mut().zip(f) {
                *o += c * fi;
            }
        }
        out
    }

    /// Distance from `x` to the subspace.
    pub fn distance_to(&self, x: &[f64]) -> f64 {
        let p = self.project_slice(x);
        p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim(), self.ambient, |i, j| self.frame[i][j])
    }
}

/// Cosine and sine of the largest principal angle between equal-dimensional subspaces.
fn largest_principal_angle(l1: &Subspace, l2: &Subspace) -> (f64, f64) {
    let f1 = l1.matrix();
    let f2 = l2.matrix();
    let m = &f1 * f2.transpose();
    let cos = m.singular_values().min().clamp(0.0, 1.0);
    // Rows of F2 with their L1 component removed; singular values are the sines.
    let residual = &f2 - m.transpose() * &f1;
    let sin = residual.singular_values().max().clamp(0.0, 1.0);
    (cos, sin)
}

/// Largest principal angle (radians, in `[0, pi/2]`).
pub fn max_principal_angle(l1: &Subspace, l2: &Subspace) -> Result<f64> {
    check_pair(l1, l2)?;
    if l1.dim() == 0 || l1.dim() == l1.ambient {
        return Ok(0.0);
    }
    let (c, s) = largest_principal_angle(l1, l2);
    Ok(s.atan2(c))
}

fn check_pair(l1: &Subspace, l2: &Subspace) -> Result<()> {
    if l1.ambient != l2.ambient {
        return Err(Error::DimensionMismatch {
            expected: l1.ambient,
            found: l2.ambient,
        });
    }
    if l1.dim() != l2.dim() {
        return Err(Error::SubspaceDimensionMismatch(l1.dim(), l2.dim()));
    }
    Ok(())
}

/// Grassmann distance `2 sin(theta_max / 2)`; zero below [`EQUALITY_TOL`].
pub fn gr_distance(l1: &Subspace, l2: &Subspace) -> Result<f64> {
    let theta = max_principal_angle(l1, l2)?;
    let d = 2.0 * (0.5 * theta).sin();
    Ok(if d < EQUALITY_TOL { 0.0 } else { d })
}

/// Operator norm of `P1 - P2`, i.e. `sin(theta_max)`.
pub fn projector_distance(l1: &Subspace, l2: &Subspace) -> Result<f64> {
    check_pair(l1, l2)?;
    if l1.dim() == 0 || l1.dim() == l1.ambient {
        return Ok(0.0);
    }
    Ok(largest_principal_angle(l1, l2).1)
}

/// Random l-dimensional subspace, rotation invariant in distribution.
pub fn random_subspace(ell: usize, ambient: usize, seed: u64) -> Result<Subspace> {
    if ell > ambient || ambient == 0 {
        return Err(Error::InvalidArgument(format!(
            "cannot draw a {ell}-dimensional subspace of R^{ambient}"
        )));
    }
    let mut rng = rng::seeded(seed, rng::stream::SUBSPACE);
    Ok(random_subspace_with(&mut rng, ell, ambient))
}

pub(crate) fn random_subspace_with<R: Rng + ?Sized>(
    rng: &mut R,
    ell: usize,
    ambient: usize,
) -> Subspace {
    loop {
        let vectors: Vec<Vec<f64>> = (0..ell).map(|_| rng::normal_vec(rng, ambient)).collect();
        let mut basis = Vec::with_capacity(ell);
        gram_schmidt(&vectors, &mut basis);
        if basis.len() == ell {
            return Subspace {
                ambient,
                frame: basis,
            };
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetMode {
    Certified,
    Sampled,
}

/// A finite subset of G(l, R^N) with its covering radius.
///
/// In certified mode the radius is proved; in sampled mode it is an empirical
/// dispersion estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrassmannNet {
    pub ell: usize,
    pub ambient: usize,
    pub covering_radius: f64,
    pub mode: NetMode,
    pub subspaces: Vec<Subspace>,
}

/// A ball of G(l, R^N) in the Grassmann metric.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrassmannCell {
    pub center: Subspace,
    pub radius: f64,
}

/// Certified covering net of G(l, R^N) for N <= 3.
pub fn gr_net(ell: usize, ambient: usize, covering_radius: f64) -> Result<GrassmannNet> {
    if !(covering_radius > 0.0) {
        return Err(Error::InvalidArgument(
            "covering radius must be positive".into(),
        ));
    }
    if ell > ambient || ambient == 0 {
        return Err(Error::InvalidArgument(format!(
            "no {ell}-dimensional subspaces of R^{ambient}"
        )));
    }
    let single = |s: Subspace| GrassmannNet {
        ell,
        ambient,
        covering_radius: 0.0,
        mode: NetMode::Certified,
        subspaces: vec![s],
    };
    if ell == 0 {
        return Ok(single(Subspace::zero(ambient)));
    }
    if ell == ambient {
        return Ok(single(Subspace::full(ambient)));
    }
    match (ambient, ell) {
        (2, 1) => {
            let m = angle_count_for_radius(covering_radius);
            let subspaces = (0..m)
                .map(|i| {
                    let t = std::f64::consts::PI * i as f64 / m as f64;
                    Subspace::line(&[t.cos(), t.sin()]).expect("unit vector")
                })
                .collect();
            Ok(GrassmannNet {
                ell,
                ambient,
                covering_radius: 2.0 * (std::f64::consts::PI / (4.0 * m as f64)).sin(),
                mode: NetMode::Certified,
                subspaces,
            })
        }
        (3, 1) | (3, 2) => {
            // Every cell of an m x m subdivision of a cube face has chord radius
            // at most its half-diagonal sqrt(2)/m (see `LineCell::chord_radius`).
            let m = ((2f64.sqrt() / covering_radius).ceil() as usize).max(1);
            let mut subspaces = Vec::with_capacity(3 * m * m);
            let mut radius = 0.0f64;
            for axis in 0..3 {
                for i in 0..m {
                    for j in 0..m {
                        let h = 1.0 / m as f64;
                        let cell = LineCell::Face {
                            axis,
                            u: (-1.0 + 2.0 * i as f64 * h, -1.0 + 2.0 * (i + 1) as f64 * h),
                            v: (-1.0 + 2.0 * j as f64 * h, -1.0 + 2.0 * (j + 1) as f64 * h),
                            depth: 0,
                        };
                        radius = radius.max(cell.chord_radius());
                        let line = Subspace::line(&cell.center_direction()).expect("nonzero");
                        subspaces.push(if ell == 1 { line } else { line.complement() });
                    }
                }
            }
            Ok(GrassmannNet {
                ell,
                ambient,
                covering_radius: radius,
                mode: NetMode::Certified,
                subspaces,
            })
        }
        _ => Err(Error::CertifiedNetUnavailable(ambient)),
    }
}

/// Number of equally spaced line angles needed for a given covering radius in R^2.
fn angle_count_for_radius(radius: f64) -> usize {
    if radius >= 2f64.sqrt() {
        return 1;
    }
    let m = std::f64::consts::PI / (4.0 * (0.5 * radius).asin());
    (m.ceil() as usize).max(1)
}

/// Seeded Monte-Carlo net; the reported radius is the largest distance from
/// `probes` further random subspaces to the net (uncertified).
pub fn gr_net_sampled(
    ell: usize,
    ambient: usize,
    count: usize,
    probes: usize,
    seed: u64,
) -> Result<GrassmannNet> {
    if ell > ambient || ambient == 0 || count == 0 {
        return Err(Error::InvalidArgument("empty sampled net".into()));
    }
    let mut rng = rng::seeded(seed, rng::stream::NET);
    let subspaces: Vec<Subspace> = (0..count)
        .map(|_| random_subspace_with(&mut rng, ell, ambient))
        .collect();
    let mut dispersion = 0.0f64;
    for _ in 0..probes {
        let p = random_subspace_with(&mut rng, ell, ambient);
        let d = subspaces
            .iter()
            .map(|s| gr_distance(s, &p).expect("same shape"))
            .fold(f64::INFINITY, f64::min);
        dispersion = dispersion.max(d);
    }
    Ok(GrassmannNet {
        ell,
        ambient,
        covering_radius: dispersion,
        mode: NetMode::Sampled,
        subspaces,
    })
}

/// A cell of the chart of projective lines used by branch-and-bound.
///
/// Lines of R^2 are parameterized by angle in `[0, pi)`; lines of R^3 by the
/// three cube faces `x_axis = 1` (every line has a representative whose
/// largest-magnitude coordinate is positive).
#[derive(Debug, Clone, PartialEq)]
pub enum LineCell {
    Angle {
        lo: f64,
        hi: f64,
        depth: u32,
    },
    Face {
        axis: usize,
        u: (f64, f64),
        v: (f64, f64),
        depth: u32,
    },
}

impl LineCell {
    /// Root cells covering all lines of R^N (N = 2 or 3).
    pub fn roots(ambient: usize) -> Result<Vec<LineCell>> {
        match ambient {
            2 => Ok(vec![LineCell::Angle {
                lo: 0.0,
                hi: std::f64::consts::PI,
                depth: 0,
            }]),
            3 => Ok((0..3)
                .map(|axis| LineCell::Face {
                    axis,
                    u: (-1.0, 1.0),
                    v: (-1.0, 1.0),
                    depth: 0,
                })
                .collect()),
            n => Err(Error::CertifiedNetUnavailable(n)),
        }
    }

    pub fn depth(&self) -> u32 {
        match self {
            LineCell::Angle { depth, .. } | LineCell::Face { depth, .. } => *depth,
        }
    }

    /// Unnormalized face vector `e_axis + u e_(axis+1) + v e_(axis+2)`.
    pub fn face_vector(axis: usize, u: f64, v: f64) -> [f64; 3] {
        let mut w = [0.0; 3];
        w[axis] = 1.0;
        w[(axis + 1) % 3] = u;
        w[(axis + 2) % 3] = v;
        w
    }

    /// Unit representative of the central line.
    pub fn center_direction(&self) -> Vec<f64> {
        match self {
            LineCell::Angle { lo, hi, .. } => {
                let t = 0.5 * (lo + hi);
                vec![t.cos(), t.sin()]
            }
            LineCell::Face { axis, u, v, .. } => {
                let w = Self::face_vector(*axis, 0.5 * (u.0 + u.1), 0.5 * (v.0 + v.1));
                let n = norm(&w);
                w.iter().map(|x| x / n).collect()
            }
        }
    }

    /// Upper bound on `|d - c|` over unit representatives `d` of lines in the
    /// cell, `c` the central representative. This also bounds the Grassmann
    /// radius of the cell.
    ///
    /// For faces: with `w`, `w_c` face vectors (`|w| >= 1`), the unit vectors
    /// satisfy `|w/|w| - w_c/|w_c|| <= 2|w - w_c| / (|w| + |w_c|)` in any inner
    /// product space, and `|w - w_c|` is at most the half-diagonal.
    pub fn chord_radius(&self) -> f64 {
        match self {
            LineCell::Angle { lo, hi, .. } => 2.0 * (0.25 * (hi - lo)).sin(),
            LineCell::Face { axis, u, v, .. } => {
                let hu = 0.5 * (u.1 - u.0);
                let hv = 0.5 * (v.1 - v.0);
                let half_diag = (hu * hu + hv * hv).sqrt();
                let wc = Self::face_vector(*axis, 0.5 * (u.0 + u.1), 0.5 * (v.0 + v.1));
                (2.0 * half_diag / (1.0 + norm(&wc))).min(2.0)
            }
        }
    }

    pub fn split(&self) -> Vec<LineCell> {
        match self {
            LineCell::Angle { lo, hi, depth } => {
                let mid = 0.5 * (lo + hi);
                vec![
                    LineCell::Angle {
                        lo: *lo,
                        hi: mid,
                        depth: depth + 1,
                    },
                    LineCell::Angle {
                        lo: mid,
                        hi: *hi,
                        depth: depth + 1,
                    },
                ]
            }
            LineCell::Face { axis, u, v, depth } => {
                let um = 0.5 * (u.0 + u.1);
                let vm = 0.5 * (v.0 + v.1);
                let mut out = Vec::with_capacity(4);
                for uu in [(u.0, um), (um, u.1)] {
                    for vv in [(v.0, vm), (vm, v.1)] {
                        out.push(LineCell::Face {
                            axis: *axis,
                            u: uu,
                            v: vv,
                            depth: depth + 1,
                        });
                    }
                }
                out
            }
        }
    }

    pub fn to_grassmann_cell(&self) -> GrassmannCell {
        GrassmannCell {
            center: Subspace::line(&self.center_direction()).expect("unit vector"),
            radius: self.chord_radius(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn line_at(theta: f64) -> Subspace {
        Subspace::line(&[theta.cos(), theta.sin()]).unwrap()
    }

    #[test]
    fn project_examples() {
        let x_axis = Subspace::line(&[1.0, 0.0]).unwrap();
        let p = x_axis.project(&Point(vec![3.0, 4.0])).unwrap();
        assert_eq!(p, Point(vec![3.0, 0.0]));

        let x = Point(vec![1.5, -2.0, 0.25]);
        assert_eq!(Subspace::full(3).project(&x).unwrap(), x);
        assert_eq!(Subspace::zero(3).project(&x).unwrap(), Point::origin(3));

        let diag = Subspace::line(&[1.0, 1.0]).unwrap();
        let p = diag.project(&Point(vec![1.0, 0.0])).unwrap();
        assert!((p.0[0] - 0.5).abs() < 1e-15 && (p.0[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn project_idempotent() {
        let l = random_subspace(2, 4, 9).unwrap();
        let x = Point(vec![0.3, -1.0, 2.0, 0.7]);
        let p = l.project(&x).unwrap();
        let pp = l.project(&p).unwrap();
        assert!(p.dist(&pp) < 1e-14);
    }

    #[test]
    fn gr_distance_examples() {
        assert_eq!(gr_distance(&line_at(0.3), &line_at(0.3)).unwrap(), 0.0);
        let d = gr_distance(&line_at(0.0), &line_at(PI / 2.0)).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
        for theta in [PI / 6.0, PI / 3.0] {
            let d = gr_distance(&line_at(0.1), &line_at(0.1 + theta)).unwrap();
            assert!((d - 2.0 * (theta / 2.0).sin()).abs() < 1e-12);
        }
        // Lines are unoriented: an obtuse angle between representatives counts as its supplement.
        let d = gr_distance(&line_at(0.0), &line_at(5.0 * PI / 6.0)).unwrap();
        assert!((d - 2.0 * (PI / 12.0).sin()).abs() < 1e-12);
    }

    #[test]
    fn gr_distance_dimension_mismatch() {
        let a = Subspace::line(&[1.0, 0.0, 0.0]).unwrap();
        let b = Subspace::span(3, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(
            gr_distance(&a, &b),
            Err(Error::SubspaceDimensionMismatch(1, 2))
        );
    }

    #[test]
    fn complement_is_orthogonal() {
        let l = random_subspace(2, 5, 4).unwrap();
        let c = l.complement();
        assert_eq!(c.dim(), 3);
        assert!(c.frame_residual() < FRAME_TOL);
        for a in l.frame() {
            for b in c.frame() {
                assert!(dot(a, b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn complement_preserves_distance() {
        let a = random_subspace(1, 3, 1).unwrap();
        let b = random_subspace(1, 3, 2).unwrap();
        let d = gr_distance(&a, &b).unwrap();
        let dc = gr_distance(&a.complement(), &b.complement()).unwrap();
        assert!((d - dc).abs() < 1e-10);
    }

    #[test]
    fn random_subspace_properties() {
        let a = random_subspace(3, 5, 17).unwrap();
        assert!(a.frame_residual() < FRAME_TOL);
        assert_eq!(a, random_subspace(3, 5, 17).unwrap());
        assert_ne!(a, random_subspace(3, 5, 18).unwrap());
        let full = random_subspace(3, 3, 1).unwrap();
        assert_eq!(gr_distance(&full, &Subspace::full(3)).unwrap(), 0.0);
    }

    #[test]
    fn from_orthonormal_rejects_skew_frames() {
        let r = Subspace::from_orthonormal(2, vec![vec![1.0, 0.0], vec![0.6, 0.8]]);
        assert!(matches!(r, Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn net_trivial_cases() {
        let n = gr_net(2, 2, 0.1).unwrap();
        assert_eq!(n.subspaces.len(), 1);
        assert_eq!(n.covering_radius, 0.0);
        assert!(matches!(gr_net(1, 4, 0.5), Err(Error::CertifiedNetUnavailable(4))));
    }

    #[test]
    fn net_g12_radius_formula() {
        for m in [1usize, 2, 7, 50] {
            let r = 2.0 * (PI / (4.0 * m as f64)).sin();
            let net = gr_net(1, 2, r * (1.0 + 1e-12)).unwrap();
            assert_eq!(net.subspaces.len(), m);
            assert!((net.covering_radius - r).abs() < 1e-12);
        }
    }

    #[test]
    fn face_cell_radius_bounds_corners() {
        for cell in LineCell::roots(3).unwrap().iter().flat_map(|c| c.split()) {
            let c = cell.center_direction();
            let (axis, u, v) = match &cell {
                LineCell::Face { axis, u, v, .. } => (*axis, *u, *v),
                _ => unreachable!(),
            };
            for uu in [u.0, u.1] {
                for vv in [v.0, v.1] {
                    let w = LineCell::face_vector(axis, uu, vv);
                    let n = norm(&w);
                    let d: f64 = w
                        .iter()
                        .zip(&c)
                        .map(|(a, b)| (a / n - b) * (a / n - b))
                        .sum::<f64>()
                        .sqrt();
                    assert!(d <= cell.chord_radius() + 1e-15);
                }
            }
        }
    }
}
