//! Minimal SVG figures of ball systems and projected point sets.
//!
//! Figures are illustrative only; nothing is certified from them.

use std::fmt::Write;

use cantor_proj::ball_system::BallTree;
use cantor_proj::Subspace;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 20.0;

struct Frame {
    min: [f64; 2],
    scale: f64,
}

impl Frame {
    fn fit(points: &[[f64; 2]], pad: f64) -> Frame {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for i in 0..2 {
                lo[i] = lo[i].min(p[i] - pad);
                hi[i] = hi[i].max(p[i] + pad);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
        Frame {
            min: lo,
            scale: (SIZE - 2.0 * MARGIN) / span,
        }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (
            MARGIN + (p[0] - self.min[0]) * self.scale,
            // SVG y grows downwards.
            SIZE - MARGIN - (p[1] - self.min[1]) * self.scale,
        )
    }
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
         <title>{title}</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Planar coordinates of `x`: the identity for `N = 2`, `(x, 0)` for `N = 1`,
/// and coordinates in `plane` otherwise.
fn planar(x: &[f64], plane: Option<&Subspace>) -> [f64; 2] {
    match (x.len(), plane) {
        (1, _) => [x[0], 0.0],
        (_, Some(p)) => {
            let c = p.coords(x);
            [c[0], c.get(1).copied().unwrap_or(0.0)]
        }
        _ => [x[0], x[1]],
    }
}

/// Every ball of `tree` as a circle, deeper levels darker. For `N >= 3` the
/// balls are drawn in `plane` (their projections are discs of the same radius).
pub fn render_tree(tree: &BallTree, plane: Option<&Subspace>) -> String {
    let pts: Vec<[f64; 2]> = tree
        .levels()
        .iter()
        .flatten()
        .map(|b| planar(&b.center.0, plane))
        .collect();
    let pad = tree.levels().first().map_or(0.0, |l| l.iter().map(|b| b.radius).fold(0.0, f64::max));
    let frame = Frame::fit(&pts, pad);
    let mut out = header("ball system");
    let depth = tree.levels().len().max(1) as f64;
    for (j, level) in tree.levels().iter().enumerate() {
        let shade = (200.0 * (1.0 - j as f64 / depth)) as u8;
        for b in level {
            let (cx, cy) = frame.map(planar(&b.center.0, plane));
            let r = (b.radius * frame.scale).max(0.5);
            let _ = writeln!(
                out,
                "<circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"{r:.3}\" fill=\"none\" stroke=\"rgb({shade},{shade},{shade})\" stroke-width=\"0.6\"/>"
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Points given by their coordinates in a subspace of dimension 1 or 2.
pub fn render_points(coords: &[Vec<f64>]) -> String {
    let pts: Vec<[f64; 2]> = coords
        .iter()
        .map(|c| [c[0], c.get(1).copied().unwrap_or(0.0)])
        .collect();
    let frame = Frame::fit(&pts, 0.0);
    let mut out = header("projection");
    for p in &pts {
        let (cx, cy) = frame.map(*p);
        let _ = writeln!(out, "<circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"1.2\" fill=\"black\"/>");
    }
    out.push_str("</svg>\n");
    out
}
