//! Deterministic SVG phase portraits of polar-chart metrics.

use std::fmt::Write;

use ergoflow::flow::{Direction, Trajectory};
use ergoflow::horizon::{CensusReport, ErgoregionAnnulus, HorizonKind, HorizonRecord};
use ergoflow::Branch;

use crate::config::PortraitConfig;

/// Longest polyline emitted per trajectory.
const MAX_POINTS: usize = 2000;

/// Formats with 9 significant digits, trailing zeros removed.
pub fn num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (8 - exp).max(0) as usize;
    let mut s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn branch_color(b: Branch) -> &'static str {
    match b {
        Branch::Plus => "#b03a2e",
        Branch::Minus => "#1f618d",
    }
}

struct Canvas {
    cx: f64,
    cy: f64,
    scale: f64,
}

impl Canvas {
    fn map(&self, rho: f64, phi: f64) -> (f64, f64) {
        (self.cx + self.scale * rho * phi.cos(), self.cy - self.scale * rho * phi.sin())
    }
}

fn outer_radius(annulus: &ErgoregionAnnulus) -> f64 {
    match annulus {
        ErgoregionAnnulus::Radial { rho_plus, .. } => *rho_plus,
        ErgoregionAnnulus::Curves { outer, .. } => outer.iter().map(|p| p[0]).fold(0.0, f64::max),
    }
}

fn path_of(points: impl Iterator<Item = (f64, f64)>, close: bool) -> String {
    let mut d = String::new();
    for (i, (x, y)) in points.enumerate() {
        let _ = write!(d, "{}{},{} ", if i == 0 { 'M' } else { 'L' }, num(x), num(y));
    }
    if close {
        d.push('Z');
    }
    d.trim_end().to_string()
}

fn horizon_element(c: &Canvas, h: &HorizonRecord) -> String {
    let kind = match h.kind {
        HorizonKind::Black => "black",
        HorizonKind::White => "white",
    };
    let dash = if h.kind == HorizonKind::White { " stroke-dasharray=\"6 4\"" } else { "" };
    let class = format!("horizon {} {kind}", h.branch);
    let stroke = branch_color(h.branch);
    match &h.polyline {
        Some(poly) => format!(
            "<path class=\"{class}\" d=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"2.5\"{dash}/>",
            path_of(poly.iter().map(|p| c.map(p[0], p[1])), true)
        ),
        None => format!(
            "<circle class=\"{class}\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"2.5\"{dash}/>",
            num(c.cx),
            num(c.cy),
            num(c.scale * h.radius)
        ),
    }
}

/// Renders the census overlays and trajectories. Trajectories are drawn in
/// order of increasing `t`, with the arrowhead at the latest sample.
pub fn render(cfg: &PortraitConfig, census: &CensusReport, trajectories: &[Trajectory]) -> String {
    let r_out = outer_radius(&census.annulus).max(f64::MIN_POSITIVE);
    let c = Canvas { cx: cfg.width / 2.0, cy: cfg.height / 2.0, scale: 0.45 * cfg.width.min(cfg.height) / r_out };
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = num(cfg.width),
        h = num(cfg.height)
    );
    s.push_str("<defs>\n");
    for b in Branch::BOTH {
        let _ = writeln!(
            s,
            "<marker id=\"arrow-{b}\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" \
             orient=\"auto-start-reverse\"><path d=\"M0,0 L10,5 L0,10 Z\" fill=\"{}\"/></marker>",
            branch_color(b)
        );
    }
    s.push_str("</defs>\n");
    let _ = writeln!(s, "<rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>", num(cfg.width), num(cfg.height));

    if cfg.ergospheres {
        s.push_str("<g id=\"ergospheres\">\n");
        match &census.annulus {
            ErgoregionAnnulus::Radial { rho_minus, rho_plus } => {
                for (name, r) in [("inner", rho_minus), ("outer", rho_plus)] {
                    let _ = writeln!(
                        s,
                        "<circle class=\"ergosphere {name}\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"#7f8c8d\" stroke-width=\"1.5\"/>",
                        num(c.cx),
                        num(c.cy),
                        num(c.scale * r)
                    );
                }
            }
            ErgoregionAnnulus::Curves { inner, outer, .. } => {
                for (name, curve) in [("inner", inner), ("outer", outer)] {
                    let _ = writeln!(
                        s,
                        "<path class=\"ergosphere {name}\" d=\"{}\" fill=\"none\" stroke=\"#7f8c8d\" stroke-width=\"1.5\"/>",
                        path_of(curve.iter().map(|p| c.map(p[0], p[1])), true)
                    );
                }
            }
        }
        s.push_str("</g>\n");
    }

    if cfg.cycles {
        s.push_str("<g id=\"horizons\">\n");
        for h in census.horizons_plus.iter().chain(&census.horizons_minus) {
            s.push_str(&horizon_element(&c, h));
            s.push('\n');
        }
        s.push_str("</g>\n");
    }

    s.push_str("<g id=\"trajectories\">\n");
    for tr in trajectories {
        let n = tr.samples.len();
        if n < 2 {
            continue;
        }
        let stride = n.div_ceil(MAX_POINTS);
        let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
        if idx.last() != Some(&(n - 1)) {
            idx.push(n - 1);
        }
        if tr.direction == Direction::Backward {
            idx.reverse();
        }
        let d = path_of(idx.iter().map(|&i| c.map(tr.samples[i].point.x1, tr.samples[i].point.x2)), false);
        let _ = writeln!(
            s,
            "<path class=\"trajectory {b} {dir}\" d=\"{d}\" fill=\"none\" stroke=\"{col}\" stroke-width=\"1\" \
             stroke-opacity=\"0.8\" marker-end=\"url(#arrow-{b})\"/>",
            b = tr.branch,
            dir = tr.direction,
            col = branch_color(tr.branch)
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}
