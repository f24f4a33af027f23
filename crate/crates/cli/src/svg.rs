//! Minimal hand-rolled SVG output: polylines in a fixed viewport, no
//! dependencies. CSV is the primary artifact; these figures are quick-look
//! renderings.

use sgcx::segment::PathSegment;
use sgcx::Vec2;
use std::fmt::Write;

pub struct Svg {
    body: String,
    min: Vec2,
    max: Vec2,
}

impl Svg {
    pub fn new() -> Self {
        Svg {
            body: String::new(),
            min: Vec2::new(f64::INFINITY, f64::INFINITY),
            max: Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: Vec2) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn polyline(&mut self, pts: &[Vec2], color: &str, width: f64) {
        if pts.len() < 2 {
            return;
        }
        let mut d = String::new();
        for (k, p) in pts.iter().enumerate() {
            self.grow(*p);
            // flip y so the figure reads with the usual orientation
            let _ = write!(
                d,
                "{}{:.5},{:.5} ",
                if k == 0 { "M" } else { "L" },
                p.x,
                -p.y
            );
        }
        let _ = writeln!(
            self.body,
            r#"<path d="{}" fill="none" stroke="{}" stroke-width="{:.5}"/>"#,
            d.trim_end(),
            color,
            width
        );
    }

    pub fn segments(&mut self, segs: &[PathSegment], color: &str, width: f64) {
        for seg in segs {
            let pts = seg.sample_every(seg.length().max(1e-9) / 16.0);
            self.polyline(&pts, color, width);
        }
    }

    pub fn circle(&mut self, center: Vec2, r: f64, color: &str) {
        self.grow(center + Vec2::new(r, r));
        self.grow(center - Vec2::new(r, r));
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.5}" cy="{:.5}" r="{:.5}" fill="{}"/>"#,
            center.x, -center.y, r, color
        );
    }

    pub fn finish(self) -> String {
        let pad = 0.05 * (self.max.x - self.min.x).max(self.max.y - self.min.y).max(0.1);
        let w = self.max.x - self.min.x + 2.0 * pad;
        let h = self.max.y - self.min.y + 2.0 * pad;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.5} {:.5} {:.5} {:.5}\">\n<rect x=\"{:.5}\" y=\"{:.5}\" width=\"{:.5}\" height=\"{:.5}\" fill=\"white\"/>\n{}</svg>\n",
            self.min.x - pad,
            -self.max.y - pad,
            w,
            h,
            self.min.x - pad,
            -self.max.y - pad,
            w,
            h,
            self.body
        )
    }
}

/// A simple xy-curve plot in data coordinates.
pub fn plot_curves(curves: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut svg = Svg::new();
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    for (k, (_, pts)) in curves.iter().enumerate() {
        let v: Vec<Vec2> = pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect();
        svg.polyline(&v, colors[k % colors.len()], 0.01);
    }
    svg.finish()
}
