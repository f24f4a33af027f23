//! Planar path segments: straight lines and circular arcs, plus chains with
//! arclength charts and a fillet router that rounds polyline corners.

use crate::error::Error;
use crate::vec2::Vec2;
use crate::Result;

/// One smooth piece of a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathSegment {
    Line {
        start: Vec2,
        end: Vec2,
    },
    /// Circular arc; `sweep` is the signed angle (positive = counterclockwise),
    /// `|sweep|` must lie in (0, 2 pi).
    Arc {
        center: Vec2,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
}

impl PathSegment {
    pub fn line(start: Vec2, end: Vec2) -> Result<Self> {
        if start.dist(end) <= 0.0 {
            return Err(Error::construction("zero-length line segment"));
        }
        Ok(PathSegment::Line { start, end })
    }

    pub fn arc(center: Vec2, radius: f64, start_angle: f64, sweep: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::construction("arc with non-positive radius"));
        }
        if sweep == 0.0 || sweep.abs() >= 2.0 * std::f64::consts::PI {
            return Err(Error::construction(format!(
                "arc sweep {sweep} outside (0, 2 pi)"
            )));
        }
        Ok(PathSegment::Arc {
            center,
            radius,
            start_angle,
            sweep,
        })
    }

    pub fn length(&self) -> f64 {
        match *self {
            PathSegment::Line { start, end } => start.dist(end),
            PathSegment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    pub fn start(&self) -> Vec2 {
        match *self {
            PathSegment::Line { start, .. } => start,
            PathSegment::Arc {
                center,
                radius,
                start_angle,
                ..
            } => center + Vec2::from_angle(start_angle) * radius,
        }
    }

    pub fn end(&self) -> Vec2 {
        match *self {
            PathSegment::Line { end, .. } => end,
            PathSegment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => center + Vec2::from_angle(start_angle + sweep) * radius,
        }
    }

    /// Point at arclength `s` from the start, `s` in `[0, length]`.
    pub fn point_at(&self, s: f64) -> Vec2 {
        match *self {
            PathSegment::Line { start, end } => {
                let len = start.dist(end);
                start.lerp(end, (s / len).clamp(0.0, 1.0))
            }
            PathSegment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let a = start_angle + sweep.signum() * (s / radius);
                center + Vec2::from_angle(a) * radius
            }
        }
    }

    /// Unit tangent at arclength `s`.
    pub fn tangent_at(&self, s: f64) -> Vec2 {
        match *self {
            PathSegment::Line { start, end } => (end - start).normalized(),
            PathSegment::Arc {
                radius,
                start_angle,
                sweep,
                ..
            } => {
                let a = start_angle + sweep.signum() * (s / radius);
                let radial = Vec2::from_angle(a);
                if sweep > 0.0 {
                    radial.perp()
                } else {
                    -radial.perp()
                }
            }
        }
    }

    /// Signed curvature (positive when turning left).
    pub fn curvature(&self) -> f64 {
        match *self {
            PathSegment::Line { .. } => 0.0,
            PathSegment::Arc { radius, sweep, .. } => sweep.signum() / radius,
        }
    }

    /// Closest point on the segment: returns `(arclength, distance)`.
    pub fn nearest(&self, p: Vec2) -> (f64, f64) {
        match *self {
            PathSegment::Line { start, end } => {
                let d = end - start;
                let len = d.norm();
                let t = ((p - start).dot(d) / (len * len)).clamp(0.0, 1.0);
                let s = t * len;
                (s, p.dist(start.lerp(end, t)))
            }
            PathSegment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                // project the angle of p onto the swept range, then compare
                // with the endpoints.
                let rel = (p - center).angle();
                let mut best = (0.0, p.dist(self.start()));
                let endpoint = (self.length(), p.dist(self.end()));
                if endpoint.1 < best.1 {
                    best = endpoint;
                }
                // candidate interior angles rel + 2 pi k inside the span
                let (lo, hi) = if sweep > 0.0 {
                    (start_angle, start_angle + sweep)
                } else {
                    (start_angle + sweep, start_angle)
                };
                let tau = 2.0 * std::f64::consts::PI;
                let k0 = ((lo - rel) / tau).floor();
                for k in [k0, k0 + 1.0, k0 + 2.0] {
                    let a = rel + k * tau;
                    if a >= lo && a <= hi {
                        let s = if sweep > 0.0 {
                            (a - start_angle) * radius
                        } else {
                            (start_angle - a) * radius
                        };
                        let q = center + Vec2::from_angle(a) * radius;
                        let d = p.dist(q);
                        if d < best.1 {
                            best = (s, d);
                        }
                    }
                }
                best
            }
        }
    }

    /// Equally spaced sample points at spacing at most `ds` (includes both
    /// endpoints).
    pub fn sample_every(&self, ds: f64) -> Vec<Vec2> {
        let len = self.length();
        let n = (len / ds).ceil().max(1.0) as usize;
        (0..=n)
            .map(|k| self.point_at(len * k as f64 / n as f64))
            .collect()
    }
}

/// A tangent-continuous chain of segments with a global arclength chart.
#[derive(Debug, Clone)]
pub struct Chain {
    pub segments: Vec<PathSegment>,
    /// Prefix arclengths: `cum[i]` = length before segment `i`.
    cum: Vec<f64>,
    total: f64,
}

impl Chain {
    pub fn new(segments: Vec<PathSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::construction("empty chain"));
        }
        for w in segments.windows(2) {
            let gap = w[0].end().dist(w[1].start());
            if gap > 1e-9 {
                return Err(Error::construction(format!(
                    "chain gap of {gap} between consecutive segments"
                )));
            }
        }
        let mut cum = Vec::with_capacity(segments.len());
        let mut total = 0.0;
        for s in &segments {
            cum.push(total);
            total += s.length();
        }
        Ok(Chain {
            segments,
            cum,
            total,
        })
    }

    pub fn total_length(&self) -> f64 {
        self.total
    }

    pub fn is_closed(&self) -> bool {
        self.segments[0]
            .start()
            .dist(self.segments.last().unwrap().end())
            < 1e-9
    }

    /// Checks unit-tangent continuity at every junction (and closure when the
    /// chain is a loop).
    pub fn max_tangent_kink(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let n = self.segments.len();
        for i in 0..n {
            let j = (i + 1) % n;
            if j == 0 && !self.is_closed() {
                break;
            }
            let a = self.segments[i];
            let b = self.segments[j];
            let ta = a.tangent_at(a.length());
            let tb = b.tangent_at(0.0);
            worst = worst.max((ta - tb).norm());
        }
        worst
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let s = s.clamp(0.0, self.total);
        let idx = match self
            .cum
            .binary_search_by(|c| c.partial_cmp(&s).unwrap())
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        let idx = idx.min(self.segments.len() - 1);
        (idx, s - self.cum[idx])
    }

    pub fn point_at(&self, s: f64) -> Vec2 {
        let (i, local) = self.locate(s);
        self.segments[i].point_at(local)
    }

    pub fn tangent_at(&self, s: f64) -> Vec2 {
        let (i, local) = self.locate(s);
        self.segments[i].tangent_at(local)
    }

    pub fn curvature_at(&self, s: f64) -> f64 {
        let (i, _) = self.locate(s);
        self.segments[i].curvature()
    }

    pub fn segment_index_at(&self, s: f64) -> usize {
        self.locate(s).0
    }

    /// Nearest point on the chain: `(global arclength, distance)`.
    pub fn nearest(&self, p: Vec2) -> (f64, f64) {
        let mut best = (0.0, f64::INFINITY);
        for (i, seg) in self.segments.iter().enumerate() {
            let (s, d) = seg.nearest(p);
            if d < best.1 {
                best = (self.cum[i] + s, d);
            }
        }
        best
    }

    /// Signed offset of `p` relative to the chain: positive on the left of
    /// the tangent. Returns `(arclength, signed offset)`.
    pub fn signed_offset(&self, p: Vec2) -> (f64, f64) {
        let (s, d) = self.nearest(p);
        let t = self.tangent_at(s);
        let foot = self.point_at(s);
        let side = t.cross(p - foot);
        (s, if side >= 0.0 { d } else { -d })
    }
}

/// Builds a tangent-continuous chain through `waypoints`, rounding every
/// interior corner with a fillet arc of radius `fillet`.
///
/// Consecutive waypoints must be farther apart than the fillet consumption on
/// each side; corners may turn by any angle below pi.
pub fn route_with_fillets(waypoints: &[Vec2], fillet: f64) -> Result<Vec<PathSegment>> {
    if waypoints.len() < 2 {
        return Err(Error::construction("route needs at least two waypoints"));
    }
    let mut segs: Vec<PathSegment> = Vec::new();
    let mut cursor = waypoints[0];
    for w in 1..waypoints.len() - 1 {
        let a = waypoints[w];
        let b = waypoints[w + 1];
        let u = (a - cursor).normalized();
        let v = (b - a).normalized();
        let cross = u.cross(v);
        let dot = u.dot(v).clamp(-1.0, 1.0);
        if cross.abs() < 1e-12 && dot > 0.0 {
            // collinear continuation: no corner
            continue;
        }
        let turn = cross.atan2(dot); // signed turn angle in (-pi, pi)
        if turn.abs() >= std::f64::consts::PI - 1e-9 {
            return Err(Error::construction("route reverses direction at a corner"));
        }
        // shrink the fillet where the adjoining legs are short
        let tan_half = (turn.abs() / 2.0).tan();
        let room = 0.45 * (a - cursor).norm().min((b - a).norm());
        let radius = fillet.min(room / tan_half);
        if radius <= 1e-12 {
            return Err(Error::construction("no room for a fillet at a corner"));
        }
        let setback = radius * tan_half;
        let p_in = a - u * setback;
        let p_out = a + v * setback;
        segs.push(PathSegment::line(cursor, p_in)?);
        // fillet arc: center sits off p_in along the left/right normal
        let n = if turn > 0.0 { u.perp() } else { -u.perp() };
        let center = p_in + n * radius;
        let start_angle = (p_in - center).angle();
        segs.push(PathSegment::arc(center, radius, start_angle, turn)?);
        cursor = p_out;
    }
    let last = *waypoints.last().unwrap();
    if cursor.dist(last) > 1e-12 {
        segs.push(PathSegment::line(cursor, last)?);
    }
    Ok(segs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn line_chart() {
        let seg = PathSegment::line(Vec2::ZERO, Vec2::new(3.0, 4.0)).unwrap();
        assert_abs_diff_eq!(seg.length(), 5.0);
        assert_abs_diff_eq!(seg.point_at(2.5).x, 1.5);
        assert_abs_diff_eq!(seg.tangent_at(1.0).norm(), 1.0);
    }

    #[test]
    fn arc_chart_and_tangent() {
        // quarter ccw arc from (1,0) to (0,1)
        let seg = PathSegment::arc(Vec2::ZERO, 1.0, 0.0, PI / 2.0).unwrap();
        assert_abs_diff_eq!(seg.length(), PI / 2.0);
        assert_abs_diff_eq!(seg.end().dist(Vec2::new(0.0, 1.0)), 0.0, epsilon = 1e-12);
        let t0 = seg.tangent_at(0.0);
        assert_abs_diff_eq!(t0.dist(Vec2::new(0.0, 1.0)), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(seg.curvature(), 1.0);
        // clockwise variant
        let cw = PathSegment::arc(Vec2::ZERO, 2.0, PI / 2.0, -PI / 2.0).unwrap();
        assert_abs_diff_eq!(cw.curvature(), -0.5);
        assert_abs_diff_eq!(
            cw.tangent_at(0.0).dist(Vec2::new(1.0, 0.0)),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn nearest_on_arc_prefers_interior() {
        let seg = PathSegment::arc(Vec2::ZERO, 1.0, 0.0, PI / 2.0).unwrap();
        let (s, d) = seg.nearest(Vec2::new(2.0, 2.0));
        assert_abs_diff_eq!(d, 8f64.sqrt() - 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s, PI / 4.0, epsilon = 1e-12);
        // a point past the angular span snaps to an endpoint
        let (s_end, _) = seg.nearest(Vec2::new(-1.0, 0.5));
        assert_abs_diff_eq!(s_end, seg.length(), epsilon = 1e-9);
    }

    #[test]
    fn fillet_route_is_tangent_continuous() {
        let wps = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(2.0, 1.0),
        ];
        let segs = route_with_fillets(&wps, 0.1).unwrap();
        let chain = Chain::new(segs).unwrap();
        assert!(chain.max_tangent_kink() < 1e-9);
        // endpoints preserved
        assert_abs_diff_eq!(
            chain.point_at(0.0).dist(Vec2::new(0.0, 0.0)),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            chain.point_at(chain.total_length()).dist(Vec2::new(2.0, 1.0)),
            0.0,
            epsilon = 1e-12
        );
        // length below the sharp-corner polyline length
        assert!(chain.total_length() < 3.0);
        assert!(chain.total_length() > 2.8);
    }

    #[test]
    fn signed_offset_side_convention() {
        let chain = Chain::new(vec![
            PathSegment::line(Vec2::ZERO, Vec2::new(2.0, 0.0)).unwrap()
        ])
        .unwrap();
        let (_, up) = chain.signed_offset(Vec2::new(1.0, 0.3));
        let (_, down) = chain.signed_offset(Vec2::new(1.0, -0.3));
        assert!(up > 0.0 && down < 0.0);
    }
}
