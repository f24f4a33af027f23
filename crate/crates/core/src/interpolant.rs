//! The piecewise-linear interpolant of a subgradient sequence.

use crate::error::Error;
use crate::vec2::Vec2;
use crate::Result;

/// One recorded step of a subgradient sequence.
#[derive(Debug, Clone, Copy)]
pub struct TraceStep {
    /// Index `i` of the step in its parent construction.
    pub index: u64,
    pub position: Vec2,
    /// Step size `eps_i`.
    pub step_size: f64,
    /// The subgradient `v_i` used at this step (`x_{i+1} = x_i - eps_i v_i`).
    pub subgradient: Vec2,
}

/// An indexed record of `(x_i, eps_i, v_i)` triples.
///
/// The interpolant `gamma` places `x_i` at time `t_i = sum of earlier step
/// sizes` and interpolates linearly; its velocity on `(t_i, t_{i+1})` is
/// `(x_{i+1} - x_i)/eps_i = -v_i`.
#[derive(Debug, Clone)]
pub struct SubgradientTrace {
    steps: Vec<TraceStep>,
    /// `times[k]` = interpolant time of `steps[k]`.
    times: Vec<f64>,
}

/// Result of an interpolant evaluation.
#[derive(Debug, Clone, Copy)]
pub struct InterpolantPoint {
    pub position: Vec2,
    pub velocity: Vec2,
    /// Set when `t` hit a breakpoint exactly; the velocity then is the
    /// right-sided one.
    pub at_breakpoint: bool,
}

impl SubgradientTrace {
    pub fn new(steps: Vec<TraceStep>) -> Result<Self> {
        if steps.len() < 2 {
            return Err(Error::domain("trace needs at least two points"));
        }
        let mut times = Vec::with_capacity(steps.len());
        let mut t = 0.0;
        for s in &steps {
            if !(s.step_size > 0.0) {
                return Err(Error::domain("non-positive step size in trace"));
            }
            times.push(t);
            t += s.step_size;
        }
        Ok(SubgradientTrace { steps, times })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[TraceStep] {
        &self.steps
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Total time span `[0, sum eps_i)` covered by segments (the last point
    /// contributes its step size as the final segment's duration only if a
    /// successor exists; the span ends at the last breakpoint).
    pub fn time_span(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Velocity of segment `k` (from step k to step k+1).
    pub fn segment_velocity(&self, k: usize) -> Vec2 {
        let a = &self.steps[k];
        let b = &self.steps[k + 1];
        (b.position - a.position) / a.step_size
    }

    /// `gamma(t)` with its velocity.
    pub fn interpolant(&self, t: f64) -> Result<InterpolantPoint> {
        let span = self.time_span();
        if !(0.0..=span).contains(&t) {
            return Err(Error::domain(format!(
                "interpolant time {t} outside [0, {span}]"
            )));
        }
        let k = match self
            .times
            .binary_search_by(|x| x.partial_cmp(&t).unwrap())
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        if k + 1 >= self.steps.len() {
            // t == span exactly: clamp to final point, right-velocity of the
            // last segment.
            return Ok(InterpolantPoint {
                position: self.steps[k].position,
                velocity: self.segment_velocity(k - 1),
                at_breakpoint: true,
            });
        }
        let local = t - self.times[k];
        let frac = local / self.steps[k].step_size;
        Ok(InterpolantPoint {
            position: self.steps[k]
                .position
                .lerp(self.steps[k + 1].position, frac),
            velocity: self.segment_velocity(k),
            at_breakpoint: local == 0.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample_trace() -> SubgradientTrace {
        // hand-built trace: x_{i+1} = x_i - eps_i v_i
        let pts = [
            (Vec2::new(0.0, 0.0), 0.5),
            (Vec2::new(1.0, 0.0), 0.25),
            (Vec2::new(1.0, 1.0), 0.25),
        ];
        let mut steps = Vec::new();
        for (k, (p, e)) in pts.iter().enumerate() {
            let v = if k + 1 < pts.len() {
                -(pts[k + 1].0 - *p) / *e
            } else {
                Vec2::ZERO
            };
            steps.push(TraceStep {
                index: k as u64,
                position: *p,
                step_size: *e,
                subgradient: v,
            });
        }
        SubgradientTrace::new(steps).unwrap()
    }

    #[test]
    fn breakpoints_hit_exactly() {
        let tr = sample_trace();
        let p = tr.interpolant(0.0).unwrap();
        assert_eq!(p.position, Vec2::new(0.0, 0.0));
        assert!(p.at_breakpoint);
        let p = tr.interpolant(0.5).unwrap();
        assert_eq!(p.position, Vec2::new(1.0, 0.0));
        assert!(p.at_breakpoint);
    }

    #[test]
    fn midpoint_is_linear() {
        let tr = sample_trace();
        let p = tr.interpolant(0.25).unwrap();
        assert_abs_diff_eq!(p.position.x, 0.5);
        assert!(!p.at_breakpoint);
    }

    #[test]
    fn velocity_is_negative_subgradient() {
        let tr = sample_trace();
        let p = tr.interpolant(0.25).unwrap();
        let v_i = tr.steps()[0].subgradient;
        assert_abs_diff_eq!((p.velocity + v_i).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn out_of_range_rejected() {
        let tr = sample_trace();
        assert!(tr.interpolant(-0.1).is_err());
        assert!(tr.interpolant(0.81).is_err());
    }
}
