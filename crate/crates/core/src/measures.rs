//! Occupation measures of interpolant curves, their closedness residuals,
//! centroid fields, and the analytic limiting measures of the circle example.

use crate::error::Error;
use crate::interpolant::SubgradientTrace;
use crate::series::{log_range_sum, CompensatedSum, LogIndex, SeriesKind};
use crate::vec2::Vec2;
use crate::Result;

use std::f64::consts::TAU;

/// One weighted sample of a position-velocity measure.
#[derive(Debug, Clone, Copy)]
pub struct MeasureSample {
    pub position: Vec2,
    pub velocity: Vec2,
    pub weight: f64,
}

/// A weighted sample list representing a measure on position-velocity pairs.
#[derive(Debug, Clone)]
pub struct OccupationMeasure {
    pub samples: Vec<MeasureSample>,
}

/// Per-segment quadrature rule used when discretizing a time window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleRule {
    /// One sample at the segment midpoint (second-order).
    Midpoint,
    /// Two Gauss-Legendre nodes per segment; exact for cubic test functions
    /// along straight segments, which the closedness checks need at the 1e-8
    /// level. (A midpoint rule with a handful of subsamples cannot reach
    /// that; see the closedness tests.)
    GaussLegendre2,
}

impl OccupationMeasure {
    pub fn total_weight(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for s in &self.samples {
            acc.add(s.weight);
        }
        acc.value()
    }

    /// Integral of `g(position, velocity)` against the measure.
    pub fn integrate(&self, g: impl Fn(Vec2, Vec2) -> f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for s in &self.samples {
            acc.add(s.weight * g(s.position, s.velocity));
        }
        acc.value()
    }

    /// Normalizes the weights to total 1 (no-op on an empty measure).
    pub fn normalized(mut self) -> Self {
        let w = self.total_weight();
        if w > 0.0 {
            for s in &mut self.samples {
                s.weight /= w;
            }
        }
        self
    }
}

/// The occupation measure of the interpolant over `[t_a, t_b]`: the
/// normalized pushforward of time onto position-velocity pairs.
pub fn occupation(
    trace: &SubgradientTrace,
    window: (f64, f64),
    rule: SampleRule,
) -> Result<OccupationMeasure> {
    let (ta, tb) = window;
    let span = trace.time_span();
    if !(ta < tb) {
        return Err(Error::domain("empty occupation window"));
    }
    if ta < 0.0 || tb > span {
        return Err(Error::domain(format!(
            "window [{ta}, {tb}] outside trace span [0, {span}]"
        )));
    }
    let times = trace.times();
    let total = tb - ta;
    let mut samples = Vec::new();
    for k in 0..trace.len() - 1 {
        let (t0, t1) = (times[k], times[k + 1]);
        let lo = t0.max(ta);
        let hi = t1.min(tb);
        if hi <= lo {
            continue;
        }
        let w = (hi - lo) / total;
        let vel = trace.segment_velocity(k);
        let pos_at = |t: f64| {
            let frac = (t - t0) / (t1 - t0);
            trace.steps()[k]
                .position
                .lerp(trace.steps()[k + 1].position, frac)
        };
        match rule {
            SampleRule::Midpoint => samples.push(MeasureSample {
                position: pos_at(0.5 * (lo + hi)),
                velocity: vel,
                weight: w,
            }),
            SampleRule::GaussLegendre2 => {
                let mid = 0.5 * (lo + hi);
                let half = 0.5 * (hi - lo);
                let off = half / 3f64.sqrt();
                for t in [mid - off, mid + off] {
                    samples.push(MeasureSample {
                        position: pos_at(t),
                        velocity: vel,
                        weight: 0.5 * w,
                    });
                }
            }
        }
    }
    Ok(OccupationMeasure { samples })
}

/// A named smooth test function through its gradient field.
pub struct TestField {
    pub name: &'static str,
    pub grad: fn(Vec2) -> Vec2,
}

/// The closedness dictionary: gradients of coordinate monomials up to degree
/// three plus `sin x1` and `cos x2`. A finite falsifiable surrogate for "all
/// C-infinity functions".
pub const TEST_FIELDS: &[TestField] = &[
    TestField { name: "x1", grad: |_| Vec2::new(1.0, 0.0) },
    TestField { name: "x2", grad: |_| Vec2::new(0.0, 1.0) },
    TestField { name: "x1^2", grad: |p| Vec2::new(2.0 * p.x, 0.0) },
    TestField { name: "x1*x2", grad: |p| Vec2::new(p.y, p.x) },
    TestField { name: "x2^2", grad: |p| Vec2::new(0.0, 2.0 * p.y) },
    TestField { name: "x1^3", grad: |p| Vec2::new(3.0 * p.x * p.x, 0.0) },
    TestField { name: "x1^2*x2", grad: |p| Vec2::new(2.0 * p.x * p.y, p.x * p.x) },
    TestField { name: "x1*x2^2", grad: |p| Vec2::new(p.y * p.y, 2.0 * p.x * p.y) },
    TestField { name: "x2^3", grad: |p| Vec2::new(0.0, 3.0 * p.y * p.y) },
    TestField { name: "sin(x1)", grad: |p| Vec2::new(p.x.cos(), 0.0) },
    TestField { name: "cos(x2)", grad: |p| Vec2::new(0.0, -p.y.sin()) },
];

/// Max over the dictionary of `| int grad g . v dmu |`; zero for closed
/// measures.
pub fn closed_residual(measure: &OccupationMeasure) -> f64 {
    closed_residual_detailed(measure)
        .into_iter()
        .map(|(_, r)| r.abs())
        .fold(0.0, f64::max)
}

/// Per-test-function residuals.
pub fn closed_residual_detailed(measure: &OccupationMeasure) -> Vec<(&'static str, f64)> {
    TEST_FIELDS
        .iter()
        .map(|tf| {
            let r = measure.integrate(|p, v| (tf.grad)(p).dot(v));
            (tf.name, r)
        })
        .collect()
}

/// Weight-averaged velocity of samples within `radius` of `x`; the zero
/// vector when no sample is captured.
pub fn centroid(measure: &OccupationMeasure, x: Vec2, radius: f64) -> Result<Vec2> {
    if !(radius > 0.0) {
        return Err(Error::domain("centroid radius must be positive"));
    }
    let mut wx = CompensatedSum::new();
    let mut wy = CompensatedSum::new();
    let mut wt = CompensatedSum::new();
    for s in &measure.samples {
        if s.position.dist(x) <= radius {
            wx.add(s.weight * s.velocity.x);
            wy.add(s.weight * s.velocity.y);
            wt.add(s.weight);
        }
    }
    let w = wt.value();
    if w == 0.0 {
        return Ok(Vec2::ZERO);
    }
    Ok(Vec2::new(wx.value() / w, wy.value() / w))
}

/// The analytic limiting measure anchored at angle `theta0`: density
/// `rho(theta) = e^(theta - theta0) / (1 - e^(-2 pi))` on
/// `[theta0 - 2 pi, theta0)`, velocities split evenly between `+r(theta)` and
/// `-r(theta)`.
#[derive(Debug, Clone, Copy)]
pub struct LimitMeasure {
    pub theta0: f64,
}

impl LimitMeasure {
    pub fn new(theta0: f64) -> Self {
        LimitMeasure { theta0 }
    }

    /// `rho(theta)` with `theta` reduced mod 2 pi into the anchor window.
    pub fn density(&self, theta: f64) -> f64 {
        let mut t = (theta - self.theta0) % TAU;
        if t >= 0.0 {
            t -= TAU;
        }
        // now t in [-2 pi, 0)
        t.exp() / (1.0 - (-TAU).exp())
    }

    /// Midpoint discretization on `n` angular nodes, normalized to total
    /// weight one; each node carries both velocity atoms.
    pub fn discretize(&self, n: usize) -> OccupationMeasure {
        let dt = TAU / n as f64;
        let mut samples = Vec::with_capacity(2 * n);
        for j in 0..n {
            let theta = self.theta0 - TAU + (j as f64 + 0.5) * dt;
            let w = self.density(theta) * dt;
            let r = Vec2::from_angle(theta);
            samples.push(MeasureSample { position: r, velocity: r, weight: 0.5 * w });
            samples.push(MeasureSample { position: r, velocity: -r, weight: 0.5 * w });
        }
        OccupationMeasure { samples }.normalized()
    }
}

/// The limiting fraction of epsilon-weighted time an angular arc of length
/// `alpha` captures: `p(alpha) = (1 - e^(-alpha)) / (1 - e^(-2 pi))`.
pub fn arc_mass_limit(alpha: f64) -> f64 {
    (1.0 - (-alpha).exp()) / (1.0 - (-TAU).exp())
}

/// The epsilon-weighted visit ratio of an arc of angular width `alpha`,
/// evaluated analytically over the visit windows
/// `[m0^(e^(2 pi k)), m0^(e^(alpha + 2 pi k))]` up to index `n`.
///
/// This reproduces the density derivation numerically; a trajectory long
/// enough to test it empirically (N ~ e^535) cannot be materialized.
pub fn arc_mass_ratio(alpha: f64, n: LogIndex, m0: LogIndex) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= TAU) {
        return Err(Error::domain(format!("alpha {alpha} outside (0, 2 pi]")));
    }
    if m0.log() < 2f64.ln() {
        return Err(Error::domain("m0 must be at least 2"));
    }
    let mut num = CompensatedSum::new();
    let mut k = 0u32;
    loop {
        let factor = (TAU * k as f64).exp();
        let lo = LogIndex::from_log(m0.log() * factor)?;
        if lo.log() > n.log() || !lo.log().is_finite() {
            break;
        }
        let hi_raw = m0.log() * factor * alpha.exp();
        let hi = LogIndex::from_log(hi_raw.min(n.log()))?;
        num.add(log_range_sum(SeriesKind::Harmonic, lo, hi)?);
        k += 1;
        if k > 10_000 {
            break;
        }
    }
    let den = log_range_sum(SeriesKind::Harmonic, LogIndex::from_index(2), n)?;
    Ok(num.value() / den)
}

/// Empirical essential-accumulation mass ratio: the epsilon-weighted fraction
/// of the first `n_index`-indexed steps whose position lies in the region.
pub fn essacc_ratio(
    trace: &SubgradientTrace,
    region: impl Fn(Vec2) -> bool,
    n_index: u64,
) -> f64 {
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for s in trace.steps() {
        if s.index > n_index {
            break;
        }
        den.add(s.step_size);
        if region(s.position) {
            num.add(s.step_size);
        }
    }
    let d = den.value();
    if d == 0.0 {
        0.0
    } else {
        num.value() / d
    }
}
