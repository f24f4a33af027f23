//! The circle counterexample: an explicit subgradient sequence that
//! accumulates on the unit circle without converging, and the objective it
//! descends.
//!
//! The sequence is `x_i = (1 + (-1)^i / i) (cos theta_i, sin theta_i)` with
//! `theta_i = sum_{k=2}^i 1/(k ln k)`; steps `eps_i = |x_{i+1} - x_i|` and
//! directions `v_i = -(x_{i+1} - x_i)/eps_i`. The objective blends the
//! distance-to-circle function `phi(x) = |1 - |x||` with linear models
//! `V_i(x) = (x - x_i) . v_i + 1/i` through bumps of radius `2^(1-i)` at the
//! `x_i`, which makes `grad f = v_i` exactly on a ball around every iterate.

use crate::error::Error;
use crate::halton::halton2;
use crate::interpolant::{SubgradientTrace, TraceStep};
use crate::mollifier::Mollifier;
use crate::series::{CompensatedSum, MATERIALIZATION_CUTOFF};
use crate::vec2::Vec2;
use crate::Result;

/// Tolerance for deciding membership on the unit circle (the
/// nondifferentiability locus).
pub const CIRCLE_TOL: f64 = 1e-12;

/// The explicit sequence, generated incrementally.
#[derive(Debug, Clone)]
pub struct CircleSequence {
    i0: u64,
    /// `thetas[k] = theta(i0 + k)`, extended on demand.
    thetas: Vec<f64>,
    acc: CompensatedSum,
    next_index: u64,
}

/// One fully-resolved step of the circle sequence.
#[derive(Debug, Clone, Copy)]
pub struct CircleStep {
    pub i: u64,
    pub theta: f64,
    pub x: Vec2,
    pub x_next: Vec2,
    pub eps: f64,
    pub v: Vec2,
}

fn radial_factor(i: u64) -> f64 {
    let s = if i % 2 == 0 { 1.0 } else { -1.0 };
    1.0 + s / i as f64
}

impl CircleSequence {
    pub fn new(i0: u64) -> Result<Self> {
        if i0 < 2 {
            return Err(Error::domain(format!("circle sequence needs i0 >= 2, got {i0}")));
        }
        if i0 > MATERIALIZATION_CUTOFF {
            return Err(Error::domain("i0 exceeds the materialization cutoff"));
        }
        let mut acc = CompensatedSum::new();
        for k in 2..=i0 {
            let k = k as f64;
            acc.add(1.0 / (k * k.ln()));
        }
        Ok(CircleSequence {
            i0,
            thetas: vec![acc.value()],
            acc,
            next_index: i0 + 1,
        })
    }

    pub fn i0(&self) -> u64 {
        self.i0
    }

    fn ensure(&mut self, i: u64) -> Result<()> {
        if i > MATERIALIZATION_CUTOFF {
            return Err(Error::domain(format!(
                "index {i} exceeds the materialization cutoff"
            )));
        }
        while self.next_index <= i {
            let k = self.next_index as f64;
            self.acc.add(1.0 / (k * k.ln()));
            self.thetas.push(self.acc.value());
            self.next_index += 1;
        }
        Ok(())
    }

    pub fn theta_at(&mut self, i: u64) -> Result<f64> {
        if i < self.i0 {
            return Err(Error::domain(format!("index {i} below i0 = {}", self.i0)));
        }
        self.ensure(i)?;
        Ok(self.thetas[(i - self.i0) as usize])
    }

    /// `x_i`.
    pub fn x(&mut self, i: u64) -> Result<Vec2> {
        let th = self.theta_at(i)?;
        Ok(Vec2::from_angle(th) * radial_factor(i))
    }

    /// The resolved step at index `i` (needs `x_{i+1}`).
    pub fn step(&mut self, i: u64) -> Result<CircleStep> {
        let x = self.x(i)?;
        let x_next = self.x(i + 1)?;
        let eps = x_next.dist(x);
        let v = -(x_next - x) / eps;
        Ok(CircleStep {
            i,
            theta: self.thetas[(i - self.i0) as usize],
            x,
            x_next,
            eps,
            v,
        })
    }

    /// The trace of `n` steps starting at `i0`, for occupation-measure work.
    pub fn trace(&mut self, n: u64) -> Result<SubgradientTrace> {
        let mut steps = Vec::with_capacity(n as usize);
        for i in self.i0..self.i0 + n {
            let s = self.step(i)?;
            steps.push(TraceStep {
                index: i,
                position: s.x,
                step_size: s.eps,
                subgradient: s.v,
            });
        }
        SubgradientTrace::new(steps)
    }
}

/// The set `{offset + a * direction : a in [lo, hi]}` in gradient space,
/// anchored at the base point where it was evaluated; the Clarke
/// subdifferential of the objectives here on their nonsmooth loci.
#[derive(Debug, Clone, Copy)]
pub struct ClarkeSegment {
    /// point of evaluation
    pub base: Vec2,
    /// constant (tangential) part of every element
    pub offset: Vec2,
    pub direction: Vec2,
    pub lo: f64,
    pub hi: f64,
}

impl ClarkeSegment {
    /// Distance from `v` to the segment.
    pub fn distance(&self, v: Vec2) -> f64 {
        let w = v - self.offset;
        let along = w.dot(self.direction).clamp(self.lo, self.hi);
        (w - self.direction * along).norm()
    }

    pub fn contains_zero(&self) -> bool {
        self.distance(Vec2::ZERO) <= 1e-12
    }
}

/// Per-iterate data the objective keeps for bump lookups.
#[derive(Debug, Clone, Copy)]
struct BumpSite {
    theta: f64,
    x: Vec2,
    v: Vec2,
}

/// The circle objective: `f = (1 - sum psi_i) phi + sum psi_i V_i` with
/// `psi_i(x) = psi(2^i (x - x_i))`.
#[derive(Debug, Clone)]
pub struct CircleObjective {
    i0: u64,
    cutoff: u64,
    sites: Vec<BumpSite>,
}

/// Which bump (if any) is active at a query point.
#[derive(Debug, Clone, Copy)]
struct ActiveBump {
    i: u64,
    site: BumpSite,
    /// Distance to the bump center.
    dist: f64,
}

impl CircleObjective {
    /// Materializes iterates `i0..=cutoff`. Beyond the cutoff the bump
    /// supports are below floating-point resolution and the objective
    /// evaluates as plain `phi`.
    pub fn new(i0: u64, cutoff: u64) -> Result<Self> {
        if cutoff <= i0 {
            return Err(Error::domain("cutoff must exceed i0"));
        }
        let mut seq = CircleSequence::new(i0)?;
        seq.ensure(cutoff + 1)?;
        let mut sites = Vec::with_capacity((cutoff - i0 + 1) as usize);
        for i in i0..=cutoff {
            let s = seq.step(i)?;
            sites.push(BumpSite {
                theta: s.theta,
                x: s.x,
                v: s.v,
            });
        }
        let obj = CircleObjective { i0, cutoff, sites };
        obj.assert_disjoint_supports()?;
        Ok(obj)
    }

    pub fn i0(&self) -> u64 {
        self.i0
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    /// Pairwise disjointness of bump supports, checked directly for indices
    /// up to 1e4; beyond that the radii `2^(1-i)` shrink far below the ~1/i^2
    /// center gaps, which the construction asserts by the gap inequality.
    fn assert_disjoint_supports(&self) -> Result<()> {
        let direct_limit = 10_000.min(self.cutoff);
        for i in self.i0..direct_limit {
            let a = self.site(i);
            let ra = support_radius(i);
            // only neighbors can come close; check a small window
            for j in i + 1..=(i + 8).min(direct_limit) {
                let b = self.site(j);
                let rb = support_radius(j);
                if a.x.dist(b.x) <= ra + rb {
                    return Err(Error::construction(format!(
                        "bump supports {i} and {j} intersect"
                    )));
                }
            }
        }
        for i in direct_limit.max(self.i0)..self.cutoff {
            // gap >= |radius_i - radius_j| argument: centers are ~2/i apart,
            // radii sum below 2^(2-i); fails only if 2^(2-i) > 1/i which
            // cannot happen past i = 10.
            let r = support_radius(i);
            if 2.0 * r >= 0.5 / i as f64 {
                return Err(Error::construction(format!(
                    "support radius at {i} too large for the gap argument"
                )));
            }
        }
        Ok(())
    }

    fn site(&self, i: u64) -> BumpSite {
        self.sites[(i - self.i0) as usize]
    }

    pub fn x(&self, i: u64) -> Result<Vec2> {
        if i < self.i0 || i > self.cutoff {
            return Err(Error::domain(format!("index {i} outside materialized range")));
        }
        Ok(self.site(i).x)
    }

    pub fn v(&self, i: u64) -> Result<Vec2> {
        if i < self.i0 || i > self.cutoff {
            return Err(Error::domain(format!("index {i} outside materialized range")));
        }
        Ok(self.site(i).v)
    }

    /// Finds the bump containing `p`, if any. Binary search on the angle
    /// (`theta` is strictly increasing and spans less than a full turn for
    /// any materializable cutoff).
    fn active_bump(&self, p: Vec2) -> Option<ActiveBump> {
        let mut ang = p.angle();
        let lo = self.sites.first().unwrap().theta;
        let hi = self.sites.last().unwrap().theta;
        // bring the atan2 angle into the sequence's range if possible
        while ang < lo {
            ang += 2.0 * std::f64::consts::PI;
        }
        if ang > hi + 0.1 {
            // allow a window past the last site; re-check below
            ang -= 2.0 * std::f64::consts::PI;
        }
        let idx = match self
            .sites
            .binary_search_by(|s| s.theta.partial_cmp(&ang).unwrap())
        {
            Ok(k) => k,
            Err(k) => k,
        };
        let lo_k = idx.saturating_sub(3);
        let hi_k = (idx + 3).min(self.sites.len() - 1);
        for k in lo_k..=hi_k {
            let i = self.i0 + k as u64;
            let site = self.sites[k];
            let d = p.dist(site.x);
            if d == 0.0 || d < support_radius(i) {
                return Some(ActiveBump { i, site, dist: d });
            }
        }
        None
    }

    /// `phi(x) = |1 - |x||`, the distance to the unit circle.
    pub fn phi(p: Vec2) -> f64 {
        (1.0 - p.norm()).abs()
    }

    /// `grad phi` away from the circle and the origin.
    fn phi_grad(p: Vec2) -> Vec2 {
        let r = p.norm();
        let sign = if r > 1.0 { 1.0 } else { -1.0 };
        p * (sign / r)
    }

    /// Evaluates the objective anywhere.
    pub fn f(&self, p: Vec2) -> f64 {
        let phi = Self::phi(p);
        match self.active_bump(p) {
            None => phi,
            Some(b) => {
                let psi = bump_value(b.i, b.dist);
                let vi = (p - b.site.x).dot(b.site.v) + 1.0 / b.i as f64;
                (1.0 - psi) * phi + psi * vi
            }
        }
    }

    /// Analytic gradient on the differentiability region.
    pub fn grad(&self, p: Vec2) -> Result<Vec2> {
        let r = p.norm();
        if (r - 1.0).abs() <= CIRCLE_TOL {
            return Err(Error::Nondifferentiable {
                x: p.x,
                y: p.y,
                hint: "point on the unit circle; use clarke()".into(),
            });
        }
        if r <= CIRCLE_TOL {
            return Err(Error::Nondifferentiable {
                x: p.x,
                y: p.y,
                hint: "origin is critical for phi".into(),
            });
        }
        let phi_grad = Self::phi_grad(p);
        match self.active_bump(p) {
            None => Ok(phi_grad),
            Some(b) => {
                let psi = bump_value(b.i, b.dist);
                let psi_grad = bump_grad(b.i, p - b.site.x);
                let phi = Self::phi(p);
                let vi = (p - b.site.x).dot(b.site.v) + 1.0 / b.i as f64;
                Ok(psi_grad * (vi - phi) + phi_grad * (1.0 - psi) + b.site.v * psi)
            }
        }
    }

    /// Clarke subdifferential on the unit circle: `{a p : a in [-1, 1]}`.
    pub fn clarke(&self, p: Vec2) -> Result<ClarkeSegment> {
        if (p.norm() - 1.0).abs() > CIRCLE_TOL {
            return Err(Error::domain(format!(
                "clarke() needs |p| = 1 within {CIRCLE_TOL}, got |p| = {}",
                p.norm()
            )));
        }
        Ok(ClarkeSegment {
            base: p,
            offset: Vec2::ZERO,
            direction: p.normalized(),
            lo: -1.0,
            hi: 1.0,
        })
    }

    /// `|x_{i+1} - (x_i - eps_i grad f(x_i))|`: zero up to rounding because
    /// the construction makes `grad f(x_i) = v_i` exactly.
    pub fn verify_step(&self, seq: &mut CircleSequence, i: u64) -> Result<f64> {
        let s = seq.step(i)?;
        let g = self.grad(s.x)?;
        Ok((s.x_next - (s.x - g * s.eps)).norm())
    }
}

/// Support radius `2^(1-i)` of bump `i` (underflows to 0 for huge `i`, where
/// membership degenerates to exact center equality).
fn support_radius(i: u64) -> f64 {
    (1.0 - i as f64).exp2()
}

/// `psi_i` value at distance `d` from the center.
fn bump_value(i: u64, d: f64) -> f64 {
    if d == 0.0 {
        return 1.0;
    }
    // d > 0 in the transition shell forces i small enough that 2^i is finite.
    Mollifier::profile(d * (i as f64).exp2())
}

/// `grad psi_i` at offset `w` from the center.
fn bump_grad(i: u64, w: Vec2) -> Vec2 {
    let d = w.norm();
    if d == 0.0 {
        return Vec2::ZERO;
    }
    let scale = (i as f64).exp2();
    Mollifier::grad(w * scale) * scale
}

/// Specification of a noncritical sampling region for the KL margin.
#[derive(Debug, Clone, Copy)]
pub struct KlSampleSpec {
    pub radius_lo: f64,
    pub radius_hi: f64,
    /// Keep-out half-width around the unit circle and around the origin.
    pub margin: f64,
    pub samples: u64,
}

impl Default for KlSampleSpec {
    fn default() -> Self {
        KlSampleSpec {
            radius_lo: 0.5,
            radius_hi: 1.5,
            margin: 1e-6,
            samples: 100_000,
        }
    }
}

/// Minimum of `|grad f|` over low-discrepancy samples of the annulus with the
/// critical set excluded; the empirical Kurdyka-Lojasiewicz certificate.
pub fn kl_margin(obj: &CircleObjective, spec: KlSampleSpec) -> Result<f64> {
    if spec.margin <= 0.0 || spec.radius_lo >= spec.radius_hi {
        return Err(Error::domain("bad KL sample spec"));
    }
    let mut min_norm = f64::INFINITY;
    let mut k = 0u64;
    let mut accepted = 0u64;
    while accepted < spec.samples {
        let (a, b) = halton2(k);
        k += 1;
        let r = spec.radius_lo + (spec.radius_hi - spec.radius_lo) * a;
        if (r - 1.0).abs() < spec.margin || r < spec.margin {
            continue;
        }
        let p = Vec2::from_angle(2.0 * std::f64::consts::PI * b) * r;
        let g = obj.grad(p)?;
        min_norm = min_norm.min(g.norm());
        accepted += 1;
    }
    Ok(min_norm)
}

/// The two estimates of the tangency lemma at index `i`.
#[derive(Debug, Clone, Copy)]
pub struct LemmaEstimates {
    /// `|v_i - (-1)^i x_i/|x_i||`.
    pub e3: f64,
    /// `6 / ln i`, the bound `e3` is checked against.
    pub e3_bound: f64,
    /// Max of `| x_i/|x_i| - y/|y| | / |x_i - y|` over sampled offsets with
    /// `|x_i - y| <= 2^(1-i)`; 0 when every offset collapses onto `x_i` at
    /// f64 resolution.
    pub e4_ratio: f64,
    pub e4_ok: bool,
}

/// Evaluates both estimates at index `i`, sampling `offsets` directions for
/// the second one.
pub fn lemma_estimates(
    seq: &mut CircleSequence,
    i: u64,
    offsets: u32,
) -> Result<LemmaEstimates> {
    let s = seq.step(i)?;
    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
    let e3 = (s.v - s.x.normalized() * sign).norm();
    let e3_bound = 6.0 / (i as f64).ln();
    let radius = support_radius(i);
    let mut worst = 0.0f64;
    for k in 0..offsets {
        let ang = 2.0 * std::f64::consts::PI * k as f64 / offsets as f64;
        let y = s.x + Vec2::from_angle(ang) * radius;
        let d = s.x.dist(y);
        if d == 0.0 {
            continue; // offset below f64 resolution: trivial 0 <= 0
        }
        let lhs = (s.x.normalized() - y.normalized()).norm();
        worst = worst.max(lhs / d);
    }
    Ok(LemmaEstimates {
        e3,
        e3_bound,
        e4_ratio: worst,
        e4_ok: worst <= 3.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::theta;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn x_matches_definition() {
        let mut seq = CircleSequence::new(10).unwrap();
        for i in [10u64, 11, 1000] {
            let x = seq.x(i).unwrap();
            let expect = 1.0 + if i % 2 == 0 { 1.0 } else { -1.0 } / i as f64;
            assert_relative_eq!(x.norm(), expect, max_relative = 1e-14);
            let th = theta(i).unwrap();
            assert_relative_eq!(x.angle(), th, max_relative = 1e-12);
        }
    }

    #[test]
    fn eps_brackets() {
        // The lower bracket 2/(i+1) < eps_i holds exactly (the radial jump
        // alone is 1/i + 1/(i+1)). The claimed upper bracket eps_i < 2/i is
        // false: the exact chord is
        //   eps_i^2 = (1/i + 1/(i+1))^2 + 2 (1 - cos dtheta),
        // (the radii multiply to exactly 1) and the tangential term
        // dtheta^2 ~ 1/(i ln i)^2 outgrows the slack 4/i^3 past i ~ 283.
        // The true upper bound is the intermediate expression
        // 1/i + 1/(i+1) + 1/(i ln i). The acceptance suite checks the literal
        // claim and reports its failure.
        let mut seq = CircleSequence::new(1000).unwrap();
        for i in (1_000u64..100_000).step_by(997) {
            let s = seq.step(i).unwrap();
            let i_f = i as f64;
            assert!(s.eps > 2.0 / (i_f + 1.0), "lower bracket at {i}");
            let true_upper = 1.0 / i_f + 1.0 / (i_f + 1.0) + 1.0 / (i_f * i_f.ln());
            assert!(s.eps < true_upper, "true upper bound at {i}");
            // and the violation of the literal 2/i bound is tiny but real
            assert!(s.eps < (2.0 / i_f) * (1.0 + 0.2 / i_f.ln().powi(2)));
        }
        let s = seq.step(1000).unwrap();
        assert!(s.eps > 2.0 / 1000.0, "literal upper bracket fails at 1000");
    }

    #[test]
    fn f_values_at_landmarks() {
        let obj = CircleObjective::new(1000, 2200).unwrap();
        // away from all bumps f = phi
        assert_abs_diff_eq!(obj.f(Vec2::new(2.0, 0.0)), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(obj.f(Vec2::new(0.0, 0.0)), 1.0, epsilon = 1e-15);
        // at iterates f = 1/i
        for i in [1000u64, 1001, 1057] {
            let x = obj.x(i).unwrap();
            assert_relative_eq!(obj.f(x), 1.0 / i as f64, max_relative = 1e-10);
        }
    }

    #[test]
    fn grad_is_vi_inside_bumps_and_radial_outside() {
        let obj = CircleObjective::new(1000, 1500).unwrap();
        for i in [1000u64, 1100, 1499] {
            let x = obj.x(i).unwrap();
            let g = obj.grad(x).unwrap();
            assert_abs_diff_eq!((g - obj.v(i).unwrap()).norm(), 0.0, epsilon = 1e-15);
        }
        let g = obj.grad(Vec2::new(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!((g - Vec2::new(-1.0, 0.0)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn grad_matches_finite_difference_oracle_off_bumps() {
        let obj = CircleObjective::new(100, 400).unwrap();
        // points in the annulus away from S^1 (generic: outside all bumps)
        for k in 0..200u64 {
            let (a, b) = crate::halton::halton2(k);
            let r = 0.9 + 0.2 * a;
            if (r - 1.0).abs() < 1e-3 {
                continue;
            }
            let p = Vec2::from_angle(2.0 * std::f64::consts::PI * b) * r;
            let g = obj.grad(p).unwrap();
            let h = 1e-7;
            let fd = Vec2::new(
                (obj.f(p + Vec2::new(h, 0.0)) - obj.f(p - Vec2::new(h, 0.0))) / (2.0 * h),
                (obj.f(p + Vec2::new(0.0, h)) - obj.f(p - Vec2::new(0.0, h))) / (2.0 * h),
            );
            assert_abs_diff_eq!((g - fd).norm(), 0.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn grad_matches_finite_difference_inside_wide_bumps() {
        // i0 small enough that transition shells are resolvable
        let obj = CircleObjective::new(12, 40).unwrap();
        for i in [12u64, 15, 20] {
            let x = obj.x(i).unwrap();
            let r_in = support_radius(i) * 0.75; // inside the shell
            for k in 0..8 {
                let ang = k as f64 * 0.785;
                let p = x + Vec2::from_angle(ang) * r_in;
                let g = obj.grad(p).unwrap();
                let h = support_radius(i) * 1e-5;
                let fd = Vec2::new(
                    (obj.f(p + Vec2::new(h, 0.0)) - obj.f(p - Vec2::new(h, 0.0))) / (2.0 * h),
                    (obj.f(p + Vec2::new(0.0, h)) - obj.f(p - Vec2::new(0.0, h))) / (2.0 * h),
                );
                assert_relative_eq!(g.x, fd.x, max_relative = 1e-4, epsilon = 1e-8);
                assert_relative_eq!(g.y, fd.y, max_relative = 1e-4, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn f_continuous_across_bump_boundary() {
        let obj = CircleObjective::new(10, 60).unwrap();
        let mut crossings = 0;
        for i in 10u64..40 {
            let x = obj.x(i).unwrap();
            let r = support_radius(i);
            for k in 0..32 {
                let dir = Vec2::from_angle(k as f64 * 0.19635);
                let inside = obj.f(x + dir * (r * (1.0 - 1e-9)));
                let outside = obj.f(x + dir * (r * (1.0 + 1e-9)));
                assert_abs_diff_eq!(inside, outside, epsilon = 1e-9);
                crossings += 1;
            }
        }
        assert!(crossings >= 960);
    }

    #[test]
    fn clarke_on_circle() {
        let obj = CircleObjective::new(1000, 1100).unwrap();
        let c = obj.clarke(Vec2::new(1.0, 0.0)).unwrap();
        assert_eq!(c.direction, Vec2::new(1.0, 0.0));
        assert_eq!((c.lo, c.hi), (-1.0, 1.0));
        assert!(c.contains_zero());
        let c = obj.clarke(Vec2::new(0.0, 1.0)).unwrap();
        assert_eq!(c.direction, Vec2::new(0.0, 1.0));
        assert!(c.contains_zero());
        assert!(obj.clarke(Vec2::new(1.1, 0.0)).is_err());
    }

    #[test]
    fn grad_errors_on_critical_locus() {
        let obj = CircleObjective::new(1000, 1100).unwrap();
        assert!(obj.grad(Vec2::new(1.0, 0.0)).is_err());
        assert!(obj.grad(Vec2::ZERO).is_err());
    }

    #[test]
    fn verify_step_is_rounding_noise() {
        let obj = CircleObjective::new(1000, 1200).unwrap();
        let mut seq = CircleSequence::new(1000).unwrap();
        assert!(obj.verify_step(&mut seq, 1000).unwrap() <= 1e-12);
        assert!(obj.verify_step(&mut seq, 1199).unwrap() <= 1e-12);
    }

    #[test]
    fn lemma_estimates_hold() {
        let mut seq = CircleSequence::new(1000).unwrap();
        let e = lemma_estimates(&mut seq, 1000, 16).unwrap();
        assert!(e.e3 <= e.e3_bound, "e3 {} > {}", e.e3, e.e3_bound);
        assert!(e.e3_bound < 0.87);
        assert!(e.e4_ok);
        let e = lemma_estimates(&mut seq, 1_000_000, 16).unwrap();
        assert!(e.e3 <= e.e3_bound);
        assert!(e.e3_bound < 0.44);
        // degenerate offsets at huge i still pass
        assert!(e.e4_ok);
        // non-degenerate e4 at small i
        let mut seq = CircleSequence::new(20).unwrap();
        let e = lemma_estimates(&mut seq, 30, 16).unwrap();
        assert!(e.e4_ratio > 0.0 && e.e4_ok);
    }

    #[test]
    fn kl_margin_exceeds_half() {
        let obj = CircleObjective::new(1000, 3000).unwrap();
        let spec = KlSampleSpec {
            samples: 5_000,
            ..KlSampleSpec::default()
        };
        let m = kl_margin(&obj, spec).unwrap();
        assert!(m > 0.5, "margin {m}");
    }

    #[test]
    fn kl_margin_is_one_outside_bumps_and_unit_inside() {
        let obj = CircleObjective::new(1000, 1500).unwrap();
        // away from bumps |grad f| = |grad phi| = 1
        let g = obj.grad(Vec2::new(0.0, 0.7)).unwrap();
        assert_abs_diff_eq!(g.norm(), 1.0, epsilon = 1e-14);
        // inside a bump |grad f| = |v_i| = 1
        let x = obj.x(1200).unwrap();
        assert_abs_diff_eq!(obj.grad(x).unwrap().norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn shell_gradient_degrades_at_small_index() {
        // At probeable indices (wide shells) the KL bound 1/2 genuinely needs
        // "i0 large enough": the transition-shell gradient dips below 1/2.
        let obj = CircleObjective::new(12, 40).unwrap();
        let x = obj.x(14).unwrap();
        let r = support_radius(14) * 0.78;
        let mut min_norm = f64::INFINITY;
        for k in 0..64 {
            let p = x + Vec2::from_angle(k as f64 * 0.0982) * r;
            min_norm = min_norm.min(obj.grad(p).unwrap().norm());
        }
        assert!(min_norm < 1.0);
    }
}
