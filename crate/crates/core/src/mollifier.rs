//! The radial bump used to blend linear models into the base objectives.

use crate::vec2::Vec2;

/// Smooth bridge `g(t) = exp(-1/t)` for `t > 0`, else 0.
fn bridge(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// `g'(t) = exp(-1/t)/t^2` for `t > 0`, else 0.
fn bridge_deriv(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp() / (t * t)
    } else {
        0.0
    }
}

/// A C-infinity radially symmetric bump: 1 on the closed unit ball, 0 outside
/// radius 2, strictly decreasing in between.
///
/// The profile on `[1, 2]` is the standard quotient
/// `g(2 - r) / (g(2 - r) + g(r - 1))` with `g(t) = exp(-1/t)`; any profile
/// meeting the qualitative constraints would do, this one is fixed for
/// determinism.
#[derive(Debug, Clone, Copy)]
pub struct Mollifier;

impl Mollifier {
    pub const INNER_RADIUS: f64 = 1.0;
    pub const OUTER_RADIUS: f64 = 2.0;

    /// Profile value at radius `r`.
    pub fn profile(r: f64) -> f64 {
        if r <= Self::INNER_RADIUS {
            1.0
        } else if r >= Self::OUTER_RADIUS {
            0.0
        } else {
            let u = bridge(2.0 - r);
            let v = bridge(r - 1.0);
            u / (u + v)
        }
    }

    /// Radial derivative of the profile at radius `r` (non-positive).
    pub fn profile_deriv(r: f64) -> f64 {
        if r <= Self::INNER_RADIUS || r >= Self::OUTER_RADIUS {
            0.0
        } else {
            let u = bridge(2.0 - r);
            let v = bridge(r - 1.0);
            let du = -bridge_deriv(2.0 - r);
            let dv = bridge_deriv(r - 1.0);
            (du * v - u * dv) / ((u + v) * (u + v))
        }
    }

    /// `psi(p)`.
    pub fn eval(p: Vec2) -> f64 {
        Self::profile(p.norm())
    }

    /// `grad psi(p)`; zero on the plateau and outside the support.
    pub fn grad(p: Vec2) -> Vec2 {
        let r = p.norm();
        if r <= Self::INNER_RADIUS || r >= Self::OUTER_RADIUS {
            return Vec2::ZERO;
        }
        p * (Self::profile_deriv(r) / r)
    }

    /// Numerically measured `lip(psi)` (max |profile'|), fixed from the
    /// profile choice. Used in analytic bound reporting only.
    pub fn lip() -> f64 {
        // max of |profile_deriv| over a fine grid; the profile is fixed so
        // this is a constant of the crate.
        let mut m: f64 = 0.0;
        for k in 0..=4000 {
            let r = 1.0 + k as f64 / 4000.0;
            m = m.max(Self::profile_deriv(r).abs());
        }
        m
    }

    /// Numerically measured `lip(grad psi)` over sampled pairs.
    pub fn lip_grad() -> f64 {
        let mut m: f64 = 0.0;
        let mut prev_r = 0.5;
        let mut prev = Self::profile_deriv(prev_r);
        for k in 1..=6000 {
            let r = 0.5 + 2.0 * k as f64 / 6000.0;
            let d = Self::profile_deriv(r);
            m = m.max(((d - prev) / (r - prev_r)).abs());
            prev = d;
            prev_r = r;
        }
        m
    }
}

/// A translated and rescaled bump `psi(scale * (x - center))`: value 1 on the
/// ball of radius `1/scale`, support of radius `2/scale`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledBump {
    pub center: Vec2,
    pub scale: f64,
}

impl ScaledBump {
    pub fn new(center: Vec2, scale: f64) -> Self {
        ScaledBump { center, scale }
    }

    pub fn inner_radius(&self) -> f64 {
        1.0 / self.scale
    }

    pub fn support_radius(&self) -> f64 {
        2.0 / self.scale
    }

    pub fn eval(&self, p: Vec2) -> f64 {
        Mollifier::eval((p - self.center) * self.scale)
    }

    pub fn grad(&self, p: Vec2) -> Vec2 {
        Mollifier::grad((p - self.center) * self.scale) * self.scale
    }

    /// Membership in the open support ball, robust to an underflowed radius:
    /// the center itself always counts as inside.
    pub fn contains(&self, p: Vec2) -> bool {
        let d = p.dist(self.center);
        d == 0.0 || d < self.support_radius()
    }
}
