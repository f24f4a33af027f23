//! Numerical constructions of pathological subgradient dynamics in the plane.
//!
//! Two explicit counterexamples for the vanishing-stepsize subgradient method
//! are built and verified here:
//!
//! * a **circle example**: a sequence spiraling around the unit circle that is
//!   a genuine subgradient sequence of an objective satisfying a
//!   Kurdyka-Lojasiewicz inequality, yet never converges, together with its
//!   limiting occupation measures, and
//! * a **fractal example**: a staircase-like objective whose iterates
//!   accumulate on a self-similar curve of non-integer box dimension, with a
//!   constrained step generator exhibiting non-vanishing oscillation along a
//!   connecting curve.
//!
//! The crate is organized around small immutable value types; every operation
//! is pure and deterministic (sampling uses low-discrepancy sequences, never
//! a seeded RNG).

pub mod circle;
pub mod error;
pub mod fractal;
pub mod halton;
pub mod interpolant;
pub mod loops;
pub mod measures;
pub mod mollifier;
pub mod segment;
pub mod series;
pub mod vec2;

pub use error::Error;
pub use vec2::Vec2;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
