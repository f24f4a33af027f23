//! Slowly divergent series over enormous index ranges.
//!
//! The circle construction needs partial sums of `1/(k log k)` and `1/k` up to
//! indices like `exp(535)` that can never be materialized. Below a cutoff the
//! sums are accumulated directly with compensated arithmetic; above it they
//! are evaluated through [`LogIndex`] endpoints with an Euler-Maclaurin
//! integral-plus-trapezoid formula.

use crate::error::Error;
use crate::Result;

/// Largest index that direct summation loops are allowed to touch.
pub const MATERIALIZATION_CUTOFF: u64 = 10_000_000;

/// Neumaier-compensated accumulator.
///
/// The sums here add ~1e7 terms of size ~1e-8; naive accumulation loses the
/// low digits that the verification tolerances depend on.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Sums `f(k)` for `k` in `lo..=hi` with compensation.
pub fn compensated_sum(lo: u64, hi: u64, f: impl Fn(u64) -> f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for k in lo..=hi {
        acc.add(f(k));
    }
    acc.value()
}

/// The angle series `theta(i) = sum_{k=2}^{i} 1/(k ln k)`.
///
/// Direct compensated summation; `i` must stay at or below the
/// materialization cutoff.
pub fn theta(i: u64) -> Result<f64> {
    if i < 2 {
        return Err(Error::domain(format!("theta requires i >= 2, got {i}")));
    }
    if i > MATERIALIZATION_CUTOFF {
        return Err(Error::domain(format!(
            "theta({i}) exceeds the materialization cutoff; use theta_log"
        )));
    }
    Ok(compensated_sum(2, i, |k| {
        let k = k as f64;
        1.0 / (k * k.ln())
    }))
}

/// Incremental generator for `theta(i)`, `i = 2, 3, ...`, amortized O(1)
/// per step. `next()` returns `(i, theta(i))`.
#[derive(Debug, Clone)]
pub struct ThetaIter {
    i: u64,
    acc: CompensatedSum,
}

impl ThetaIter {
    /// Starts so that the first `next()` yields `(2, theta(2))`.
    pub fn new() -> Self {
        ThetaIter {
            i: 1,
            acc: CompensatedSum::new(),
        }
    }
}

impl Default for ThetaIter {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for ThetaIter {
    type Item = (u64, f64);

    fn next(&mut self) -> Option<(u64, f64)> {
        self.i += 1;
        let k = self.i as f64;
        self.acc.add(1.0 / (k * k.ln()));
        Some((self.i, self.acc.value()))
    }
}

/// A positive index carried as its natural logarithm.
///
/// Arithmetic on huge visit windows like `[m0^(e^(2 pi k)), m0^(e^(a+2 pi k))]`
/// only ever multiplies logs by exponentials; the underlying integer is never
/// materialized.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogIndex {
    log_value: f64,
}

impl LogIndex {
    pub fn from_log(log_value: f64) -> Result<Self> {
        if !(log_value >= 0.0 && log_value.is_finite()) {
            return Err(Error::domain(format!(
                "LogIndex requires a finite log >= 0, got {log_value}"
            )));
        }
        Ok(LogIndex { log_value })
    }

    pub fn from_index(i: u64) -> Self {
        LogIndex {
            log_value: (i as f64).ln(),
        }
    }

    pub fn log(self) -> f64 {
        self.log_value
    }

    /// `self^(e^t)`: multiplies the stored log by `e^t`.
    pub fn pow_exp(self, t: f64) -> Self {
        LogIndex {
            log_value: self.log_value * t.exp(),
        }
    }
}

/// Which series a [`log_range_sum`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// `sum 1/k`
    Harmonic,
    /// `sum 1/(k ln k)`
    LogHarmonic,
}

fn term(kind: SeriesKind, log_k: f64) -> f64 {
    match kind {
        // e^-t underflows to 0 for t > ~745, which is the correct limit here.
        SeriesKind::Harmonic => (-log_k).exp(),
        SeriesKind::LogHarmonic => (-log_k).exp() / log_k,
    }
}

fn integral(kind: SeriesKind, log_lo: f64, log_hi: f64) -> f64 {
    match kind {
        // int dx/x = log x
        SeriesKind::Harmonic => log_hi - log_lo,
        // int dx/(x log x) = log log x
        SeriesKind::LogHarmonic => log_hi.ln() - log_lo.ln(),
    }
}

/// Sum of the chosen series over the integer range `[from, to]` given as
/// `LogIndex` endpoints: closed-form integral plus the trapezoid endpoint
/// correction. Relative error is below 1e-6 for ranges starting above 1e3.
pub fn log_range_sum(kind: SeriesKind, from: LogIndex, to: LogIndex) -> Result<f64> {
    let (lo, hi) = (from.log(), to.log());
    if lo > hi {
        return Err(Error::domain(format!(
            "log_range_sum: reversed range ({lo} > {hi})"
        )));
    }
    if lo == hi {
        // Singleton range: the single term.
        return Ok(term(kind, lo));
    }
    Ok(integral(kind, lo, hi) + 0.5 * (term(kind, lo) + term(kind, hi)))
}

/// `theta` continued past the materialization cutoff by Euler-Maclaurin from
/// a materialized anchor.
pub fn theta_log(i: LogIndex) -> Result<f64> {
    let anchor = 100_000u64;
    if i.log() <= (anchor as f64).ln() {
        return theta(i.log().exp().round() as u64);
    }
    let base = theta(anchor)?;
    let tail = log_range_sum(
        SeriesKind::LogHarmonic,
        LogIndex::from_index(anchor + 1),
        i,
    )?;
    Ok(base + tail)
}
