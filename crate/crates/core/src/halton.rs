//! Low-discrepancy sequences for reproducible sampling.
//!
//! All "random" sampling in checks and experiments comes from here so that
//! identical invocations produce byte-identical outputs without seed
//! management.

/// Van der Corput radical inverse in the given base.
pub fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while n > 0 {
        out += (n % base) as f64 * inv;
        n /= base;
        inv /= b;
    }
    out
}

/// 1D Halton sequence (base 2), `k = 0, 1, ...` mapped into (0, 1).
pub fn halton1(k: u64) -> f64 {
    radical_inverse(k + 1, 2)
}

/// 2D Halton sequence (bases 2 and 3).
pub fn halton2(k: u64) -> (f64, f64) {
    (radical_inverse(k + 1, 2), radical_inverse(k + 1, 3))
}
