//! Order statistics and binomial confidence intervals.

use statrs::distribution::{ContinuousCDF, Normal};

pub const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// Linearly interpolated sample quantile of sorted data (`+inf` allowed).
pub fn quantile_sorted(sorted: &[f64], level: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = level * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let (a, b) = (sorted[lo], sorted[hi]);
    if lo == hi || a == b || b.is_infinite() {
        // an infinite neighbour makes any interpolated value infinite
        return if pos == lo as f64 { a } else { b };
    }
    a + (pos - lo as f64) * (b - a)
}

/// Two-sided standard normal quantile for confidence `level`.
pub fn z_value(level: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + level / 2.0)
}

/// Wilson score interval for `k` successes in `n` trials, clipped to `[0, 1]`.
pub fn wilson(k: usize, n: usize, level: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let z = z_value(level);
    let z2 = z * z;
    let p = k / n;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if k == 0.0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if k == n {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    // guard against rounding pushing the bounds past the point estimate
    (lo.min(p), hi.max(p))
}
