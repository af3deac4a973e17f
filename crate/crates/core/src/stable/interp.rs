//! Monotone cubic Hermite interpolation on a uniform radial grid and the
//! analytic tail beyond it.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

const SERIES_TERMS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail {
    /// `amplitude * sum_k ratios[k] r^{-d-(k+1) alpha}`: the large-`r`
    /// expansion of the stable density with its amplitude refitted.
    Series {
        amplitude: f64,
        ratios: [f64; SERIES_TERMS],
    },
    /// `exp(a - b r^2)`
    Gaussian { a: f64, b: f64 },
}

/// Coefficient of `r^{-d-k alpha}` in the asymptotic expansion of `p(1, r)`.
pub fn series_coefficient(alpha: f64, d: usize, k: usize) -> f64 {
    let (kf, df) = (k as f64, d as f64);
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    let log_mag = kf * alpha * std::f64::consts::LN_2
        - (df / 2.0 + 1.0) * std::f64::consts::PI.ln()
        + ln_gamma((kf * alpha + df) / 2.0)
        + ln_gamma(kf * alpha / 2.0 + 1.0)
        - ln_gamma(kf + 1.0);
    sign * log_mag.exp() * (std::f64::consts::PI * kf * alpha / 2.0).sin()
}

impl Tail {
    /// Gaussian tail through the last two nodes at `alpha = 2`; otherwise the
    /// truncated series scaled to match `p_last` at `r_last`.
    pub fn fit(alpha: f64, d: usize, r1: f64, p1: f64, r2: f64, p2: f64) -> Self {
        if alpha == 2.0 {
            let b = (p1.ln() - p2.ln()) / (r2 * r2 - r1 * r1);
            return Tail::Gaussian {
                a: p2.ln() + b * r2 * r2,
                b,
            };
        }
        let c1 = series_coefficient(alpha, d, 1);
        let mut ratios = [0.0; SERIES_TERMS];
        for (k, r) in ratios.iter_mut().enumerate() {
            *r = series_coefficient(alpha, d, k + 1) / c1;
        }
        let shape = Self::Series {
            amplitude: 1.0,
            ratios,
        };
        let unit = shape.eval(alpha, d, r2);
        let amplitude = if unit > 0.0 { p2 / unit } else { c1 };
        Self::Series { amplitude, ratios }
    }

    pub fn eval(&self, alpha: f64, d: usize, r: f64) -> f64 {
        match *self {
            Tail::Series { amplitude, ratios } => {
                let base = r.powf(-(d as f64));
                let step = r.powf(-alpha);
                let mut pow = step;
                let mut s = 0.0;
                for c in ratios {
                    s += c * pow;
                    pow *= step;
                }
                amplitude * base * s
            }
            Tail::Gaussian { a, b } => (a - b * r * r).exp(),
        }
    }

    /// `int_R^inf tail(r) r^{d-1} dr` for the series form.
    pub fn radial_mass(&self, alpha: f64, r: f64) -> Option<f64> {
        match *self {
            Tail::Series { amplitude, ratios } => Some(
                amplitude
                    * ratios
                        .iter()
                        .enumerate()
                        .map(|(k, c)| {
                            let e = (k + 1) as f64 * alpha;
                            c * r.powf(-e) / e
                        })
                        .sum::<f64>(),
            ),
            Tail::Gaussian { .. } => None,
        }
    }
}

/// Clamps Hermite slopes so each cell interpolant is monotone
/// (Fritsch–Carlson).
pub fn limit_slopes(values: &[f64], slopes: &mut [f64], h: f64) {
    for j in 0..values.len() - 1 {
        let delta = (values[j + 1] - values[j]) / h;
        if delta == 0.0 {
            slopes[j] = 0.0;
            slopes[j + 1] = 0.0;
            continue;
        }
        let mut a = slopes[j] / delta;
        let mut b = slopes[j + 1] / delta;
        if a < 0.0 {
            slopes[j] = 0.0;
            a = 0.0;
        }
        if b < 0.0 {
            slopes[j + 1] = 0.0;
            b = 0.0;
        }
        let s = a * a + b * b;
        if s > 9.0 + 1e-9 {
            let tau = 3.0 / s.sqrt();
            slopes[j] = tau * a * delta;
            slopes[j + 1] = tau * b * delta;
        }
    }
}

/// Cubic Hermite interpolant on the cell `[x0, x0 + h]` at `x0 + u h`.
#[inline]
pub fn hermite(p0: f64, p1: f64, m0: f64, m1: f64, h: f64, u: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    h00 * p0 + h10 * h * m0 + h01 * p1 + h11 * h * m1
}
