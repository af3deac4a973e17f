//! Radial Fourier inversion of `exp(-|u|^alpha)`.
//!
//! For `nu = d/2 - 1`,
//! `p_d(r) = (2 pi)^{-d/2} r^{-nu} int_0^inf exp(-s^alpha) s^{d/2} J_nu(r s) ds`.
//! The integrand is integrated panel by panel between consecutive zeros of
//! `J_nu(r s)`. The panel sums alternate, so Wynn's epsilon algorithm is
//! applied when many panels are needed.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, gamma_ur};

use super::StableError;
use crate::quad::{adaptive, wynn_epsilon, Tolerance};
use crate::special::{bessel_j, BesselOrder};

/// Bound on the neglected tail of every inversion integral.
pub(crate) const TAIL_TOL: f64 = 1e-13;
const PANEL_TOL: Tolerance = Tolerance::new(1e-17, 1e-13);
const DIRECT_PANELS: usize = 64;
const MAX_PANELS: usize = 200_000;
const WYNN_WINDOW: usize = 24;

pub(crate) struct Inverter {
    alpha: f64,
    d: usize,
    order: BesselOrder,
    /// `(2 pi)^{-d/2}`
    norm: f64,
    /// Cut-off `S` with `int_S^inf |integrand| ds <= TAIL_TOL` for every `r`.
    s_tail: f64,
}

impl Inverter {
    pub(crate) fn new(alpha: f64, d: usize) -> Self {
        let order = BesselOrder::for_dimension(d);
        let norm = (2.0 * PI).powf(-(d as f64) / 2.0);
        Self {
            alpha,
            d,
            order,
            norm,
            s_tail: tail_cutoff(alpha, d),
        }
    }

    /// `p(1, 0)` by quadrature of the radial moment, independent of the
    /// closed form.
    pub(crate) fn origin(&self) -> Result<f64, StableError> {
        let d = self.d as f64;
        let alpha = self.alpha;
        let f = |s: f64| (-s.powf(alpha)).exp() * s.powi(self.d as i32 - 1);
        // geometric panels keep the cusp of exp(-s^alpha) at 0 resolved
        let mut total = 0.0;
        let mut a = 0.0;
        let mut b = 1e-3_f64.min(self.s_tail);
        while a < self.s_tail {
            let r = adaptive(f, a, b, PANEL_TOL);
            if !r.converged {
                return Err(StableError::QuadratureNonConvergence {
                    r: 0.0,
                    detail: format!("origin panel [{a}, {b}] error {:e}", r.error),
                });
            }
            total += r.value;
            a = b;
            b = (2.0 * b).min(self.s_tail);
        }
        Ok(self.norm * 2f64.powf(1.0 - d / 2.0) / gamma(d / 2.0) * total)
    }

    /// `p(1, r)` for `r > 0`.
    pub(crate) fn at(&self, r: f64) -> Result<f64, StableError> {
        debug_assert!(r > 0.0);
        let alpha = self.alpha;
        let integrand: Box<dyn Fn(f64) -> f64> = if self.order.is_half_integer()
            && self.order.nu() < 0.0
        {
            // d = 1: cosine transform, avoids the s = 0 singularity of J_{-1/2}
            Box::new(move |s: f64| (-s.powf(alpha)).exp() * (r * s).cos() * (2.0 / PI).sqrt())
        } else {
            let order = self.order;
            let half_d = self.d as f64 / 2.0;
            Box::new(move |s: f64| (-s.powf(alpha)).exp() * s.powf(half_d) * bessel_j(order, r * s))
        };
        // d = 1: s^{1/2} J_{-1/2}(r s) = sqrt(2 / (pi r)) cos(r s), the r powers cancel
        let scale = if self.d == 1 {
            self.norm
        } else {
            self.norm * r.powf(-self.order.nu())
        };

        let panels_needed = (self.s_tail * r / PI).ceil() as usize + 1;
        let use_wynn = panels_needed > DIRECT_PANELS;
        let mut sums: Vec<f64> = Vec::new();
        let mut total = 0.0;
        let mut a = 0.0;
        let mut last_est = f64::NAN;
        let mut stable_hits = 0;
        for k in 1..=MAX_PANELS {
            let b = (self.zero(k) / r).min(self.s_tail);
            let res = adaptive(&integrand, a, b, PANEL_TOL);
            if !res.converged {
                return Err(StableError::QuadratureNonConvergence {
                    r,
                    detail: format!("panel [{a}, {b}] error {:e}", res.error),
                });
            }
            total += res.value;
            if b >= self.s_tail {
                return Ok(scale * total);
            }
            a = b;
            if use_wynn {
                sums.push(total);
                if sums.len() > WYNN_WINDOW {
                    sums.remove(0);
                }
                if sums.len() >= 8 {
                    let (est, _) = wynn_epsilon(&sums);
                    if (est - last_est).abs() <= 1e-16 + 1e-13 * est.abs() {
                        stable_hits += 1;
                        if stable_hits >= 3 {
                            return Ok(scale * est);
                        }
                    } else {
                        stable_hits = 0;
                    }
                    last_est = est;
                }
            }
        }
        Err(StableError::QuadratureNonConvergence {
            r,
            detail: format!("no convergence after {MAX_PANELS} panels"),
        })
    }

    /// McMahon approximation of the `k`-th positive zero of `J_nu`.
    fn zero(&self, k: usize) -> f64 {
        let nu = self.order.nu();
        let beta = (k as f64 + nu / 2.0 - 0.25) * PI;
        beta - (4.0 * nu * nu - 1.0) / (8.0 * beta)
    }
}

/// Smallest `S` (up to bisection accuracy) with
/// `p(1,0) * Q(d/alpha, S^alpha) <= TAIL_TOL`.
fn tail_cutoff(alpha: f64, d: usize) -> f64 {
    let a = d as f64 / alpha;
    let p10 = super::p_unit_origin(alpha, d);
    let tail = |x: f64| p10 * gamma_ur(a, x);
    let (mut lo, mut hi) = (0.0_f64, 64.0_f64);
    while tail(hi) > TAIL_TOL {
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > TAIL_TOL {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.powf(1.0 / alpha)
}
