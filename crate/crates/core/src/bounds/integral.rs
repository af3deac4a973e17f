//! Cumulative integrals of path functionals on the fBm grid.
//!
//! Within a grid cell the path is linear, so `w . B(r) + c r` is affine in `r`
//! and the integrand `exp(affine) r^{-q}` is integrated exactly where possible:
//! closed form for `q = 0`, a power series on the cell touching the origin,
//! and 8-point Gauss–Legendre elsewhere.

use serde::Serialize;

use super::BoundsError;
use crate::fbm::FbmPathPair;
use crate::quad::{adaptive, gauss_legendre8, Tolerance};

/// `values[k] = int_{times[0]}^{times[k]}`; `values[0] = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cumulative {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Cumulative {
    /// First time the cumulative value reaches `level`, linearly interpolated
    /// between the bracketing nodes.
    pub fn first_crossing(&self, level: f64) -> Option<f64> {
        let j = self.values.iter().position(|&v| v >= level)?;
        if j == 0 {
            return Some(self.times[0]);
        }
        let (v0, v1) = (self.values[j - 1], self.values[j]);
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        let frac = (level - v0) / (v1 - v0);
        Some(t0 + frac * (t1 - t0))
    }

    /// Index of the first node at or above `level`.
    pub fn crossing_index(&self, level: f64) -> Option<usize> {
        self.values.iter().position(|&v| v >= level)
    }

    /// Linear interpolation of the cumulative value, clamped to the ends.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s < t);
        if k == 0 {
            return self.values[0];
        }
        if k == self.times.len() {
            return self.last();
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (t - t0) / (t1 - t0) * (v1 - v0)
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W, label: &str) -> std::io::Result<()> {
        writeln!(out, "t,{label}")?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(out, "{t},{v}")?;
        }
        Ok(())
    }
}

/// Affine exponent `e(a) + slope (r - a)` of `w . B(r) + c r` on grid cell `j`.
#[inline]
pub(crate) fn affine_exponent(
    paths: &FbmPathPair,
    w: [f64; 2],
    c: f64,
    j: usize,
    a: f64,
) -> (f64, f64) {
    let h = paths.grid.step();
    let tj = paths.grid.node(j);
    let d1 = paths.b1[j + 1] - paths.b1[j];
    let d2 = paths.b2[j + 1] - paths.b2[j];
    let u = (a - tj) / h;
    let b1 = paths.b1[j] + u * d1;
    let b2 = paths.b2[j] + u * d2;
    (
        w[0] * b1 + w[1] * b2 + c * a,
        (w[0] * d1 + w[1] * d2) / h + c,
    )
}

/// Iterates the cells of `[t0, t1]` split at grid nodes, accumulating
/// `cell(j, a, b)` and stopping after the first node where the total reaches
/// `stop` (or becomes non-finite).
pub(crate) fn accumulate<F>(
    paths: &FbmPathPair,
    t0: f64,
    t1: f64,
    stop: f64,
    mut cell: F,
) -> Result<Cumulative, BoundsError>
where
    F: FnMut(usize, f64, f64) -> f64,
{
    let grid = paths.grid;
    let horizon = grid.t_end;
    if !(t0 >= 0.0 && t0 < t1 && t1 <= horizon * (1.0 + 1e-12)) {
        return Err(BoundsError::InvalidInterval { t0, t1, horizon });
    }
    let t1 = t1.min(horizon);
    let n = grid.n_steps;
    let mut j = ((t0 / grid.step()).floor() as usize).min(n - 1);
    while j + 1 < n && grid.node(j + 1) <= t0 {
        j += 1;
    }
    let mut times = vec![t0];
    let mut values = vec![0.0];
    let mut total = 0.0;
    let mut a = t0;
    while a < t1 && j < n {
        let b = grid.node(j + 1).min(t1);
        if b > a {
            total += cell(j, a, b);
            times.push(b);
            values.push(total);
            if total >= stop || !total.is_finite() {
                break;
            }
        }
        a = b;
        j += 1;
    }
    Ok(Cumulative { times, values })
}

/// `int_a^b exp(e_a + s (r - a)) r^{-q} dr` for `0 <= a < b`.
pub(crate) fn exp_affine_power(e_a: f64, s: f64, q: f64, a: f64, b: f64) -> f64 {
    let h = b - a;
    if q == 0.0 {
        let x = s * h;
        let rel = if x == 0.0 { 1.0 } else { x.exp_m1() / x };
        return e_a.exp() * h * rel;
    }
    if a == 0.0 {
        let x = s * h;
        if x.abs() <= 30.0 {
            // h^{1-q} sum_k x^k / (k! (k + 1 - q))
            let mut term = 1.0;
            let mut sum = 1.0 / (1.0 - q);
            for k in 1..400 {
                term *= x / k as f64;
                let add = term / (k as f64 + 1.0 - q);
                sum += add;
                if add.abs() <= 1e-17 * sum.abs() {
                    break;
                }
            }
            return e_a.exp() * h.powf(1.0 - q) * sum;
        }
        let r = adaptive(
            |r| (e_a + s * r).exp() * r.powf(-q),
            0.0,
            b,
            Tolerance::new(0.0, 1e-13),
        );
        return r.value;
    }
    gauss_legendre8(|r| (e_a + s * (r - a)).exp() * r.powf(-q), a, b)
}

/// `I(t) = int_{t0}^{t} exp(w . B(r) + c r) r^{-q} dr` at every node of `(t0, t1]`.
pub fn exp_integral(
    paths: &FbmPathPair,
    w: [f64; 2],
    c: f64,
    q: f64,
    t0: f64,
    t1: f64,
) -> Result<Cumulative, BoundsError> {
    exp_integral_until(paths, w, c, q, t0, t1, f64::INFINITY)
}

/// As [`exp_integral`], stopping after the first node where `I >= stop`.
pub fn exp_integral_until(
    paths: &FbmPathPair,
    w: [f64; 2],
    c: f64,
    q: f64,
    t0: f64,
    t1: f64,
    stop: f64,
) -> Result<Cumulative, BoundsError> {
    if t0 == 0.0 && q >= 1.0 {
        return Err(BoundsError::DivergentAtOrigin { q });
    }
    accumulate(paths, t0, t1, stop, |j, a, b| {
        let (e_a, s) = affine_exponent(paths, w, c, j, a);
        exp_affine_power(e_a, s, q, a, b)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{sample_fbm_pair, TimeGrid};

    fn zeros(t_end: f64, n: usize) -> FbmPathPair {
        FbmPathPair::zeros(TimeGrid::new(t_end, n).unwrap(), 0.75)
    }

    #[test]
    fn square_root_closed_form() {
        let p = zeros(1.0, 100);
        let c = exp_integral(&p, [1.0, 1.0], 0.0, 0.5, 0.0, 1.0).unwrap();
        assert_eq!(c.times.len(), 101);
        for (t, v) in c.times.iter().zip(&c.values) {
            assert!((v - 2.0 * t.sqrt()).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn exponential_closed_form() {
        let p = zeros(1.0, 50);
        let c = exp_integral(&p, [0.3, -2.0], 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!((c.last() - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn divergent_weight_is_rejected() {
        let p = zeros(1.0, 10);
        assert_eq!(
            exp_integral(&p, [1.0, 1.0], 0.0, 1.0, 0.0, 1.0),
            Err(BoundsError::DivergentAtOrigin { q: 1.0 })
        );
        // away from the origin the same weight is fine
        let c = exp_integral(&p, [1.0, 1.0], 0.0, 1.0, 0.25, 1.0).unwrap();
        assert!((c.last() - 4f64.ln()).abs() < 1e-10);
        assert_eq!(c.times[0], 0.25);
        assert_eq!(c.times[1], 0.3);
    }

    #[test]
    fn off_grid_interval_ends() {
        let p = zeros(2.0, 20);
        let c = exp_integral(&p, [0.0, 0.0], 0.0, 0.0, 0.05, 1.234).unwrap();
        assert_eq!(*c.times.last().unwrap(), 1.234);
        assert!((c.last() - (1.234 - 0.05)).abs() < 1e-14);
    }

    #[test]
    fn origin_series_matches_adaptive_quadrature() {
        let (e_a, s, q, h) = (0.2, -3.7, 0.6, 0.4);
        let series = exp_affine_power(e_a, s, q, 0.0, h);
        let direct = adaptive(
            |r| (e_a + s * r).exp() * r.powf(-q),
            0.0,
            h,
            Tolerance::new(0.0, 1e-14),
        );
        assert!((series - direct.value).abs() < 1e-12);
    }

    #[test]
    fn random_path_matches_fine_quadrature() {
        let g = TimeGrid::new(1.0, 64).unwrap();
        let p = sample_fbm_pair(0.7, g, 5).unwrap();
        let w = [0.8, -0.4];
        let c = exp_integral(&p, w, 0.5, 0.3, 0.0, 1.0).unwrap();
        let f = |r: f64| {
            let (b1, b2) = p.value_at(r);
            (w[0] * b1 + w[1] * b2 + 0.5 * r).exp() * r.powf(-0.3)
        };
        let mut reference = 0.0;
        for k in 0..64 {
            let (a, b) = (g.node(k), g.node(k + 1));
            reference += adaptive(f, a, b, Tolerance::new(0.0, 1e-13)).value;
        }
        assert!((c.last() - reference).abs() < 1e-10 * reference);
    }

    #[test]
    fn crossing_interpolates_linearly() {
        let c = Cumulative {
            times: vec![0.0, 1.0, 2.0],
            values: vec![0.0, 1.0, 3.0],
        };
        assert_eq!(c.first_crossing(2.0), Some(1.5));
        assert_eq!(c.first_crossing(0.0), Some(0.0));
        assert_eq!(c.first_crossing(3.5), None);
        assert_eq!(c.value_at(1.5), 2.0);
        assert_eq!(c.value_at(-1.0), 0.0);
        assert_eq!(c.value_at(9.0), 3.0);
    }
}
