//! Quadrature primitives shared by the density, semigroup and path-functional code.
//!
//! * [`adaptive`] is a global adaptive Gauss–Kronrod (7/15) integrator in the
//!   style of QUADPACK's QAG: the interval with the largest error estimate is
//!   bisected until the summed error meets the tolerance.
//! * [`gauss_legendre8`] is a fixed 8-point rule used on grid cells where the
//!   integrand is smooth.
//! * [`wynn_epsilon`] accelerates partial sums of oscillatory tails.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_26,
];

/// Outcome of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Tolerances and work limit for [`adaptive`].
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 2000,
        }
    }

    pub const fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }
}

/// One application of the 15-point Kronrod rule with the embedded 7-point
/// Gauss rule. Returns (kronrod, |kronrod - gauss|).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += w * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

#[derive(Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

/// Global adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Integrable endpoint singularities are handled by repeated bisection; the
/// nodes never touch the endpoints.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    let (value, error) = gk15(&mut f, a, b);
    let mut evaluations = 15;
    let mut total = value;
    let mut total_err = error;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });

    while total_err > tol.abs.max(tol.rel * total.abs()) {
        if heap.len() >= tol.max_intervals {
            return QuadResult {
                value: total,
                error: total_err,
                evaluations,
                converged: false,
            };
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in floating point
            heap.push(worst);
            return QuadResult {
                value: total,
                error: total_err,
                evaluations,
                converged: false,
            };
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed the drift accumulated by the running updates.
    let (mut sum, mut err) = (0.0, 0.0);
    for p in heap.iter() {
        sum += p.value;
        err += p.error;
    }
    QuadResult {
        value: sum,
        error: err,
        evaluations,
        converged: true,
    }
}

/// Fixed 8-point Gauss–Legendre rule on `[a, b]`.
#[inline]
pub fn gauss_legendre8<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for (&x, &w) in GL8_X.iter().zip(GL8_W.iter()) {
        s += w * (f(c - h * x) + f(c + h * x));
    }
    s * h
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums.
///
/// Returns the highest-order even-column estimate together with the
/// difference to the previous even-column estimate (a crude error proxy).
pub fn wynn_epsilon(sums: &[f64]) -> (f64, f64) {
    let n = sums.len();
    match n {
        0 => return (0.0, f64::INFINITY),
        1 => return (sums[0], f64::INFINITY),
        2 => return (sums[1], (sums[1] - sums[0]).abs()),
        _ => {}
    }
    let mut prev2 = vec![0.0; n];
    let mut prev1 = sums.to_vec();
    let mut best = sums[n - 1];
    let mut best_err = (sums[n - 1] - sums[n - 2]).abs();
    for k in 1..n {
        let len = prev1.len() - 1;
        if len == 0 {
            break;
        }
        let mut cur = Vec::with_capacity(len);
        for j in 0..len {
            let diff = prev1[j + 1] - prev1[j];
            if diff == 0.0 || !diff.is_finite() {
                // sequence converged at this column
                return (best, best_err);
            }
            cur.push(prev2[j + 1] + 1.0 / diff);
        }
        if k % 2 == 0 {
            let est = cur[len - 1];
            if !est.is_finite() {
                break;
            }
            best_err = if len >= 2 {
                (est - cur[len - 2]).abs()
            } else {
                (est - best).abs()
            };
            best = est;
        }
        prev2 = prev1;
        prev1 = cur;
    }
    (best, best_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk15_is_exact_for_polynomials() {
        let mut f = |x: f64| x.powi(9) - 3.0 * x.powi(4) + 1.0;
        let (v, _) = gk15(&mut f, -1.0, 2.0);
        let exact = (2f64.powi(10) - 1.0) / 10.0 - 3.0 * (32.0 + 1.0) / 5.0 + 3.0;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = adaptive(|x| x.powf(-0.5), 0.0, 1.0, Tolerance::new(1e-10, 1e-12));
        assert!(r.converged);
        assert!((r.value - 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn gl8_integrates_exponential() {
        let v = gauss_legendre8(f64::exp, 0.0, 1.0);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // ln 2 = 1 - 1/2 + 1/3 - ...
        let mut sums = Vec::new();
        let mut s = 0.0;
        for k in 1..=15 {
            s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            sums.push(s);
        }
        let (est, _) = wynn_epsilon(&sums);
        assert!((est - 2f64.ln()).abs() < 1e-10, "{est}");
        assert!((s - 2f64.ln()).abs() > 1e-2);
    }
}
