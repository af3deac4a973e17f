//! Upper bounds: the `theta` crossing times and the chained `tau_upper`.
//!
//! Both kernels share the path factor `exp(w . B(s))`, so on a grid cell
//! `min{g12, g21} = exp(affine) * min{a1 e^{k12 s} s^{-q1}, a2 e^{k21 s} s^{-q2}}`.

use serde::{Deserialize, Serialize};

use super::integral::{accumulate, affine_exponent, Cumulative};
use super::{BoundsContext, BoundsError, StoppingTime};
use crate::fbm::FbmPathPair;
use crate::model::{DerivedConstants, ModelParams};
use crate::quad::gauss_legendre8;

/// Deterministic part of `g_ij` for one index: `a e^{k s} s^{-q}`.
#[derive(Clone, Copy, Debug)]
struct KernelPart {
    amplitude: f64,
    k: f64,
    q: f64,
}

impl KernelPart {
    fn new(params: &ModelParams, derived: &DerivedConstants, i: usize) -> Self {
        let d_over_alpha = params.d as f64 / params.alpha;
        Self {
            amplitude: 2f64.powf(-d_over_alpha * (1.0 + params.beta(i))),
            k: [derived.k12_drift, derived.k21_drift][i],
            q: params.singularity(i),
        }
    }

    #[inline]
    fn eval(&self, s: f64) -> f64 {
        self.amplitude * (self.k * s).exp() * s.powf(-self.q)
    }
}

/// `g_{12}` (`i = 0`) or `g_{21}` (`i = 1`) at time `s`, with path exponent
/// weights `w` (the shared `rho` under the coupling condition).
pub fn g_ij(
    s: f64,
    paths: &FbmPathPair,
    params: &ModelParams,
    derived: &DerivedConstants,
    i: usize,
    w: [f64; 2],
) -> Result<f64, BoundsError> {
    if !(s > 0.0) {
        return Err(BoundsError::NonpositiveTime(s));
    }
    let (b1, b2) = paths.value_at(s);
    Ok(KernelPart::new(params, derived, i).eval(s) * (w[0] * b1 + w[1] * b2).exp())
}

/// Cumulative `int_{r0}^t min{g12, g21} ds` at the grid nodes past `r0`,
/// stopping once it reaches `stop`.
pub fn min_kernel_integral(
    paths: &FbmPathPair,
    params: &ModelParams,
    derived: &DerivedConstants,
    w: [f64; 2],
    r0: f64,
    stop: f64,
) -> Result<Cumulative, BoundsError> {
    if !(r0 > 0.0) {
        return Err(BoundsError::NonpositiveTime(r0));
    }
    let g12 = KernelPart::new(params, derived, 0);
    let g21 = KernelPart::new(params, derived, 1);
    accumulate(paths, r0, paths.grid.t_end, stop, |j, a, b| {
        let (e_a, slope) = affine_exponent(paths, w, 0.0, j, a);
        gauss_legendre8(
            |s| (e_a + slope * (s - a)).exp() * g12.eval(s).min(g21.eval(s)),
            a,
            b,
        )
    })
}

/// Crossing of the min-kernel integral from `r0` against `threshold`.
fn theta_crossing(
    paths: &FbmPathPair,
    params: &ModelParams,
    derived: &DerivedConstants,
    w: [f64; 2],
    r0: f64,
    threshold: Option<f64>,
) -> Result<StoppingTime, BoundsError> {
    let Some(thr) = threshold else {
        return Ok(StoppingTime::NotReached);
    };
    if r0 >= paths.grid.t_end {
        return Ok(StoppingTime::NotReached);
    }
    let cum = min_kernel_integral(paths, params, derived, w, r0, thr)?;
    Ok(StoppingTime::from_option(cum.first_crossing(thr)))
}

/// `2^{1+beta} / (beta E0^beta)` for equal exponents.
pub fn theta_one_threshold(beta: f64, e0: f64) -> f64 {
    2f64.powf(1.0 + beta) / (beta * e0.powf(beta))
}

/// Threshold for `beta1 > beta2`; `None` when the bracket is not positive
/// (no finite crossing level).
pub fn theta_two_threshold(beta1: f64, beta2: f64, e0: f64, eps0: f64, d1: f64) -> Option<f64> {
    let bracket = eps0 / 2f64.powf(1.0 + beta2)
        - eps0.powf((1.0 + beta1) / (beta1 - beta2)) * d1 / e0.powf(1.0 + beta2);
    (bracket > 0.0).then(|| 1.0 / (beta2 * e0.powf(beta2) * bracket))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonZero {
    pub value: f64,
    pub nca4_ok: bool,
}

/// Smallness parameter for unequal exponents and whether the smallness
/// condition holds. `h1` is `r1 exp(-N1 r0)`.
pub fn epsilon_zero(
    params: &ModelParams,
    derived: &DerivedConstants,
    e0: f64,
    h1: f64,
) -> Result<EpsilonZero, BoundsError> {
    let (b1, b2) = (params.beta1, params.beta2);
    if b1 == b2 {
        return Err(BoundsError::EqualBetas);
    }
    if b1 < b2 {
        return Err(BoundsError::BetaOrder);
    }
    let d1 = derived.d1.expect("beta1 > beta2");
    let gap = b1 - b2;
    let scale = 2f64.powf(-(1.0 + b2)) * e0.powf(1.0 + b2);
    let from_h1 = (h1 / d1.powf(1.0 / (1.0 + b2))).powf(gap);
    let from_e0 = (scale / d1).powf(gap / (1.0 + b1));
    let value = 1f64.min(from_h1).min(from_e0);
    let nca4_ok = scale * value >= value.powf((1.0 + b1) / gap) * d1;
    Ok(EpsilonZero { value, nca4_ok })
}

/// Upper-bound crossing for `beta1 = beta2` under the coupling condition.
pub fn theta_one(
    paths: &FbmPathPair,
    params: &ModelParams,
    derived: &DerivedConstants,
    ctx: &BoundsContext,
) -> Result<StoppingTime, BoundsError> {
    if params.beta1 != params.beta2 {
        return Err(BoundsError::UnequalBetas);
    }
    if !derived.coupling_ok {
        return Err(BoundsError::CouplingViolated);
    }
    let thr = theta_one_threshold(params.beta1, ctx.e0);
    theta_crossing(paths, params, derived, derived.rho(), ctx.r0, Some(thr))
}

fn unequal_threshold(
    params: &ModelParams,
    derived: &DerivedConstants,
    ctx: &BoundsContext,
) -> Result<Option<f64>, BoundsError> {
    if params.beta1 < params.beta2 {
        return Err(BoundsError::BetaOrder);
    }
    let eps = match ctx.epsilon0 {
        Some(e) => e,
        None => return Err(BoundsError::EqualBetas),
    };
    if !eps.nca4_ok {
        return Err(BoundsError::Nca4Violated);
    }
    let d1 = derived.d1.expect("beta1 > beta2");
    Ok(theta_two_threshold(
        params.beta1,
        params.beta2,
        ctx.e0,
        eps.value,
        d1,
    ))
}

/// Upper-bound crossing for `beta1 > beta2` under the coupling condition.
pub fn theta_two(
    paths: &FbmPathPair,
    params: &ModelParams,
    derived: &DerivedConstants,
    ctx: &BoundsContext,
) -> Result<StoppingTime, BoundsError> {
    if params.beta1 == params.beta2 {
        return Err(BoundsError::EqualBetas);
    }
    let thr = unequal_threshold(params, derived, ctx)?;
    if !derived.coupling_ok {
        return Err(BoundsError::CouplingViolated);
    }
    theta_crossing(paths, params, derived, derived.rho(), ctx.r0, thr)
}

/// Upper-bound crossing for a general noise matrix: the earlier of the
/// crossings with either nonlinearity's exponent weights.
pub fn theta_general(
    paths: &FbmPathPair,
    params: &ModelParams,
    derived: &DerivedConstants,
    ctx: &BoundsContext,
) -> Result<StoppingTime, BoundsError> {
    let thr = if params.beta1 == params.beta2 {
        Some(theta_one_threshold(params.beta1, ctx.e0))
    } else {
        unequal_threshold(params, derived, ctx)?
    };
    let first = theta_crossing(paths, params, derived, derived.weights1, ctx.r0, thr)?;
    let second = theta_crossing(paths, params, derived, derived.weights2, ctx.r0, thr)?;
    Ok(first.earliest(second))
}

/// `(r0 + theta)(1 + 2^alpha)`; absent when `theta` was not reached.
pub fn tau_upper_from_theta(theta: StoppingTime, r0: f64, alpha: f64) -> Option<f64> {
    theta.time().map(|t| (r0 + t) * (1.0 + 2f64.powf(alpha)))
}

/// Start of the probability window for `k12 < 0`: the larger root of
/// `q ln s = -k12 s`, floored at `r0 (1 + 1e-9)`. When no root exists the
/// comparison `s^{-q} e^{k12 s} > e^{2 k12 s}` holds for all `s` and the floor
/// is returned.
pub fn eta_root(q: f64, k12: f64, r0: f64) -> f64 {
    let floor = r0 * (1.0 + 1e-9);
    let a = -k12;
    if !(a > 0.0) || q <= 0.0 {
        return floor;
    }
    let f = |s: f64| q * s.ln() - a * s;
    let peak = q / a;
    if f(peak) <= 0.0 {
        return floor;
    }
    let (mut lo, mut hi) = (peak, 2.0 * peak);
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.max(floor)
}
