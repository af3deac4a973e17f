//! Truncated-horizon test of the global-existence criterion.

use serde::{Deserialize, Serialize};

use super::integral::exp_integral;
use super::BoundsError;
use crate::fbm::FbmPathPair;
use crate::model::{DerivedConstants, InitialData, ModelParams};

/// Default `sigma`: the integrand's log-slope must fall below `-sigma` per
/// unit time over the last decade of the horizon.
pub const DEFAULT_SLOPE_CUTOFF: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalVerdict {
    /// A truncated integral already reaches `1 / beta_i`.
    Violated,
    /// Below threshold with both integrands decaying at the horizon.
    SatisfiedOnHorizon,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalExistence {
    pub verdict: GlobalVerdict,
    /// `beta_i J_i(t_max)`; criterion needs both below 1.
    pub scaled_integrals: [f64; 2],
    /// Least-squares slope of the log-integrand over `[t_max / 10, t_max]`.
    pub log_slopes: [f64; 2],
    /// `(1 - beta_i J_i)^{-1/beta_i}`, the factor bounding the solution by
    /// the linear evolution, when satisfied.
    pub amplification: Option<[f64; 2]>,
    pub t_max: f64,
}

/// `J_i = p10^beta_i |f_i|_inf^beta_i int_0^{t_max} exp(rho . B + N_i beta_i r) r^{-d beta_i / alpha} dr`.
pub fn global_existence_check(
    paths: &FbmPathPair,
    params: &ModelParams,
    derived: &DerivedConstants,
    init: &InitialData,
    p10: f64,
    t_max: f64,
    slope_cutoff: f64,
) -> Result<GlobalExistence, BoundsError> {
    if !derived.coupling_ok {
        return Err(BoundsError::CouplingViolated);
    }
    if !(t_max > 0.0) {
        return Err(BoundsError::NonpositiveTime(t_max));
    }
    let rho = derived.rho();
    let mut scaled = [0.0; 2];
    let mut slopes = [0.0; 2];
    for i in 0..2 {
        let beta = params.beta(i);
        let q = params.singularity(i);
        let c = derived.n(i) * beta;
        scaled[i] = if q >= 1.0 {
            f64::INFINITY
        } else {
            let cum = exp_integral(paths, rho, c, q, 0.0, t_max)?;
            beta * (p10 * init.sup_norm(i)).powf(beta) * cum.last()
        };
        slopes[i] = log_slope(paths, rho, c, q, t_max);
    }
    let verdict = if scaled.iter().any(|&v| v >= 1.0) {
        GlobalVerdict::Violated
    } else if slopes.iter().all(|&s| s < -slope_cutoff) {
        GlobalVerdict::SatisfiedOnHorizon
    } else {
        GlobalVerdict::Inconclusive
    };
    let amplification = (verdict == GlobalVerdict::SatisfiedOnHorizon)
        .then(|| [0, 1].map(|i| (1.0 - scaled[i]).powf(-1.0 / params.beta(i))));
    Ok(GlobalExistence {
        verdict,
        scaled_integrals: scaled,
        log_slopes: slopes,
        amplification,
        t_max,
    })
}

/// Least-squares slope of `rho . B(r) + c r - q ln r` over the grid nodes in
/// `[t_max / 10, t_max]`; `+inf` with fewer than two nodes.
fn log_slope(paths: &FbmPathPair, rho: [f64; 2], c: f64, q: f64, t_max: f64) -> f64 {
    let lo = t_max / 10.0;
    let pts: Vec<(f64, f64)> = (0..paths.grid.len())
        .map(|j| paths.grid.node(j))
        .filter(|&t| t >= lo && t <= t_max && t > 0.0)
        .map(|t| {
            let (b1, b2) = paths.value_at(t);
            (t, rho[0] * b1 + rho[1] * b2 + c * t - q * t.ln())
        })
        .collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
