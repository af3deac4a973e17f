//! Event definitions behind the probability estimators.

use serde::{Deserialize, Serialize};

use super::stats::wilson;
use super::MonteCarloError;
use crate::bounds::{eta_root, theta_one_threshold, theta_two_threshold, BoundsContext};
use crate::model::{DerivedConstants, InitialData, ModelParams};

pub const NONEXPLOSION_UPPER: &str = "nonexplosion_upper";
pub const NONEXPLOSION_UPPER_INFINITE: &str = "nonexplosion_upper_infinite";
pub const GLOBAL_LOWER: &str = "global_lower";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityEstimate {
    pub name: String,
    /// Query time, or the truncation horizon for infinite-horizon events.
    pub t: f64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n_used: usize,
    pub n_event: usize,
    pub excluded: usize,
    /// Excluded paths counted as event-false and event-true respectively.
    pub worst_case_lo: f64,
    pub worst_case_hi: f64,
    pub threshold: f64,
    pub eta: Option<f64>,
    pub bias_note: String,
}

impl ProbabilityEstimate {
    pub(crate) fn from_events(
        name: &str,
        t: f64,
        events: &[Option<bool>],
        level: f64,
        threshold: f64,
        eta: Option<f64>,
        bias_note: &str,
    ) -> Self {
        let n_total = events.len();
        let n_used = events.iter().flatten().count();
        let n_event = events.iter().flatten().filter(|&&e| e).count();
        let excluded = n_total - n_used;
        let (ci_lo, ci_hi) = wilson(n_event, n_used, level);
        let estimate = if n_used == 0 {
            f64::NAN
        } else {
            n_event as f64 / n_used as f64
        };
        Self {
            name: name.to_string(),
            t,
            estimate,
            ci_lo,
            ci_hi,
            n_used,
            n_event,
            excluded,
            worst_case_lo: n_event as f64 / n_total as f64,
            worst_case_hi: (n_event + excluded) as f64 / n_total as f64,
            threshold,
            eta,
            bias_note: bias_note.to_string(),
        }
    }
}

/// Shared data of the non-explosion upper-bound events
/// `int_eta^{end} min{g12, g21} ds < threshold`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct UpperSetup {
    pub eta: f64,
    pub threshold: f64,
    pub rho: [f64; 2],
}

pub(crate) fn upper_setup(
    params: &ModelParams,
    derived: &DerivedConstants,
    ctx: &BoundsContext,
) -> Result<UpperSetup, MonteCarloError> {
    let fail = |why: &str| Err(MonteCarloError::HypothesisViolated(why.to_string()));
    if !derived.coupling_ok {
        return fail("coupling condition fails");
    }
    if !(derived.rho1 > 0.0 && derived.rho2 > 0.0) {
        return fail("shared exponent weights must be positive");
    }
    if !(derived.n1 >= derived.n2 && derived.n2 > 0.0) {
        return fail("effective drifts must satisfy N1 >= N2 > 0");
    }
    if derived.k12_drift >= 0.0 {
        return fail("k12 >= 0: blow-up is almost sure, no probability bound");
    }
    let threshold = if params.beta1 == params.beta2 {
        theta_one_threshold(params.beta1, ctx.e0)
    } else {
        let eps = ctx.epsilon0.expect("beta1 > beta2");
        if !eps.nca4_ok {
            return fail("smallness condition on epsilon0 fails");
        }
        match theta_two_threshold(
            params.beta1,
            params.beta2,
            ctx.e0,
            eps.value,
            derived.d1.unwrap(),
        ) {
            Some(t) => t,
            None => return fail("smallness condition holds only with equality"),
        }
    };
    let eta = eta_root(params.singularity(0), derived.k12_drift, ctx.r0);
    Ok(UpperSetup {
        eta,
        threshold,
        rho: derived.rho(),
    })
}

/// `(1 + 2^alpha)`.
pub(crate) fn chain_factor(alpha: f64) -> f64 {
    1.0 + 2f64.powf(alpha)
}

/// End of the integration window for query time `t`.
pub(crate) fn window_end(t: f64, alpha: f64, r0: f64) -> f64 {
    t / chain_factor(alpha) - r0
}

/// Query times must leave a nonempty window past `eta`.
pub(crate) fn check_query(
    t: f64,
    setup: &UpperSetup,
    alpha: f64,
    r0: f64,
) -> Result<(), MonteCarloError> {
    let min_t = chain_factor(alpha) * (setup.eta + r0);
    if t > min_t {
        Ok(())
    } else {
        Err(MonteCarloError::HypothesisViolated(format!(
            "query time {t} must exceed (1 + 2^alpha)(eta + r0) = {min_t}"
        )))
    }
}

/// Global-existence lower-bound event: both truncated integrals below the
/// common threshold `min_i 1 / (beta_i (p10 |f_i|_1)^beta_i)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct GlobalSetup {
    pub threshold: f64,
    pub rho: [f64; 2],
    pub drifts: [f64; 2],
    pub q: [f64; 2],
}

pub(crate) fn global_setup(
    params: &ModelParams,
    derived: &DerivedConstants,
    init: &InitialData,
    p10: f64,
) -> Result<GlobalSetup, MonteCarloError> {
    if !derived.coupling_ok {
        return Err(MonteCarloError::HypothesisViolated(
            "coupling condition fails".into(),
        ));
    }
    let thr = |i: usize| {
        let b = params.beta(i);
        1.0 / (b * (p10 * init.l1_norm(i, params.d)).powf(b))
    };
    Ok(GlobalSetup {
        threshold: thr(0).min(thr(1)),
        rho: derived.rho(),
        drifts: [derived.n1 * params.beta1, derived.n2 * params.beta2],
        q: [params.singularity(0), params.singularity(1)],
    })
}

pub(crate) const UPPER_NOTE: &str = "upper bound on P[tau >= t]";
pub(crate) const INFINITE_NOTE: &str =
    "upper bound on P[tau = inf]; the window is truncated at t_max, which shrinks the integral, so the estimate overstates the bound (conservative)";
pub(crate) const GLOBAL_NOTE: &str =
    "lower bound on P[global existence]; truncation at t_max biases the estimate upward relative to the infinite-horizon event";
