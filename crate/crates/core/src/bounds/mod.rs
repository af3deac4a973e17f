//! Path-wise stopping-time bounds for the blow-up time.
//!
//! Every bound is a first-crossing time of a cumulative exponential fBm
//! functional against a deterministic threshold. The lower bound `tau_star`
//! starts at the origin; the upper bounds `theta` start at `r0` and are
//! chained into `tau_upper = (r0 + theta)(1 + 2^alpha)`.

mod global;
mod integral;
mod lower;
mod upper;

pub use global::{global_existence_check, GlobalExistence, GlobalVerdict, DEFAULT_SLOPE_CUTOFF};
pub use integral::{exp_integral, exp_integral_until, Cumulative};
pub use lower::{
    growth_factor, growth_factor_with, lower_integrals, tau_star_general, tau_star_general_with,
    tau_star_scaled, tau_star_scaled_with, GrowthFactors, SecondThreshold, SupNormEstimate,
    TauStar,
};
pub use upper::{
    epsilon_zero, eta_root, g_ij, min_kernel_integral, tau_upper_from_theta, theta_general,
    theta_one, theta_one_threshold, theta_two, theta_two_threshold, EpsilonZero,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fbm::FbmPathPair;
use crate::model::{DerivedConstants, InitialData, ModelParams};
use crate::stable::{default_r0, r_constant, StableError, StableProfile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("integral diverges at the origin: singularity exponent {q} >= 1")]
    DivergentAtOrigin { q: f64 },
    #[error("invalid integration interval [{t0}, {t1}] for horizon {horizon}")]
    InvalidInterval { t0: f64, t1: f64, horizon: f64 },
    #[error("effective drifts differ, no common lambda")]
    MissingLambda,
    #[error("coupling condition fails: the two exponent weight vectors differ")]
    CouplingViolated,
    #[error("beta1 != beta2, this bound needs equal exponents")]
    UnequalBetas,
    #[error("beta1 == beta2, this bound needs beta1 > beta2")]
    EqualBetas,
    #[error("beta1 < beta2 is outside the model")]
    BetaOrder,
    #[error("the smallness condition on epsilon0 fails")]
    Nca4Violated,
    #[error("time must be positive, got {0}")]
    NonpositiveTime(f64),
    #[error("initial mass constants must be positive, got r1 = {r1}, r2 = {r2}")]
    NonpositiveMass { r1: f64, r2: f64 },
    #[error("lower bound needs initial data of the form C_i psi")]
    RequiresScaledData,
    #[error(transparent)]
    Stable(#[from] StableError),
}

/// A first-crossing time, or absence of a crossing up to the path horizon.
///
/// Serialises as a number, or `null` when not reached.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StoppingTime {
    At(f64),
    NotReached,
}

impl StoppingTime {
    pub fn from_option(t: Option<f64>) -> Self {
        t.map_or(Self::NotReached, Self::At)
    }

    pub fn time(self) -> Option<f64> {
        match self {
            Self::At(t) => Some(t),
            Self::NotReached => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Self::At(_))
    }

    /// Earlier of two stopping times.
    pub fn earliest(self, other: Self) -> Self {
        match (self, other) {
            (Self::At(a), Self::At(b)) => Self::At(a.min(b)),
            (Self::At(a), _) | (_, Self::At(a)) => Self::At(a),
            _ => Self::NotReached,
        }
    }
}

/// Path-independent constants shared by every bound for one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsContext {
    pub p10: f64,
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    /// `r1 exp(-N1 r0) + r2 exp(-N2 r0)`
    pub e0: f64,
    /// `r1 exp(-N1 r0)`
    pub h1: f64,
    pub epsilon0: Option<EpsilonZero>,
}

impl BoundsContext {
    /// Evaluates `p(1,0)`, `r0` (unless overridden) and the initial masses
    /// `r_i` from the stable profile.
    pub fn new(
        params: &ModelParams,
        derived: &DerivedConstants,
        init: &InitialData,
        profile: &StableProfile,
        r0_override: Option<f64>,
    ) -> Result<Self, BoundsError> {
        let r0 = r0_override.unwrap_or_else(|| default_r0(profile));
        if !(r0 > 0.0) {
            return Err(BoundsError::NonpositiveTime(r0));
        }
        let r1 = r_constant(profile, derived.n1, r0, &init.component(0))?;
        let r2 = r_constant(profile, derived.n2, r0, &init.component(1))?;
        Self::from_masses(params, derived, profile.p10, r0, r1, r2)
    }

    pub fn from_masses(
        params: &ModelParams,
        derived: &DerivedConstants,
        p10: f64,
        r0: f64,
        r1: f64,
        r2: f64,
    ) -> Result<Self, BoundsError> {
        if !(r1 > 0.0 && r2 > 0.0) {
            return Err(BoundsError::NonpositiveMass { r1, r2 });
        }
        let h1 = r1 * (-derived.n1 * r0).exp();
        let e0 = h1 + r2 * (-derived.n2 * r0).exp();
        let epsilon0 = if params.beta1 > params.beta2 {
            Some(epsilon_zero(params, derived, e0, h1)?)
        } else {
            None
        };
        Ok(Self {
            p10,
            r0,
            r1,
            r2,
            e0,
            h1,
            epsilon0,
        })
    }

    pub fn nca4_ok(&self) -> Option<bool> {
        self.epsilon0.map(|e| e.nca4_ok)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundsOptions {
    #[serde(default)]
    pub second_threshold: SecondThreshold,
    #[serde(default)]
    pub sup_norm_estimate: SupNormEstimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionFlags {
    pub coupling_ok: bool,
    /// Absent when `beta1 == beta2` (no smallness condition needed).
    pub nca4_ok: Option<bool>,
    pub lambda_defined: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupBounds {
    /// Absent when its hypotheses fail (no common drift, non-scaled data).
    pub tau_star: Option<StoppingTime>,
    pub tau_star_divergent: bool,
    /// Component (1 or 2) whose integral crossed first.
    pub tau_star_component: Option<usize>,
    /// Absent when the smallness condition fails.
    pub theta: Option<StoppingTime>,
    pub tau_upper: Option<f64>,
    pub epsilon0: Option<f64>,
    pub conditions: ConditionFlags,
    pub horizon: f64,
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
}

/// All bounds for one path.
///
/// Under the coupling condition the scaled lower bound and `theta_one` /
/// `theta_two` are used; otherwise the general-matrix variants.
pub fn compute_bounds(
    paths: &FbmPathPair,
    params: &ModelParams,
    derived: &DerivedConstants,
    init: &InitialData,
    ctx: &BoundsContext,
    options: BoundsOptions,
) -> Result<BlowupBounds, BoundsError> {
    let conditions = ConditionFlags {
        coupling_ok: derived.coupling_ok,
        nca4_ok: ctx.nca4_ok(),
        lambda_defined: derived.lambda.is_some(),
    };

    let lower = if derived.lambda.is_some() && init.as_scaled().is_some() {
        let ts = if derived.coupling_ok {
            tau_star_scaled_with(
                paths,
                params,
                derived,
                init,
                ctx.p10,
                options.sup_norm_estimate,
            )?
        } else {
            let (second, estimate) = (options.second_threshold, options.sup_norm_estimate);
            tau_star_general_with(paths, params, derived, init, ctx.p10, second, estimate)?
        };
        Some(ts)
    } else {
        None
    };

    let theta = if conditions.nca4_ok == Some(false) {
        None
    } else if derived.coupling_ok {
        Some(if params.beta1 == params.beta2 {
            theta_one(paths, params, derived, ctx)?
        } else {
            theta_two(paths, params, derived, ctx)?
        })
    } else {
        Some(theta_general(paths, params, derived, ctx)?)
    };

    Ok(BlowupBounds {
        tau_star: lower.map(|l| l.time),
        tau_star_divergent: lower.is_some_and(|l| l.divergent_at_origin),
        tau_star_component: lower.and_then(|l| l.component),
        theta,
        tau_upper: theta.and_then(|t| tau_upper_from_theta(t, ctx.r0, params.alpha)),
        epsilon0: ctx.epsilon0.map(|e| e.value),
        conditions,
        horizon: paths.grid.t_end,
        r0: ctx.r0,
        r1: ctx.r1,
        r2: ctx.r2,
    })
}
