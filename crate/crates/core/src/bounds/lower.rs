//! Lower bound `tau_star` and the growth factors behind it.

use serde::{Deserialize, Serialize};

use super::integral::{exp_integral, exp_integral_until, Cumulative};
use super::{BoundsError, StoppingTime};
use crate::fbm::FbmPathPair;
use crate::model::{DerivedConstants, InitialData, ModelParams};

/// Which threshold the second integral of the general-matrix lower bound is
/// compared against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecondThreshold {
    /// Both integrals against the `(beta1, C1)` threshold.
    #[default]
    Shared,
    /// Second integral against its own `(beta2, C2)` threshold.
    Symmetric,
}

/// How `|S_r f|_inf` is bounded inside the lower-bound integrand.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupNormEstimate {
    /// `p(r, 0) |f|_inf`, singular like `r^{-d/alpha}` at the origin.
    #[default]
    SupNorm,
    /// `min(|f|_inf, p(r, 0) |f|_1)`, which holds for every `r`. Finite in the
    /// critical case `d beta / alpha >= 1` and never above the sup-norm form
    /// once `|f|_1 <= |f|_inf`.
    MassBounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauStar {
    pub time: StoppingTime,
    /// Set when `d beta_i / alpha >= 1` forces `tau_star = 0`.
    pub divergent_at_origin: bool,
    /// 1-based index of the first crossing component.
    pub component: Option<usize>,
}

/// `1 / (beta (p10 C |psi|_inf)^beta)`.
fn threshold(beta: f64, p10: f64, sup: f64) -> f64 {
    1.0 / (beta * (p10 * sup).powf(beta))
}

/// Normalised mass-bounded integrand of one component: `a0 e^{...}` on
/// `[0, r_c]`, then `a1 e^{...} r^{-q}`, crossing at 1.
#[derive(Clone, Copy, Debug)]
struct MassSplit {
    r_c: f64,
    a0: f64,
    a1: f64,
    q: f64,
}

impl MassSplit {
    fn new(beta: f64, p10: f64, sup: f64, l1: f64, d_over_alpha: f64) -> Self {
        // zero data never crosses; infinite mass keeps the sup-norm piece forever
        let r_c = if sup > 0.0 {
            (p10 * l1 / sup).powf(1.0 / d_over_alpha)
        } else {
            f64::INFINITY
        };
        MassSplit {
            r_c,
            a0: beta * sup.powf(beta),
            a1: beta * (p10 * l1).powf(beta),
            q: d_over_alpha * beta,
        }
    }
}

struct LowerSetup {
    weights: [[f64; 2]; 2],
    drifts: [f64; 2],
    q: [f64; 2],
    thresholds: [f64; 2],
    betas: [f64; 2],
    mass: Option<[MassSplit; 2]>,
}

impl LowerSetup {
    /// Level at which component `i` crosses.
    fn level(&self, i: usize) -> f64 {
        if self.mass.is_some() {
            1.0
        } else {
            self.thresholds[i]
        }
    }

    /// Cumulative integral of component `i` over the horizon, stopping once it
    /// reaches `stop`.
    fn cumulative(
        &self,
        paths: &FbmPathPair,
        i: usize,
        stop: f64,
    ) -> Result<Cumulative, BoundsError> {
        let horizon = paths.grid.t_end;
        let (w, c) = (self.weights[i], self.drifts[i]);
        let Some(mass) = self.mass else {
            return exp_integral_until(paths, w, c, self.q[i], 0.0, horizon, stop);
        };
        let m = mass[i];
        let r_c = m.r_c.min(horizon);
        let mut cum = Cumulative {
            times: vec![0.0],
            values: vec![0.0],
        };
        if r_c > 0.0 {
            let head = exp_integral_until(paths, w, c, 0.0, 0.0, r_c, stop / m.a0)?;
            cum.times = head.times;
            cum.values = head.values.iter().map(|v| v * m.a0).collect();
        }
        let reached = cum.last();
        if cum.end_time() < horizon && reached < stop && reached.is_finite() {
            let tail = exp_integral_until(paths, w, c, m.q, r_c, horizon, (stop - reached) / m.a1)?;
            cum.times.extend_from_slice(&tail.times[1..]);
            cum.values
                .extend(tail.values[1..].iter().map(|v| reached + v * m.a1));
        }
        Ok(cum)
    }
}

fn setup(
    params: &ModelParams,
    derived: &DerivedConstants,
    init: &InitialData,
    p10: f64,
    weights: [[f64; 2]; 2],
    second: SecondThreshold,
    estimate: SupNormEstimate,
) -> Result<LowerSetup, BoundsError> {
    let lambda = derived.lambda.ok_or(BoundsError::MissingLambda)?;
    let (c1, c2, psi) = init.as_scaled().ok_or(BoundsError::RequiresScaledData)?;
    let sup = psi.sup_norm();
    let (b1, b2) = (params.beta1, params.beta2);
    let t1 = threshold(b1, p10, c1 * sup);
    let t2 = match second {
        SecondThreshold::Shared => t1,
        SecondThreshold::Symmetric => threshold(b2, p10, c2 * sup),
    };
    let mass = match estimate {
        SupNormEstimate::SupNorm => None,
        SupNormEstimate::MassBounded => {
            let l1 = psi.l1_norm(params.d);
            let da = params.d as f64 / params.alpha;
            let first = MassSplit::new(b1, p10, c1 * sup, c1 * l1, da);
            let second = match second {
                SecondThreshold::Shared => first,
                SecondThreshold::Symmetric => MassSplit::new(b2, p10, c2 * sup, c2 * l1, da),
            };
            Some([first, second])
        }
    };
    Ok(LowerSetup {
        weights,
        drifts: [lambda * b1, lambda * b2],
        q: [params.singularity(0), params.singularity(1)],
        thresholds: [t1, t2],
        betas: [b1, b2],
        mass,
    })
}

fn first_passage(paths: &FbmPathPair, s: &LowerSetup) -> Result<TauStar, BoundsError> {
    if let Some(i) =
        s.q.iter()
            .position(|&q| q >= 1.0)
            .filter(|_| s.mass.is_none())
    {
        return Ok(TauStar {
            time: StoppingTime::At(0.0),
            divergent_at_origin: true,
            component: Some(i + 1),
        });
    }
    let mut best = TauStar {
        time: StoppingTime::NotReached,
        divergent_at_origin: false,
        component: None,
    };
    for i in 0..2 {
        let cum = s.cumulative(paths, i, s.level(i))?;
        if let Some(t) = cum.first_crossing(s.level(i)) {
            if best.time.time().is_none_or(|b| t < b) {
                best.time = StoppingTime::At(t);
                best.component = Some(i + 1);
            }
        }
    }
    Ok(best)
}

/// Lower bound under the coupling condition: both integrals use the shared
/// exponent weights `rho`.
pub fn tau_star_scaled(
    paths: &FbmPathPair,
    params: &ModelParams,
    derived: &DerivedConstants,
    init: &InitialData,
    p10: f64,
) -> Result<TauStar, BoundsError> {
    tau_star_scaled_with(paths, params, derived, init, p10, SupNormEstimate::SupNorm)
}

/// [`tau_star_scaled`] with a choice of sup-norm estimate.
pub fn tau_star_scaled_with(
    paths: &FbmPathPair,
    params: &ModelParams,
    derived: &DerivedConstants,
    init: &InitialData,
    p10: f64,
    estimate: SupNormEstimate,
) -> Result<TauStar, BoundsError> {
    if derived.lambda.is_none() {
        return Err(BoundsError::MissingLambda);
    }
    if !derived.coupling_ok {
        return Err(BoundsError::CouplingViolated);
    }
    let rho = derived.rho();
    let s = setup(
        params,
        derived,
        init,
        p10,
        [rho, rho],
        SecondThreshold::Symmetric,
        estimate,
    )?;
    first_passage(paths, &s)
}

/// Lower bound for a general noise matrix: each integral carries the
/// exponent weights of its own nonlinearity.
pub fn tau_star_general(
    paths: &FbmPathPair,
    params: &ModelParams,
    derived: &DerivedConstants,
    init: &InitialData,
    p10: f64,
    second: SecondThreshold,
) -> Result<TauStar, BoundsError> {
    tau_star_general_with(
        paths,
        params,
        derived,
        init,
        p10,
        second,
        SupNormEstimate::SupNorm,
    )
}

/// [`tau_star_general`] with a choice of sup-norm estimate. Under
/// [`SecondThreshold::Shared`] the mass-bounded second integral also
/// carries the first component's data.
pub fn tau_star_general_with(
    paths: &FbmPathPair,
    params: &ModelParams,
    derived: &DerivedConstants,
    init: &InitialData,
    p10: f64,
    second: SecondThreshold,
    estimate: SupNormEstimate,
) -> Result<TauStar, BoundsError> {
    let s = setup(
        params,
        derived,
        init,
        p10,
        [derived.weights1, derived.weights2],
        second,
        estimate,
    )?;
    first_passage(paths, &s)
}

/// The two cumulative lower-bound integrals over the whole horizon, with the
/// scaled-data weights when the coupling condition holds.
pub fn lower_integrals(
    paths: &FbmPathPair,
    params: &ModelParams,
    derived: &DerivedConstants,
) -> Result<[Cumulative; 2], BoundsError> {
    let lambda = derived.lambda.ok_or(BoundsError::MissingLambda)?;
    let horizon = paths.grid.t_end;
    let w = |i: usize| {
        if derived.coupling_ok {
            derived.rho()
        } else {
            derived.weights(i)
        }
    };
    let one = |i: usize| {
        exp_integral(
            paths,
            w(i),
            lambda * params.beta(i),
            params.singularity(i),
            0.0,
            horizon,
        )
    };
    Ok([one(0)?, one(1)?])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthFactors {
    pub times: Vec<f64>,
    /// `G_i(t_j)`; `f64::INFINITY` from the node where the bracket vanishes.
    pub g: [Vec<f64>; 2],
}

impl GrowthFactors {
    /// First node index at which `G_i` is infinite.
    pub fn divergence_index(&self, i: usize) -> Option<usize> {
        self.g[i].iter().position(|v| v.is_infinite())
    }
}

/// `G_i(t) = [1 - beta_i p10^beta_i |f_i|^beta_i I_i(t)]^{-1/beta_i}` at every
/// grid node, with `I_i` the lower-bound integral.
pub fn growth_factor(
    paths: &FbmPathPair,
    params: &ModelParams,
    derived: &DerivedConstants,
    init: &InitialData,
    p10: f64,
) -> Result<GrowthFactors, BoundsError> {
    growth_factor_with(paths, params, derived, init, p10, SupNormEstimate::SupNorm)
}

/// [`growth_factor`] with a choice of sup-norm estimate. The mass-bounded
/// variant adds the node `r_c` where its two pieces meet.
pub fn growth_factor_with(
    paths: &FbmPathPair,
    params: &ModelParams,
    derived: &DerivedConstants,
    init: &InitialData,
    p10: f64,
    estimate: SupNormEstimate,
) -> Result<GrowthFactors, BoundsError> {
    if derived.lambda.is_none() {
        return Err(BoundsError::MissingLambda);
    }
    if !derived.coupling_ok {
        return Err(BoundsError::CouplingViolated);
    }
    let rho = derived.rho();
    let s = setup(
        params,
        derived,
        init,
        p10,
        [rho, rho],
        SecondThreshold::Symmetric,
        estimate,
    )?;
    let divergent = |i: usize| s.mass.is_none() && s.q[i] >= 1.0;
    let times = match estimate {
        SupNormEstimate::SupNorm => paths.grid.nodes(),
        // both components split at the same r_c, so their nodes agree
        SupNormEstimate::MassBounded => s.cumulative(paths, 0, f64::INFINITY)?.times,
    };
    let one = |i: usize| -> Result<Vec<f64>, BoundsError> {
        if divergent(i) {
            return Ok(std::iter::once(1.0)
                .chain(std::iter::repeat_n(f64::INFINITY, times.len() - 1))
                .collect());
        }
        let thr = s.level(i);
        let mut past = false;
        Ok(s.cumulative(paths, i, f64::INFINITY)?
            .values
            .iter()
            .map(|&v| {
                // same comparison as the crossing search, so the first
                // infinite node brackets tau_star
                past |= v >= thr;
                if past {
                    f64::INFINITY
                } else {
                    (1.0 - v / thr).powf(-1.0 / s.betas[i])
                }
            })
            .collect())
    };
    let g = [one(0)?, one(1)?];
    Ok(GrowthFactors { times, g })
}
