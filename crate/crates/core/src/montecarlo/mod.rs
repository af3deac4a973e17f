//! Reproducible parallel ensembles of path-wise bounds and the probability
//! estimators built on them.
//!
//! Path `i` is drawn with seed `derive_seed(master_seed, i)`, so results do
//! not depend on the worker count: records are collected by index and
//! reduced in index order.

mod probability;
mod stats;

pub use probability::{
    ProbabilityEstimate, GLOBAL_LOWER, NONEXPLOSION_UPPER, NONEXPLOSION_UPPER_INFINITE,
};
pub use stats::{quantile_sorted, wilson, z_value, QUANTILE_LEVELS};

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{
    compute_bounds, exp_integral_until, min_kernel_integral, BlowupBounds, BoundsContext,
    BoundsError, BoundsOptions, SecondThreshold, StoppingTime, SupNormEstimate,
};
use crate::fbm::{derive_seed, FbmError, FbmPathPair, FbmSampler, SamplerMethod, TimeGrid};
use crate::model::{
    classify_regime, derive_constants, DerivedConstants, InitialData, ModelError, ModelParams,
    RegimeReport,
};
use crate::stable::{StableError, StableProfile};
use probability::{
    check_query, global_setup, upper_setup, window_end, GlobalSetup, UpperSetup, GLOBAL_NOTE,
    INFINITE_NOTE, UPPER_NOTE,
};

#[derive(Debug, Error)]
pub enum MonteCarloError {
    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fbm(#[from] FbmError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Stable(#[from] StableError),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("all {n} paths failed; first error: {first}")]
    AllPathsFailed { n: usize, first: String },
}

fn default_confidence() -> f64 {
    0.95
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n_paths: usize,
    pub grid: TimeGrid,
    pub master_seed: u64,
    pub params: ModelParams,
    pub init: InitialData,
    /// Query times of the finite-horizon probability estimator.
    #[serde(default)]
    pub query_times: Vec<f64>,
    #[serde(default)]
    pub r0: Option<f64>,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    /// Truncation horizon of the infinite-horizon events; defaults to ten
    /// times the largest query window, capped at the grid horizon.
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub sampler: SamplerMethod,
    #[serde(default)]
    pub second_threshold: SecondThreshold,
    #[serde(default)]
    pub sup_norm_estimate: SupNormEstimate,
    /// Test hook: replace every path by `B = 0`.
    #[serde(default)]
    pub zero_noise: bool,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<(), MonteCarloError> {
        let bad = |m: String| Err(MonteCarloError::InvalidConfig(m));
        if self.n_paths == 0 {
            return bad("n_paths must be at least 1".into());
        }
        if let Some(t) = self.query_times.iter().find(|t| !(**t > 0.0)) {
            return bad(format!("query times must be positive, got {t}"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return bad(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            ));
        }
        if let Some(t) = self.t_max {
            if !(t > 0.0) {
                return bad(format!("t_max must be positive, got {t}"));
            }
        }
        if self.r0.is_some_and(|r| !(r > 0.0)) {
            return bad("r0 override must be positive".into());
        }
        self.grid.validate()?;
        self.params.validate()?;
        self.init.validate()?;
        Ok(())
    }
}

/// Per-path outcome, indexed by path number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub index: usize,
    pub seed: Option<u64>,
    pub bounds: Option<BlowupBounds>,
    pub error: Option<String>,
    /// One event per accepted query time, in query order.
    pub upper_events: Vec<bool>,
    pub infinite_event: Option<bool>,
    pub global_event: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundQuantiles {
    pub levels: Vec<f64>,
    /// `None` stands for "not reached within the horizon".
    pub values: Vec<Option<f64>>,
    pub fraction_finite: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub tau_star: Option<BoundQuantiles>,
    pub theta: Option<BoundQuantiles>,
    pub tau_upper: Option<BoundQuantiles>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedEstimator {
    pub name: String,
    pub t: Option<f64>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub config_echo: EnsembleConfig,
    pub n_paths: usize,
    pub excluded: usize,
    pub excluded_reasons: BTreeMap<String, usize>,
    pub sampler: String,
    pub context: BoundsContext,
    pub regime: RegimeReport,
    pub t_max: f64,
    pub quantiles: Quantiles,
    pub probabilities: Vec<ProbabilityEstimate>,
    pub skipped: Vec<SkippedEstimator>,
}

/// Which events to evaluate on each path.
#[derive(Clone, Debug, Default)]
struct Plan {
    bounds: bool,
    upper: Option<UpperSetup>,
    upper_ends: Vec<f64>,
    infinite_end: Option<f64>,
    global: Option<(GlobalSetup, f64)>,
}

/// A validated configuration with its path-independent constants.
#[derive(Clone, Debug)]
pub struct Ensemble {
    config: EnsembleConfig,
    derived: DerivedConstants,
    ctx: BoundsContext,
    sampler: Option<FbmSampler>,
}

impl Ensemble {
    pub fn new(config: EnsembleConfig, profile: &StableProfile) -> Result<Self, MonteCarloError> {
        config.validate()?;
        let p = &config.params;
        if profile.alpha != p.alpha || profile.d != p.d {
            return Err(MonteCarloError::InvalidConfig(format!(
                "stable profile is for (alpha, d) = ({}, {}), model has ({}, {})",
                profile.alpha, profile.d, p.alpha, p.d
            )));
        }
        let derived = derive_constants(p);
        let ctx = BoundsContext::new(p, &derived, &config.init, profile, config.r0)?;
        let sampler = if config.zero_noise {
            None
        } else {
            Some(FbmSampler::new(p.hurst, config.grid, config.sampler)?)
        };
        Ok(Self {
            config,
            derived,
            ctx,
            sampler,
        })
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.config
    }

    pub fn derived(&self) -> &DerivedConstants {
        &self.derived
    }

    pub fn context(&self) -> &BoundsContext {
        &self.ctx
    }

    pub fn seed(&self, index: usize) -> u64 {
        derive_seed(self.config.master_seed, index as u64)
    }

    /// The path pair of ensemble member `index`.
    pub fn paths(&self, index: usize) -> FbmPathPair {
        match &self.sampler {
            Some(s) => s.sample(self.seed(index)),
            None => FbmPathPair::zeros(self.config.grid, self.config.params.hurst),
        }
    }

    fn options(&self) -> BoundsOptions {
        BoundsOptions {
            second_threshold: self.config.second_threshold,
            sup_norm_estimate: self.config.sup_norm_estimate,
        }
    }

    /// Truncation horizon for the infinite-horizon events.
    pub fn t_max(&self) -> f64 {
        let horizon = self.config.grid.t_end;
        if let Some(t) = self.config.t_max {
            return t.min(horizon);
        }
        let alpha = self.config.params.alpha;
        let largest = self
            .config
            .query_times
            .iter()
            .map(|&t| window_end(t, alpha, self.ctx.r0))
            .fold(f64::NEG_INFINITY, f64::max);
        if largest > 0.0 {
            (10.0 * largest).min(horizon)
        } else {
            horizon
        }
    }

    fn check_within_horizon(&self, end: f64) -> Result<(), MonteCarloError> {
        if end > self.config.grid.t_end {
            Err(MonteCarloError::InvalidConfig(format!(
                "window end {end} exceeds the grid horizon {}",
                self.config.grid.t_end
            )))
        } else {
            Ok(())
        }
    }

    fn upper_window(&self, t: f64) -> Result<(UpperSetup, f64), MonteCarloError> {
        let setup = upper_setup(&self.config.params, &self.derived, &self.ctx)?;
        check_query(t, &setup, self.config.params.alpha, self.ctx.r0)?;
        let end = window_end(t, self.config.params.alpha, self.ctx.r0);
        self.check_within_horizon(end)?;
        Ok((setup, end))
    }

    fn infinite_window(&self) -> Result<(UpperSetup, f64), MonteCarloError> {
        if !self.config.params.is_brownian() {
            return Err(MonteCarloError::HypothesisViolated(
                "the infinite-horizon bound needs H = 1/2".into(),
            ));
        }
        let setup = upper_setup(&self.config.params, &self.derived, &self.ctx)?;
        let end = self.t_max();
        if end <= setup.eta {
            return Err(MonteCarloError::HypothesisViolated(format!(
                "t_max = {end} does not exceed eta = {}",
                setup.eta
            )));
        }
        Ok((setup, end))
    }

    fn evaluate(&self, index: usize, plan: &Plan) -> PathRecord {
        let paths = self.paths(index);
        let mut rec = PathRecord {
            index,
            seed: paths.seed,
            bounds: None,
            error: None,
            upper_events: Vec::new(),
            infinite_event: None,
            global_event: None,
        };
        if let Err(e) = self.fill(&paths, plan, &mut rec) {
            rec.error = Some(e.to_string());
            rec.upper_events.clear();
            rec.infinite_event = None;
            rec.global_event = None;
        }
        rec
    }

    fn fill(
        &self,
        paths: &FbmPathPair,
        plan: &Plan,
        rec: &mut PathRecord,
    ) -> Result<(), BoundsError> {
        let p = &self.config.params;
        if plan.bounds {
            rec.bounds = Some(compute_bounds(
                paths,
                p,
                &self.derived,
                &self.config.init,
                &self.ctx,
                self.options(),
            )?);
        }
        if let Some(up) = plan.upper {
            // past the threshold every event is decided, so stop there
            let cum = min_kernel_integral(paths, p, &self.derived, up.rho, up.eta, up.threshold)?;
            rec.upper_events = plan
                .upper_ends
                .iter()
                .map(|&e| cum.value_at(e) < up.threshold)
                .collect();
            rec.infinite_event = plan.infinite_end.map(|e| cum.value_at(e) < up.threshold);
        }
        if let Some((g, t_max)) = plan.global {
            let mut below = true;
            for i in 0..2 {
                if g.q[i] >= 1.0 {
                    below = false;
                    break;
                }
                let cum =
                    exp_integral_until(paths, g.rho, g.drifts[i], g.q[i], 0.0, t_max, g.threshold)?;
                below &= cum.last() < g.threshold;
            }
            rec.global_event = Some(below);
        }
        Ok(())
    }

    fn run_plan(&self, plan: &Plan) -> Vec<PathRecord> {
        (0..self.config.n_paths)
            .into_par_iter()
            .map(|i| self.evaluate(i, plan))
            .collect()
    }

    /// Bounds and every applicable probability estimate on all paths.
    pub fn run(&self) -> Result<(EnsembleSummary, Vec<PathRecord>), MonteCarloError> {
        let mut plan = Plan {
            bounds: true,
            ..Plan::default()
        };
        let mut skipped = Vec::new();
        let mut accepted_times = Vec::new();
        let upper = upper_setup(&self.config.params, &self.derived, &self.ctx);
        for &t in &self.config.query_times {
            match self.upper_window(t) {
                Ok((setup, end)) => {
                    plan.upper = Some(setup);
                    plan.upper_ends.push(end);
                    accepted_times.push(t);
                }
                Err(e) => skipped.push(SkippedEstimator {
                    name: NONEXPLOSION_UPPER.into(),
                    t: Some(t),
                    reason: e.to_string(),
                }),
            }
        }
        let t_max = self.t_max();
        match self.infinite_window() {
            Ok((setup, end)) => {
                plan.upper = Some(setup);
                plan.infinite_end = Some(end);
            }
            Err(e) => skipped.push(SkippedEstimator {
                name: NONEXPLOSION_UPPER_INFINITE.into(),
                t: Some(t_max),
                reason: e.to_string(),
            }),
        }
        match global_setup(
            &self.config.params,
            &self.derived,
            &self.config.init,
            self.ctx.p10,
        ) {
            Ok(g) => plan.global = Some((g, t_max)),
            Err(e) => skipped.push(SkippedEstimator {
                name: GLOBAL_LOWER.into(),
                t: Some(t_max),
                reason: e.to_string(),
            }),
        }

        let records = self.run_plan(&plan);
        let (excluded, reasons) = tally_failures(&records)?;

        let level = self.config.confidence;
        let mut probabilities = Vec::new();
        let eta = upper.as_ref().ok().map(|u| u.eta);
        for (k, &t) in accepted_times.iter().enumerate() {
            let ev = events(&records, |r| r.upper_events.get(k).copied());
            let thr = plan.upper.unwrap().threshold;
            probabilities.push(ProbabilityEstimate::from_events(
                NONEXPLOSION_UPPER,
                t,
                &ev,
                level,
                thr,
                eta,
                UPPER_NOTE,
            ));
        }
        if let Some(end) = plan.infinite_end {
            let ev = events(&records, |r| r.infinite_event);
            let thr = plan.upper.unwrap().threshold;
            probabilities.push(ProbabilityEstimate::from_events(
                NONEXPLOSION_UPPER_INFINITE,
                end,
                &ev,
                level,
                thr,
                eta,
                INFINITE_NOTE,
            ));
        }
        if let Some((g, t)) = plan.global {
            let ev = events(&records, |r| r.global_event);
            probabilities.push(ProbabilityEstimate::from_events(
                GLOBAL_LOWER,
                t,
                &ev,
                level,
                g.threshold,
                None,
                GLOBAL_NOTE,
            ));
        }

        let bounds: Vec<&BlowupBounds> = records.iter().filter_map(|r| r.bounds.as_ref()).collect();
        let quantiles = Quantiles {
            tau_star: bound_quantiles(bounds.iter().filter_map(|b| b.tau_star)),
            theta: bound_quantiles(bounds.iter().filter_map(|b| b.theta)),
            tau_upper: bound_quantiles(
                bounds
                    .iter()
                    .filter_map(|b| b.theta.map(|_| StoppingTime::from_option(b.tau_upper))),
            ),
        };

        let summary = EnsembleSummary {
            config_echo: self.config.clone(),
            n_paths: self.config.n_paths,
            excluded,
            excluded_reasons: reasons,
            sampler: self
                .sampler
                .as_ref()
                .map_or("zero_noise", |s| s.method_name())
                .to_string(),
            context: self.ctx.clone(),
            regime: classify_regime(&self.config.params, &self.derived),
            t_max,
            quantiles,
            probabilities,
            skipped,
        };
        Ok((summary, records))
    }

    /// Estimate of `P[int_eta^{t/(1+2^alpha) - r0} min{g12, g21} ds < threshold]`.
    pub fn prob_nonexplosion_upper(&self, t: f64) -> Result<ProbabilityEstimate, MonteCarloError> {
        let (setup, end) = self.upper_window(t)?;
        let plan = Plan {
            upper: Some(setup),
            upper_ends: vec![end],
            ..Plan::default()
        };
        let records = self.run_plan(&plan);
        tally_failures(&records)?;
        let ev = events(&records, |r| r.upper_events.first().copied());
        Ok(ProbabilityEstimate::from_events(
            NONEXPLOSION_UPPER,
            t,
            &ev,
            self.config.confidence,
            setup.threshold,
            Some(setup.eta),
            UPPER_NOTE,
        ))
    }

    /// As [`Self::prob_nonexplosion_upper`] with the window running to `t_max`.
    pub fn prob_nonexplosion_upper_infinite(&self) -> Result<ProbabilityEstimate, MonteCarloError> {
        let (setup, end) = self.infinite_window()?;
        let plan = Plan {
            upper: Some(setup),
            infinite_end: Some(end),
            ..Plan::default()
        };
        let records = self.run_plan(&plan);
        tally_failures(&records)?;
        let ev = events(&records, |r| r.infinite_event);
        Ok(ProbabilityEstimate::from_events(
            NONEXPLOSION_UPPER_INFINITE,
            end,
            &ev,
            self.config.confidence,
            setup.threshold,
            Some(setup.eta),
            INFINITE_NOTE,
        ))
    }

    /// Estimate of the probability that both truncated global-existence
    /// integrals stay below the L1-norm threshold.
    pub fn prob_global_lower(&self, t_max: f64) -> Result<ProbabilityEstimate, MonteCarloError> {
        if !(t_max > 0.0) {
            return Err(MonteCarloError::InvalidConfig(format!(
                "t_max must be positive, got {t_max}"
            )));
        }
        self.check_within_horizon(t_max)?;
        let g = global_setup(
            &self.config.params,
            &self.derived,
            &self.config.init,
            self.ctx.p10,
        )?;
        let plan = Plan {
            global: Some((g, t_max)),
            ..Plan::default()
        };
        let records = self.run_plan(&plan);
        tally_failures(&records)?;
        let ev = events(&records, |r| r.global_event);
        Ok(ProbabilityEstimate::from_events(
            GLOBAL_LOWER,
            t_max,
            &ev,
            self.config.confidence,
            g.threshold,
            None,
            GLOBAL_NOTE,
        ))
    }
}

fn events<F: Fn(&PathRecord) -> Option<bool>>(records: &[PathRecord], f: F) -> Vec<Option<bool>> {
    records
        .iter()
        .map(|r| if r.error.is_some() { None } else { f(r) })
        .collect()
}

fn tally_failures(
    records: &[PathRecord],
) -> Result<(usize, BTreeMap<String, usize>), MonteCarloError> {
    let mut reasons = BTreeMap::new();
    for r in records {
        if let Some(e) = &r.error {
            *reasons.entry(e.clone()).or_insert(0) += 1;
        }
    }
    let excluded = reasons.values().sum();
    if excluded == records.len() {
        return Err(MonteCarloError::AllPathsFailed {
            n: excluded,
            first: records[0].error.clone().unwrap_or_default(),
        });
    }
    Ok((excluded, reasons))
}

fn bound_quantiles(times: impl Iterator<Item = StoppingTime>) -> Option<BoundQuantiles> {
    let mut v: Vec<f64> = times.map(|t| t.time().unwrap_or(f64::INFINITY)).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let finite = v.iter().filter(|x| x.is_finite()).count();
    Some(BoundQuantiles {
        levels: QUANTILE_LEVELS.to_vec(),
        values: QUANTILE_LEVELS
            .iter()
            .map(|&l| Some(quantile_sorted(&v, l)).filter(|x| x.is_finite()))
            .collect(),
        fraction_finite: finite as f64 / v.len() as f64,
        n: v.len(),
    })
}

/// Runs the full ensemble, building the stable profile for the model's
/// `(alpha, d)` with default resolution.
pub fn run_ensemble(config: EnsembleConfig) -> Result<EnsembleSummary, MonteCarloError> {
    let profile = crate::stable::default_profile(config.params.alpha, config.params.d)?;
    Ok(Ensemble::new(config, &profile)?.run()?.0)
}

fn fmt_time(t: Option<StoppingTime>) -> String {
    match t {
        Some(StoppingTime::At(v)) => v.to_string(),
        Some(StoppingTime::NotReached) => "inf".into(),
        None => "NA".into(),
    }
}

/// Per-path CSV: index, seed, the three bounds (`inf` = not reached,
/// `NA` = not applicable) and condition flags.
pub fn write_records_csv<W: Write>(records: &[PathRecord], mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "path_index,seed,tau_star,theta,tau_upper,tau_star_divergent,coupling_ok,nca4_ok,error"
    )?;
    for r in records {
        let b = r.bounds.as_ref();
        let seed = r.seed.map_or("NA".into(), |s| s.to_string());
        let upper = b.and_then(|b| b.theta.map(|_| StoppingTime::from_option(b.tau_upper)));
        let flag = |v: Option<bool>| v.map_or("NA".into(), |x: bool| x.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.index,
            seed,
            fmt_time(b.and_then(|b| b.tau_star)),
            fmt_time(b.and_then(|b| b.theta)),
            fmt_time(upper),
            flag(b.map(|b| b.tau_star_divergent)),
            flag(b.map(|b| b.conditions.coupling_ok)),
            flag(b.and_then(|b| b.conditions.nca4_ok)),
            r.error.as_deref().unwrap_or("").replace(',', ";"),
        )?;
    }
    Ok(())
}
