//! Fixtures shared by the benchmarks: one representative configuration and
//! the path-independent objects built from it.

use blowup_core::bounds::BoundsContext;
use blowup_core::fbm::{FbmSampler, SamplerMethod, TimeGrid};
use blowup_core::model::{
    derive_constants, DerivedConstants, InitialData, ModelParams, SpatialFunction,
};
use blowup_core::stable::{default_profile, StableProfile};

/// Coupled noise, equal exponents, `H = 3/4`, bump data in one dimension.
pub fn params() -> ModelParams {
    ModelParams {
        alpha: 2.0,
        d: 1,
        hurst: 0.75,
        beta1: 1.0,
        beta2: 1.0,
        gamma1: 1.0,
        gamma2: 1.0,
        k: [[0.5, 0.5], [0.5, 0.5]],
    }
}

pub fn init() -> InitialData {
    InitialData::Scaled {
        c1: 1.0,
        c2: 1.0,
        psi: SpatialFunction::Bump {
            radius: 1.0,
            height: 1.0,
        },
    }
}

pub struct Fixture {
    pub params: ModelParams,
    pub derived: DerivedConstants,
    pub init: InitialData,
    pub profile: StableProfile,
    pub ctx: BoundsContext,
    pub sampler: FbmSampler,
}

impl Fixture {
    /// Paths on `[0, t_end]` with `n_steps` cells.
    pub fn new(t_end: f64, n_steps: usize) -> Self {
        let params = params();
        let derived = derive_constants(&params);
        let init = init();
        let profile = default_profile(params.alpha, params.d).expect("profile");
        let ctx = BoundsContext::new(&params, &derived, &init, &profile, None).expect("context");
        let grid = TimeGrid::new(t_end, n_steps).expect("grid");
        let sampler = FbmSampler::new(params.hurst, grid, SamplerMethod::Auto).expect("sampler");
        Self {
            params,
            derived,
            init,
            profile,
            ctx,
            sampler,
        }
    }
}
