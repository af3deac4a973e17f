//! Pathwise bounds on the blow-up time of a two-component semilinear system
//! with fractional diffusion, driven by fractional Brownian motion.
//!
//! The random system is transformed into a deterministic-looking PDE per
//! path. [`bounds`] turns one fBm path into stopping times that bracket the
//! blow-up time, [`montecarlo`] aggregates them over ensembles, and [`pde`]
//! solves the transformed system directly as a cross-check.

pub mod bounds;
pub mod fbm;
pub mod model;
pub mod montecarlo;
pub mod pde;
pub mod quad;
pub mod special;
pub mod stable;

pub use bounds::{
    compute_bounds, BlowupBounds, BoundsContext, BoundsError, BoundsOptions, StoppingTime,
};
pub use fbm::{FbmPathPair, FbmSampler, SamplerMethod, TimeGrid};
pub use model::{derive_constants, DerivedConstants, InitialData, ModelParams, SpatialFunction};
pub use montecarlo::{Ensemble, EnsembleConfig, EnsembleSummary};
pub use pde::{solve_until_blowup, BlowupReport, SolverConfig, TorusGrid};
pub use stable::{default_profile, StableProfile};
