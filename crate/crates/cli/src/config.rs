//! Run configuration: one TOML (or JSON) file, `--set` overrides, seed
//! resolution.
//!
//! Precedence, highest first: `--seed`, other flags (including `--set`), the
//! file, the `BLOWUP_SEED` environment variable. Only the seed can come from
//! the environment.

use std::path::{Path, PathBuf};

use blowup_core::bounds::{SecondThreshold, SupNormEstimate};
use blowup_core::fbm::{SamplerMethod, TimeGrid};
use blowup_core::model::{InitialData, ModelParams, SpatialFunction};
use blowup_core::montecarlo::EnsembleConfig;
use blowup_core::pde::{SolverConfig, TorusGrid};
use blowup_core::stable::{default_r_max, ProfileCache, StableProfile, DEFAULT_NODES};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const SEED_ENV: &str = "BLOWUP_SEED";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; see the module docs for precedence. Default 0.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Required; every field inside is required too.
    pub params: ModelParams,
    /// Default: `f_i = 1{|x| <= 1}`.
    #[serde(default = "default_init")]
    pub init: InitialData,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default)]
    pub stable: StableSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub pde: PdeSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_init() -> InitialData {
    InitialData::Scaled {
        c1: 1.0,
        c2: 1.0,
        psi: SpatialFunction::Indicator {
            radius: 1.0,
            height: 1.0,
        },
    }
}

/// fBm time grid. Defaults: `t_end = 10`, `n_steps = 1000`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub t_end: f64,
    pub n_steps: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            n_steps: 1000,
        }
    }
}

/// Defaults: `r0` from `p(r0, 0) = 1/2`, shared second threshold and
/// sup-norm estimate, automatic sampler.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsSection {
    pub r0: Option<f64>,
    pub second_threshold: SecondThreshold,
    pub sup_norm_estimate: SupNormEstimate,
    pub sampler: SamplerMethod,
}

/// Radial profile resolution. Defaults: `r_max` by `alpha`, 401 nodes, no
/// cache.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StableSection {
    pub r_max: Option<f64>,
    pub nodes: usize,
    pub cache_dir: Option<PathBuf>,
}

impl Default for StableSection {
    fn default() -> Self {
        Self {
            r_max: None,
            nodes: DEFAULT_NODES,
            cache_dir: None,
        }
    }
}

impl StableSection {
    pub fn profile(&self, alpha: f64, d: usize) -> Result<StableProfile, CliError> {
        let r_max = self.r_max.unwrap_or_else(|| default_r_max(alpha));
        Ok(match &self.cache_dir {
            Some(dir) => ProfileCache::new(dir).load_or_build(alpha, d, r_max, self.nodes)?,
            None => blowup_core::stable::build_profile(alpha, d, r_max, self.nodes)?,
        })
    }
}

/// Defaults: 1000 paths, no query times, 95% intervals, automatic `t_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub n_paths: usize,
    pub query_times: Vec<f64>,
    pub confidence: f64,
    pub t_max: Option<f64>,
    pub zero_noise: bool,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            n_paths: 1000,
            query_times: Vec::new(),
            confidence: 0.95,
            t_max: None,
            zero_noise: false,
        }
    }
}

/// Spectral run on `[-L, L)^d`. Defaults: `L = 20`, `n = 256`, `dt = 1e-3`,
/// `M = 1e8`, `t_end` = grid horizon, confirmation on, no snapshots.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PdeSection {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: usize,
    pub dt: f64,
    pub m_blowup: f64,
    pub t_end: Option<f64>,
    pub confirm: bool,
    pub snapshot_stride: usize,
    pub zero_noise: bool,
}

impl Default for PdeSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self {
            half_width: 20.0,
            n: 256,
            dt: s.dt,
            m_blowup: s.m_blowup,
            t_end: None,
            confirm: s.confirm,
            snapshot_stride: s.snapshot_stride,
            zero_noise: false,
        }
    }
}

/// Defaults: print to stdout only; per-path CSV when writing to a directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub per_path_csv: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: None,
            per_path_csv: true,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate()?;
        self.init.validate()?;
        self.time_grid()?;
        Ok(())
    }

    pub fn time_grid(&self) -> Result<TimeGrid, CliError> {
        Ok(TimeGrid::new(self.grid.t_end, self.grid.n_steps)?)
    }

    pub fn profile(&self) -> Result<StableProfile, CliError> {
        self.stable.profile(self.params.alpha, self.params.d)
    }

    pub fn ensemble_config(&self, seed: u64) -> Result<EnsembleConfig, CliError> {
        let e = &self.ensemble;
        Ok(EnsembleConfig {
            n_paths: e.n_paths,
            grid: self.time_grid()?,
            master_seed: seed,
            params: self.params.clone(),
            init: self.init.clone(),
            query_times: e.query_times.clone(),
            r0: self.bounds.r0,
            confidence: e.confidence,
            t_max: e.t_max,
            sampler: self.bounds.sampler,
            second_threshold: self.bounds.second_threshold,
            sup_norm_estimate: self.bounds.sup_norm_estimate,
            zero_noise: e.zero_noise,
        })
    }

    pub fn torus(&self) -> Result<TorusGrid, CliError> {
        Ok(TorusGrid::new(
            self.params.d,
            self.pde.half_width,
            self.pde.n,
        )?)
    }

    pub fn solver_config(&self) -> Result<SolverConfig, CliError> {
        let p = &self.pde;
        let cfg = SolverConfig {
            dt: p.dt,
            m_blowup: p.m_blowup,
            t_end: p.t_end.unwrap_or(self.grid.t_end),
            confirm: p.confirm,
            snapshot_stride: p.snapshot_stride,
            ..SolverConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// An emitted JSON document carries its config under this key; feeding
/// such a file back as `--config` reproduces the run.
#[derive(Deserialize)]
struct Envelope {
    config: RunConfig,
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Reads the config file and applies `key.path=value` overrides.
///
/// Without overrides the file is deserialised directly so that errors carry
/// line and column.
pub fn load(path: &Path, overrides: &[String]) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let where_ = path.display();
    let config = if overrides.is_empty() {
        if is_json(path) {
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("{where_}: {e}")))?;
            if value.get("config").is_some() {
                serde_json::from_str::<Envelope>(&text).map(|e| e.config)
            } else {
                serde_json::from_str(&text)
            }
            .map_err(|e| CliError::config(format!("{where_}: {e}")))?
        } else {
            toml::from_str(&text).map_err(|e| CliError::config(format!("{where_}: {e}")))?
        }
    } else {
        let mut value: Value = if is_json(path) {
            serde_json::from_str(&text).map_err(|e| CliError::config(format!("{where_}: {e}")))?
        } else {
            let table: toml::Table =
                toml::from_str(&text).map_err(|e| CliError::config(format!("{where_}: {e}")))?;
            serde_json::to_value(table)?
        };
        if let Some(inner) = value.get("config").cloned() {
            value = inner;
        }
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        serde_json::from_value(value)
            .map_err(|e| CliError::config(format!("{where_} (with --set overrides): {e}")))?
    };
    Ok(config)
}

/// `section.key=value`, with `value` read as a TOML value (bare words fall
/// back to strings).
pub fn apply_override(root: &mut Value, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("--set expects key=value, got `{spec}`")))?;
    let parsed = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => serde_json::to_value(t.remove("v").unwrap())?,
        Err(_) => Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::config(format!("--set: malformed key `{key}`")));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::config(format!("--set: `{key}` crosses a non-table value")))?;
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| CliError::config(format!("--set: `{key}` crosses a non-table value")))?;
    obj.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

/// `--seed`, then the (possibly overridden) file value, then the
/// environment, then 0.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag.or(file) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::config(format!("{SEED_ENV} = `{v}` is not an unsigned integer"))
        }),
        Err(_) => Ok(0),
    }
}
