//! Exact sampling of pairs of independent fractional Brownian motions on a
//! uniform grid.
//!
//! Seeding: path `i` of an ensemble with master seed `m` uses the seed
//! [`derive_seed`]`(m, i)`. Inside a path, component `B_1` reads ChaCha8
//! stream 0 and `B_2` reads stream 1 of that seed, so every path is
//! reproducible independently of scheduling.

mod cholesky;
mod circulant;

use std::io::{self, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FbmError {
    #[error("Hurst index {0} outside [1/2, 1)")]
    InvalidHurst(f64),
    #[error("invalid grid: t_end = {t_end}, n_steps = {n_steps}")]
    InvalidGrid { t_end: f64, n_steps: usize },
    #[error("covariance is numerically indefinite at row {row} (pivot {pivot:e})")]
    CholeskyFailure { row: usize, pivot: f64 },
}

/// Uniform grid `t_j = j * t_end / n_steps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_end: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self, FbmError> {
        let g = Self { t_end, n_steps };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), FbmError> {
        if self.t_end > 0.0 && self.t_end.is_finite() && self.n_steps >= 1 {
            Ok(())
        } else {
            Err(FbmError::InvalidGrid {
                t_end: self.t_end,
                n_steps: self.n_steps,
            })
        }
    }

    pub fn step(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.t_end / self.n_steps as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|j| self.node(j)).collect()
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// `Cov(B(s), B(t))` for fractional Brownian motion.
pub fn fbm_covariance(hurst: f64, s: f64, t: f64) -> f64 {
    let h2 = 2.0 * hurst;
    0.5 * (s.powf(h2) + t.powf(h2) - (t - s).abs().powf(h2))
}

/// SplitMix64 finalizer applied to `master` advanced by `index + 1` golden-ratio steps.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Two independent fBm paths on a shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FbmPathPair {
    pub grid: TimeGrid,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub hurst: f64,
    /// Seed the pair was drawn with; `None` for synthetic paths.
    pub seed: Option<u64>,
}

impl FbmPathPair {
    /// Degenerate pair `B = 0`, used to check deterministic closed forms.
    pub fn zeros(grid: TimeGrid, hurst: f64) -> Self {
        Self {
            grid,
            b1: vec![0.0; grid.len()],
            b2: vec![0.0; grid.len()],
            hurst,
            seed: None,
        }
    }

    /// Linear interpolation of `(B_1(t), B_2(t))`; clamps to the grid ends.
    #[inline]
    pub fn value_at(&self, t: f64) -> (f64, f64) {
        let n = self.grid.n_steps;
        let x = (t / self.grid.step()).max(0.0);
        let j = (x.floor() as usize).min(n - 1);
        let w = (x - j as f64).min(1.0);
        (
            self.b1[j] + w * (self.b1[j + 1] - self.b1[j]),
            self.b2[j] + w * (self.b2[j + 1] - self.b2[j]),
        )
    }

    /// `w[0] * B_1 + w[1] * B_2` at every node.
    pub fn combination(&self, w: [f64; 2]) -> Vec<f64> {
        self.b1
            .iter()
            .zip(&self.b2)
            .map(|(a, b)| w[0] * a + w[1] * b)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,b1,b2")?;
        for j in 0..self.grid.len() {
            writeln!(out, "{},{},{}", self.grid.node(j), self.b1[j], self.b2[j])?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMethod {
    /// Circulant embedding with automatic Cholesky fallback.
    #[default]
    Auto,
    Cholesky,
}

#[derive(Clone)]
enum Factor {
    Circulant(Arc<circulant::Embedding>),
    Cholesky(Arc<cholesky::LowerFactor>),
}

/// Reusable sampler for a fixed `(H, grid)`; cheap to clone and `Sync`.
#[derive(Clone)]
pub struct FbmSampler {
    hurst: f64,
    grid: TimeGrid,
    factor: Factor,
}

impl std::fmt::Debug for FbmSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FbmSampler")
            .field("hurst", &self.hurst)
            .field("grid", &self.grid)
            .field("method", &self.method_name())
            .finish()
    }
}

impl FbmSampler {
    pub fn new(hurst: f64, grid: TimeGrid, method: SamplerMethod) -> Result<Self, FbmError> {
        if !(0.5..1.0).contains(&hurst) {
            return Err(FbmError::InvalidHurst(hurst));
        }
        grid.validate()?;
        let embedding = match method {
            SamplerMethod::Auto => circulant::Embedding::build(hurst, grid.n_steps),
            SamplerMethod::Cholesky => None,
        };
        let factor = match embedding {
            Some(e) => Factor::Circulant(Arc::new(e)),
            None => Factor::Cholesky(Arc::new(cholesky::LowerFactor::for_fbm(hurst, grid)?)),
        };
        Ok(Self {
            hurst,
            grid,
            factor,
        })
    }

    pub fn method_name(&self) -> &'static str {
        match self.factor {
            Factor::Circulant(_) => "circulant",
            Factor::Cholesky(_) => "cholesky",
        }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn sample(&self, seed: u64) -> FbmPathPair {
        let b1 = self.component(seed, 0);
        let b2 = self.component(seed, 1);
        FbmPathPair {
            grid: self.grid,
            b1,
            b2,
            hurst: self.hurst,
            seed: Some(seed),
        }
    }

    fn component(&self, seed: u64, stream: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut normal = || -> f64 { rng.sample(StandardNormal) };
        match &self.factor {
            Factor::Circulant(e) => {
                let scale = self.grid.step().powf(self.hurst);
                let noise = e.sample_fgn(&mut normal);
                let mut path = Vec::with_capacity(self.grid.len());
                path.push(0.0);
                let mut acc = 0.0;
                for x in noise {
                    acc += scale * x;
                    path.push(acc);
                }
                path
            }
            Factor::Cholesky(l) => l.sample(&mut normal),
        }
    }
}

/// Convenience wrapper around [`FbmSampler`] for a single pair.
pub fn sample_fbm_pair(hurst: f64, grid: TimeGrid, seed: u64) -> Result<FbmPathPair, FbmError> {
    Ok(FbmSampler::new(hurst, grid, SamplerMethod::Auto)?.sample(seed))
}
