//! Spectral solver for the transformed system `v_i = exp(-k_i . B) u_i` on a
//! periodic box.
//!
//! The box replaces R^d, so every result here is diagnostic: periodic images
//! add mass that the whole-space problem does not see.

mod diagnostics;
mod spectral;

pub use diagnostics::{
    m_diagnostic, sandwich_check, MDiagnostic, SandwichReport, SandwichViolation,
};
pub use spectral::{fractional_symbol, TorusGrid, Transform};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::BoundsError;
use crate::fbm::FbmPathPair;
use crate::model::{DerivedConstants, InitialData, ModelError, ModelParams};
use crate::stable::StableError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdeError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("grid dimension {grid} does not match model dimension {model}")]
    DimensionMismatch { grid: usize, model: usize },
    #[error("paths end at {horizon} before the requested t_end = {t_end}")]
    PathsTooShort { horizon: f64, t_end: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Stable(#[from] StableError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

/// Fields `(v1, v2)` on the grid at `time`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldState {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub time: f64,
    pub blown_up: bool,
}

impl FieldState {
    pub fn from_initial(grid: &TorusGrid, init: &InitialData) -> Self {
        let f1 = init.component(0);
        let f2 = init.component(1);
        let pts: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.point(i)).collect();
        Self {
            v1: pts.iter().map(|x| f1.eval(x)).collect(),
            v2: pts.iter().map(|x| f2.eval(x)).collect(),
            time: 0.0,
            blown_up: false,
        }
    }

    pub fn field(&self, i: usize) -> &[f64] {
        if i == 0 {
            &self.v1
        } else {
            &self.v2
        }
    }

    pub fn sup(&self) -> f64 {
        self.v1
            .iter()
            .chain(&self.v2)
            .fold(0.0, |m, &v| if v.is_nan() { f64::NAN } else { m.max(v) })
    }

    /// `u_i = exp(k_i . B(t)) v_i`, the solution of the original system.
    pub fn to_u(&self, paths: &FbmPathPair, params: &ModelParams) -> [Vec<f64>; 2] {
        let (b1, b2) = paths.value_at(self.time);
        let k = params.k;
        let f = |i: usize| (k[i][0] * b1 + k[i][1] * b2).exp();
        let (a, b) = (f(0), f(1));
        [
            self.v1.iter().map(|v| a * v).collect(),
            self.v2.iter().map(|v| b * v).collect(),
        ]
    }

    /// CSV rows `t,index,v1,v2`.
    pub fn write_csv_rows<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        for (j, (a, b)) in self.v1.iter().zip(&self.v2).enumerate() {
            writeln!(out, "{},{j},{a},{b}", self.time)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub dt: f64,
    pub m_blowup: f64,
    pub t_end: f64,
    /// Run a second pass at `dt / 2` and compare blow-up times.
    pub confirm: bool,
    /// Keep every `stride`-th state (0 keeps none besides the first and last).
    pub snapshot_stride: usize,
    /// Test hook: integrate the linear part only.
    #[serde(skip)]
    pub nonlinearity: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            m_blowup: 1e8,
            t_end: 1.0,
            confirm: true,
            snapshot_stride: 0,
            nonlinearity: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), PdeError> {
        let bad = |m: String| Err(PdeError::InvalidConfig(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.m_blowup > 0.0) {
            return bad(format!("m_blowup must be positive, got {}", self.m_blowup));
        }
        Ok(())
    }
}

/// Integrating-factor Heun stepper for one parameter set and step size.
#[derive(Clone, Debug)]
pub struct Solver {
    pub grid: TorusGrid,
    pub dt: f64,
    transform: Transform,
    /// `exp((-|k|^alpha + N_i) dt)` per mode.
    factors: [Vec<f64>; 2],
    mask: Vec<bool>,
    weights: [[f64; 2]; 2],
    betas: [f64; 2],
    nonlinearity: bool,
}

impl Solver {
    pub fn new(
        grid: TorusGrid,
        params: &ModelParams,
        derived: &DerivedConstants,
        dt: f64,
    ) -> Result<Self, PdeError> {
        grid.validate()?;
        // theorem hypotheses (nonzero noise, positive drifts) are not needed
        // to integrate, and the ODE oracles deliberately violate them
        if !(params.alpha > 0.0 && params.alpha <= 2.0 && params.beta1 > 0.0 && params.beta2 > 0.0)
        {
            return Err(PdeError::InvalidConfig(
                "need 0 < alpha <= 2 and beta_i > 0".into(),
            ));
        }
        if grid.d != params.d {
            return Err(PdeError::DimensionMismatch {
                grid: grid.d,
                model: params.d,
            });
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(PdeError::InvalidConfig(format!(
                "dt must be positive, got {dt}"
            )));
        }
        let symbols: Vec<f64> = (0..grid.len())
            .map(|m| fractional_symbol(&grid.wavevector(m), params.alpha))
            .collect();
        let factor = |i: usize| {
            symbols
                .iter()
                .map(|s| ((s + derived.n(i)) * dt).exp())
                .collect()
        };
        Ok(Self {
            grid,
            dt,
            transform: Transform::new(&grid),
            factors: [factor(0), factor(1)],
            mask: grid.dealias_mask(),
            weights: [derived.weights1, derived.weights2],
            betas: [params.beta1, params.beta2],
            nonlinearity: true,
        })
    }

    pub fn with_nonlinearity(mut self, on: bool) -> Self {
        self.nonlinearity = on;
        self
    }

    /// Dealiased transform of `exp(w_i . B) v_j^{1 + beta_i}`.
    fn reaction(&self, i: usize, other: &[f64], b: (f64, f64)) -> Vec<Complex64> {
        let w = self.weights[i];
        let pre = (w[0] * b.0 + w[1] * b.1).exp();
        let p = 1.0 + self.betas[i];
        let phys: Vec<f64> = other.iter().map(|&v| pre * v.max(0.0).powf(p)).collect();
        let mut spec = self.transform.forward(&phys);
        for (z, &keep) in spec.iter_mut().zip(&self.mask) {
            if !keep {
                *z = Complex64::default();
            }
        }
        spec
    }

    /// One step; returns the new state and the clipped fraction of mass.
    pub fn step(&self, state: &FieldState, paths: &FbmPathPair) -> (FieldState, f64) {
        let dt = self.dt;
        let hat = [
            self.transform.forward(&state.v1),
            self.transform.forward(&state.v2),
        ];
        let (v1, v2) = if self.nonlinearity {
            let b = paths.value_at(state.time + 0.5 * dt);
            let n0 = [
                self.reaction(0, &state.v2, b),
                self.reaction(1, &state.v1, b),
            ];
            // predictor: E (v + dt N(v))
            let pred: Vec<Vec<f64>> = (0..2)
                .map(|i| {
                    let spec = hat[i]
                        .iter()
                        .zip(&n0[i])
                        .zip(&self.factors[i])
                        .map(|((a, n), e)| (a + n * dt) * e)
                        .collect();
                    self.transform.inverse(spec)
                })
                .collect();
            let n1 = [self.reaction(0, &pred[1], b), self.reaction(1, &pred[0], b)];
            let corr = |i: usize| {
                let spec = (0..hat[i].len())
                    .map(|m| {
                        let e = self.factors[i][m];
                        hat[i][m] * e + (n0[i][m] * e + n1[i][m]) * (0.5 * dt)
                    })
                    .collect();
                self.transform.inverse(spec)
            };
            (corr(0), corr(1))
        } else {
            let lin = |i: usize| {
                let spec = hat[i]
                    .iter()
                    .zip(&self.factors[i])
                    .map(|(a, e)| a * e)
                    .collect();
                self.transform.inverse(spec)
            };
            (lin(0), lin(1))
        };
        let mut next = FieldState {
            v1,
            v2,
            time: state.time + dt,
            blown_up: false,
        };
        let clipped = clip_negative(&mut next);
        (next, clipped)
    }
}

/// Zeroes negative entries; returns clipped mass over total mass.
fn clip_negative(state: &mut FieldState) -> f64 {
    let mut neg = 0.0;
    let mut total = 0.0;
    for v in state.v1.iter_mut().chain(state.v2.iter_mut()) {
        total += v.abs();
        if *v < 0.0 {
            neg -= *v;
            *v = 0.0;
        }
    }
    if total > 0.0 {
        neg / total
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupStatus {
    BlowUp,
    HorizonExhausted,
}

/// Result of one pass at a fixed step size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PassResult {
    pub dt: f64,
    pub status: BlowupStatus,
    /// Time of the step at which the threshold was reached.
    pub tau_num: Option<f64>,
    pub steps: usize,
    pub max_clipped_fraction: f64,
    pub final_sup: f64,
    #[serde(skip)]
    pub trajectory: Vec<FieldState>,
}

/// Blow-up report with the optional `dt / 2` confirmation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlowupReport {
    pub status: BlowupStatus,
    pub tau_num: Option<f64>,
    pub tau_half: Option<f64>,
    /// Both passes agree: same status and blow-up times within `5 dt`.
    pub resolved: bool,
    pub coarse: PassResult,
    pub fine: Option<PassResult>,
}

/// Integrates from `initial` at fixed `dt` until `sup v >= m_blowup`, a
/// non-finite value appears, or `t_end` is reached.
pub fn integrate(
    solver: &Solver,
    initial: FieldState,
    paths: &FbmPathPair,
    m_blowup: f64,
    t_end: f64,
    snapshot_stride: usize,
) -> PassResult {
    let n_steps = ((t_end - initial.time) / solver.dt - 1e-9).ceil().max(0.0) as usize;
    let mut state = initial;
    let mut trajectory = vec![state.clone()];
    let mut max_clipped = 0.0f64;
    let mut steps = 0;
    let mut status = BlowupStatus::HorizonExhausted;
    while steps < n_steps {
        let (next, clipped) = solver.step(&state, paths);
        state = next;
        steps += 1;
        let sup = state.sup();
        if !sup.is_finite() || sup >= m_blowup {
            state.blown_up = true;
            status = BlowupStatus::BlowUp;
            break;
        }
        max_clipped = max_clipped.max(clipped);
        if snapshot_stride > 0 && steps % snapshot_stride == 0 && steps < n_steps {
            trajectory.push(state.clone());
        }
    }
    let tau_num = (status == BlowupStatus::BlowUp).then_some(state.time);
    let final_sup = state.sup();
    if trajectory.last().map(|s| s.time) != Some(state.time) {
        trajectory.push(state);
    }
    PassResult {
        dt: solver.dt,
        status,
        tau_num,
        steps,
        max_clipped_fraction: max_clipped,
        final_sup,
        trajectory,
    }
}

/// Runs the solver from the initial data and, if configured, repeats at
/// `dt / 2` to confirm the blow-up time.
pub fn solve_until_blowup(
    grid: TorusGrid,
    init: &InitialData,
    paths: &FbmPathPair,
    params: &ModelParams,
    derived: &DerivedConstants,
    config: &SolverConfig,
) -> Result<BlowupReport, PdeError> {
    config.validate()?;
    init.validate()?;
    let horizon = paths.grid.t_end;
    if config.t_end > horizon * (1.0 + 1e-12) {
        return Err(PdeError::PathsTooShort {
            horizon,
            t_end: config.t_end,
        });
    }
    let run = |dt: f64, stride: usize| -> Result<PassResult, PdeError> {
        let solver = Solver::new(grid, params, derived, dt)?.with_nonlinearity(config.nonlinearity);
        let start = FieldState::from_initial(&grid, init);
        Ok(integrate(
            &solver,
            start,
            paths,
            config.m_blowup,
            config.t_end,
            stride,
        ))
    };
    let coarse = run(config.dt, config.snapshot_stride)?;
    let fine = if config.confirm {
        Some(run(0.5 * config.dt, 2 * config.snapshot_stride)?)
    } else {
        None
    };
    let resolved = match &fine {
        None => true,
        Some(f) => {
            f.status == coarse.status
                && match (coarse.tau_num, f.tau_num) {
                    (Some(a), Some(b)) => (a - b).abs() <= 5.0 * config.dt,
                    _ => true,
                }
        }
    };
    Ok(BlowupReport {
        status: coarse.status,
        tau_num: coarse.tau_num,
        tau_half: fine.as_ref().and_then(|f| f.tau_num),
        resolved,
        coarse,
        fine,
    })
}
