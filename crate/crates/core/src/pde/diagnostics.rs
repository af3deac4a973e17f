//! Comparisons of solver output against the analytic objects.

use serde::Serialize;

use super::{FieldState, PdeError, TorusGrid};
use crate::bounds::{growth_factor_with, BoundsError, SupNormEstimate};
use crate::fbm::FbmPathPair;
use crate::model::{DerivedConstants, InitialData, ModelParams};
use crate::stable::{density, semigroup_action, StableError, StableProfile};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MDiagnostic {
    pub time: f64,
    /// `m_i(t) = int_box p(t, y) v_i(t, y) dy`.
    pub m: [f64; 2],
    /// `int_box p(t, y) dy`; the rest of the density lies outside the box.
    pub box_mass: f64,
}

/// Riemann sum of `p(t, .) v_i` over the grid nodes.
pub fn m_diagnostic(
    state: &FieldState,
    grid: &TorusGrid,
    profile: &StableProfile,
) -> Result<MDiagnostic, PdeError> {
    let t = state.time;
    if !(t > 0.0) {
        return Err(StableError::NonpositiveTime(t).into());
    }
    let vol = grid.cell_volume();
    let mut m = [0.0; 2];
    let mut box_mass = 0.0;
    for j in 0..grid.len() {
        let p = density(profile, t, &grid.point(j))? * vol;
        box_mass += p;
        m[0] += p * state.v1[j];
        m[1] += p * state.v2[j];
    }
    Ok(MDiagnostic {
        time: t,
        m,
        box_mass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichViolation {
    pub time: f64,
    pub index: usize,
    pub point: Vec<f64>,
    /// 1-based component.
    pub component: usize,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    pub tol: f64,
    pub checked: usize,
    /// States skipped because `G_i` had diverged or the path ended.
    pub skipped_times: Vec<f64>,
    pub violations: Vec<SandwichViolation>,
}

impl SandwichReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `(1 - tol) T(t) f_i <= v_i <= (1 + tol) T(t) f_i G_i(t)` at up to
/// `max_points` nodes per state, with `T(t) = e^{lambda t} S_t` evaluated by
/// whole-space quadrature. An absolute slack of `1e-8 sup v` absorbs the
/// spectral noise floor. `estimate` selects the growth factor `G_i`; the
/// sup-norm one is not an upper bound for data with `|f|_1 > |f|_inf`.
#[allow(clippy::too_many_arguments)]
pub fn sandwich_check(
    trajectory: &[FieldState],
    grid: &TorusGrid,
    paths: &FbmPathPair,
    params: &ModelParams,
    derived: &DerivedConstants,
    init: &InitialData,
    profile: &StableProfile,
    tol: f64,
    max_points: usize,
    estimate: SupNormEstimate,
) -> Result<SandwichReport, PdeError> {
    if init.as_scaled().is_none() {
        return Err(BoundsError::RequiresScaledData.into());
    }
    let lambda = derived.lambda.ok_or(BoundsError::MissingLambda)?;
    let growth = growth_factor_with(paths, params, derived, init, profile.p10, estimate)?;
    let horizon = paths.grid.t_end;
    let stride = grid.len().div_ceil(max_points.max(1));
    let f = [init.component(0), init.component(1)];
    let mut report = SandwichReport {
        tol,
        checked: 0,
        skipped_times: Vec::new(),
        violations: Vec::new(),
    };
    for state in trajectory {
        let t = state.time;
        let g = [
            interp(&growth.times, &growth.g[0], t),
            interp(&growth.times, &growth.g[1], t),
        ];
        if state.blown_up || t > horizon || !g.iter().all(|v| v.is_finite()) {
            report.skipped_times.push(t);
            continue;
        }
        // spectral truncation leaves a floor of about 1e-10 relative to the
        // peak where the whole-space values underflow
        let atol = 1e-8 * state.sup();
        for j in (0..grid.len()).step_by(stride) {
            let x = grid.point(j);
            for i in 0..2 {
                let tf = if t == 0.0 {
                    f[i].eval(&x)
                } else {
                    (lambda * t).exp() * semigroup_action(profile, &f[i], t, &x)?
                };
                let lower = (1.0 - tol) * tf;
                let upper = (1.0 + tol) * tf * g[i];
                let v = state.field(i)[j];
                report.checked += 1;
                if v < lower - atol || v > upper + atol {
                    report.violations.push(SandwichViolation {
                        time: t,
                        index: j,
                        point: x.clone(),
                        component: i + 1,
                        value: v,
                        lower,
                        upper,
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Piecewise-linear interpolation; infinite once either neighbour is.
fn interp(times: &[f64], values: &[f64], t: f64) -> f64 {
    let k = times.partition_point(|&s| s < t);
    if k == 0 {
        return values[0];
    }
    if k == times.len() {
        return f64::INFINITY;
    }
    let (t0, t1) = (times[k - 1], times[k]);
    let (v0, v1) = (values[k - 1], values[k]);
    if !(v0.is_finite() && v1.is_finite()) {
        return f64::INFINITY;
    }
    v0 + (t - t0) / (t1 - t0) * (v1 - v0)
}
