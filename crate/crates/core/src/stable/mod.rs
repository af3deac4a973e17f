//! Rotationally symmetric alpha-stable transition densities.
//!
//! `p(t, x)` has Fourier transform `exp(-t |u|^alpha)`; at `alpha = 2` this is
//! the heat kernel `(4 pi t)^{-d/2} exp(-|x|^2 / 4t)`. The unit-time radial
//! profile is tabulated once and reused through the scaling identity
//! `p(t, x) = t^{-d/alpha} p(1, t^{-1/alpha} x)`.

mod cache;
mod interp;
mod inversion;

pub use cache::ProfileCache;
pub use interp::Tail;

use std::f64::consts::PI;

use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::model::SpatialFunction;
use crate::quad::{adaptive, Tolerance};
use interp::{hermite, limit_slopes};
use inversion::Inverter;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StableError {
    #[error("invalid stable parameters: {0}")]
    InvalidParameters(String),
    #[error("radial inversion did not converge at r = {r}: {detail}")]
    QuadratureNonConvergence { r: f64, detail: String },
    #[error("density requested at nonpositive time {0}")]
    NonpositiveTime(f64),
    #[error("quadrature of non-constant functions is limited to d <= 3 (got d = {0})")]
    UnsupportedDimension(usize),
    #[error("profile cache: {0}")]
    Cache(String),
}

/// `p(1, 0) = Gamma(d/alpha) / (alpha 2^{d-1} pi^{d/2} Gamma(d/2))`.
pub fn p_unit_origin(alpha: f64, d: usize) -> f64 {
    let df = d as f64;
    gamma(df / alpha) / (alpha * 2f64.powf(df - 1.0) * PI.powf(df / 2.0) * gamma(df / 2.0))
}

/// Surface area of the unit sphere in R^d.
pub fn sphere_area(d: usize) -> f64 {
    let df = d as f64;
    2.0 * PI.powf(df / 2.0) / gamma(df / 2.0)
}

pub fn default_r_max(alpha: f64) -> f64 {
    if alpha == 2.0 {
        8.0
    } else {
        20.0
    }
}

pub const DEFAULT_NODES: usize = 401;

/// Tabulated unit-time radial density with monotone interpolation.
#[derive(Clone, Debug, PartialEq)]
pub struct StableProfile {
    pub alpha: f64,
    pub d: usize,
    pub r_max: f64,
    pub r_nodes: Vec<f64>,
    pub p1_values: Vec<f64>,
    /// Interpolation slopes, exact up to the monotonicity limiter.
    pub slopes: Vec<f64>,
    /// Closed-form `p(1, 0)`.
    pub p10: f64,
    pub tail: Tail,
}

fn check_params(alpha: f64, d: usize) -> Result<(), StableError> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(StableError::InvalidParameters(format!(
            "alpha = {alpha} not in (0, 2]"
        )));
    }
    if d == 0 {
        return Err(StableError::InvalidParameters("d must be >= 1".into()));
    }
    Ok(())
}

/// Tabulates `p(1, r)` on `n_nodes` uniform nodes of `[0, r_max]`.
pub fn build_profile(
    alpha: f64,
    d: usize,
    r_max: f64,
    n_nodes: usize,
) -> Result<StableProfile, StableError> {
    check_params(alpha, d)?;
    if !(r_max > 0.0 && r_max.is_finite()) || n_nodes < 3 {
        return Err(StableError::InvalidParameters(format!(
            "need r_max > 0 and at least 3 nodes (r_max = {r_max}, n_nodes = {n_nodes})"
        )));
    }
    let value = Inverter::new(alpha, d);
    let slope = Inverter::new(alpha, d + 2);
    let h = r_max / (n_nodes - 1) as f64;
    let r_nodes: Vec<f64> = (0..n_nodes).map(|j| j as f64 * h).collect();
    let mut p1_values = Vec::with_capacity(n_nodes);
    let mut slopes = Vec::with_capacity(n_nodes);
    p1_values.push(value.origin()?);
    slopes.push(0.0);
    for &r in &r_nodes[1..] {
        p1_values.push(value.at(r)?);
        // p_d'(r) = -2 pi r p_{d+2}(r)
        slopes.push(-2.0 * PI * r * slope.at(r)?);
    }
    from_tables(alpha, d, r_nodes, p1_values, slopes)
}

pub(crate) fn from_tables(
    alpha: f64,
    d: usize,
    r_nodes: Vec<f64>,
    p1_values: Vec<f64>,
    mut slopes: Vec<f64>,
) -> Result<StableProfile, StableError> {
    for (j, w) in p1_values.windows(2).enumerate() {
        if !(w[1] > 0.0) || w[1] > w[0] {
            return Err(StableError::QuadratureNonConvergence {
                r: r_nodes[j + 1],
                detail: format!(
                    "table not positive and nonincreasing ({} -> {})",
                    w[0], w[1]
                ),
            });
        }
    }
    let n = r_nodes.len();
    let h = r_nodes[1] - r_nodes[0];
    limit_slopes(&p1_values, &mut slopes, h);
    let tail = Tail::fit(
        alpha,
        d,
        r_nodes[n - 2],
        p1_values[n - 2],
        r_nodes[n - 1],
        p1_values[n - 1],
    );
    Ok(StableProfile {
        alpha,
        d,
        r_max: r_nodes[n - 1],
        r_nodes,
        p1_values,
        slopes,
        p10: p_unit_origin(alpha, d),
        tail,
    })
}

/// Profile on the default grid for `alpha`.
pub fn default_profile(alpha: f64, d: usize) -> Result<StableProfile, StableError> {
    build_profile(alpha, d, default_r_max(alpha), DEFAULT_NODES)
}

impl StableProfile {
    fn step(&self) -> f64 {
        self.r_nodes[1]
    }

    /// `p(1, r)` from the table, or the fitted tail beyond `r_max`.
    pub fn unit(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= self.r_max {
            return if r == self.r_max {
                *self.p1_values.last().unwrap()
            } else {
                self.tail.eval(self.alpha, self.d, r)
            };
        }
        let h = self.step();
        let x = r / h;
        let j = (x.floor() as usize).min(self.r_nodes.len() - 2);
        hermite(
            self.p1_values[j],
            self.p1_values[j + 1],
            self.slopes[j],
            self.slopes[j + 1],
            h,
            x - j as f64,
        )
    }

    /// `p(t, r)` for a point at distance `r` from the origin.
    pub fn density_radial(&self, t: f64, r: f64) -> Result<f64, StableError> {
        if !(t > 0.0) {
            return Err(StableError::NonpositiveTime(t));
        }
        let inv = 1.0 / self.alpha;
        Ok(t.powf(-(self.d as f64) * inv) * self.unit(r * t.powf(-inv)))
    }

    /// `p(t, 0) = t^{-d/alpha} p(1, 0)` using the closed-form origin value.
    pub fn origin(&self, t: f64) -> f64 {
        t.powf(-(self.d as f64) / self.alpha) * self.p10
    }

    /// Mass of `p(1, .)` over R^d: table by Gauss–Kronrod per cell plus the
    /// analytic tail.
    pub fn total_mass(&self) -> f64 {
        let d = self.d;
        let radial = |r: f64| self.unit(r) * r.powi(d as i32 - 1);
        let tol = Tolerance::new(1e-15, 1e-13);
        let mut inner = 0.0;
        for w in self.r_nodes.windows(2) {
            inner += adaptive(radial, w[0], w[1], tol).value;
        }
        let r = self.r_max;
        let outer = match self.tail {
            Tail::Gaussian { b, .. } => adaptive(radial, r, r + 40.0 / b.sqrt(), tol).value,
            series => series.radial_mass(self.alpha, r).unwrap_or(0.0),
        };
        sphere_area(d) * (inner + outer)
    }
}

/// `p(t, x)`; see [`StableProfile::density_radial`].
pub fn density(profile: &StableProfile, t: f64, x: &[f64]) -> Result<f64, StableError> {
    profile.density_radial(t, x.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// `r0 = (2 p(1,0))^{alpha/d}`, the time at which `p(r0, 0) = 1/2`.
pub fn default_r0(profile: &StableProfile) -> f64 {
    let r0 = (2.0 * profile.p10).powf(profile.alpha / profile.d as f64);
    debug_assert!(profile.origin(r0) < 1.0);
    r0
}

const SEMIGROUP_TOL: Tolerance = Tolerance::new(1e-12, 1e-10);

/// `E[f(X_t)] = int p(t, y) f(y) dy` for radial `f`, as a one-dimensional
/// radial integral (valid in any dimension).
pub fn expected_under_density(
    profile: &StableProfile,
    f: &SpatialFunction,
    t: f64,
) -> Result<f64, StableError> {
    if !(t > 0.0) {
        return Err(StableError::NonpositiveTime(t));
    }
    if let Some(c) = f.is_constant() {
        return Ok(c);
    }
    let radius = f
        .support_radius()
        .expect("non-constant shapes have compact support");
    let d = profile.d;
    let mut err = None;
    let res = adaptive(
        |r| match profile.density_radial(t, r) {
            Ok(p) => p * f.eval_radial(r) * r.powi(d as i32 - 1),
            Err(e) => {
                err = Some(e);
                0.0
            }
        },
        0.0,
        radius,
        SEMIGROUP_TOL,
    );
    if let Some(e) = err {
        return Err(e);
    }
    if !res.converged {
        return Err(StableError::QuadratureNonConvergence {
            r: radius,
            detail: format!("expectation at t = {t}: error {:e}", res.error),
        });
    }
    Ok(sphere_area(d) * res.value)
}

/// `S_t f(x) = int p(t, x - y) f(y) dy` by nested adaptive quadrature over the
/// support ball (d <= 3).
pub fn semigroup_action(
    profile: &StableProfile,
    f: &SpatialFunction,
    t: f64,
    x: &[f64],
) -> Result<f64, StableError> {
    if !(t > 0.0) {
        return Err(StableError::NonpositiveTime(t));
    }
    if let Some(c) = f.is_constant() {
        return Ok(c);
    }
    let d = profile.d;
    if d > 3 {
        return Err(StableError::UnsupportedDimension(d));
    }
    assert_eq!(x.len(), d, "point dimension must match the profile");
    let radius = f
        .support_radius()
        .expect("non-constant shapes have compact support");
    let mut y = [0.0; 3];
    let mut failed = false;
    let value = nested(profile, f, t, x, radius, 0, &mut y, &mut failed);
    if failed {
        return Err(StableError::QuadratureNonConvergence {
            r: radius,
            detail: format!("semigroup action at t = {t}, x = {x:?}"),
        });
    }
    Ok(value)
}

#[allow(clippy::too_many_arguments)]
fn nested(
    profile: &StableProfile,
    f: &SpatialFunction,
    t: f64,
    x: &[f64],
    radius: f64,
    axis: usize,
    y: &mut [f64; 3],
    failed: &mut bool,
) -> f64 {
    let d = x.len();
    let used: f64 = y[..axis].iter().map(|v| v * v).sum();
    let half = (radius * radius - used).max(0.0).sqrt();
    if half == 0.0 {
        return 0.0;
    }
    // split at the density peak and at the kink of radial shapes
    let mut cuts = vec![-half, half];
    for c in [x[axis], 0.0] {
        if c > -half && c < half {
            cuts.push(c);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let res = adaptive(
            |v| {
                y[axis] = v;
                if axis + 1 == d {
                    let dist2: f64 = (0..d).map(|k| (x[k] - y[k]).powi(2)).sum();
                    let fy = f.eval(&y[..d]);
                    if fy == 0.0 {
                        return 0.0;
                    }
                    profile.density_radial(t, dist2.sqrt()).unwrap_or(0.0) * fy
                } else {
                    nested(profile, f, t, x, radius, axis + 1, y, failed)
                }
            },
            w[0],
            w[1],
            SEMIGROUP_TOL,
        );
        *failed |= !res.converged;
        total += res.value;
    }
    total
}

/// `r_i = 2^{-2d} p(1,0) exp(N_i r0) E[f_i(X_{2^{-alpha} r0})]`.
pub fn r_constant(
    profile: &StableProfile,
    drift: f64,
    r0: f64,
    f: &SpatialFunction,
) -> Result<f64, StableError> {
    let t = 2f64.powf(-profile.alpha) * r0;
    let e = expected_under_density(profile, f, t)?;
    Ok(4f64.powi(-(profile.d as i32)) * profile.p10 * (drift * r0).exp() * e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::erf::erf;

    fn gauss(r: f64) -> f64 {
        (4.0_f64 * PI).powf(-0.5) * (-r * r / 4.0).exp()
    }

    #[test]
    fn origin_closed_forms() {
        assert!((p_unit_origin(2.0, 1) - 0.282_094_791_773_878_1).abs() < 1e-15);
        assert!((p_unit_origin(1.0, 1) - 1.0 / PI).abs() < 1e-15);
        assert!((p_unit_origin(2.0, 2) - 1.0 / (4.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn gaussian_profile_interpolates_off_nodes() {
        let p = build_profile(2.0, 1, 6.0, 121).unwrap();
        for r in [0.0, 0.013, 1.0, 2.0, 3.33, 5.9] {
            let v = p.unit(r);
            assert!((v / gauss(r) - 1.0).abs() < 1e-7, "r={r}: {v}");
        }
        assert!((p.density_radial(4.0, 0.0).unwrap() - 0.141_047_395_886_939).abs() < 1e-12);
        assert_eq!(
            p.density_radial(0.0, 1.0),
            Err(StableError::NonpositiveTime(0.0))
        );
    }

    #[test]
    fn cauchy_density_scaling() {
        let p = build_profile(1.0, 1, 20.0, 401).unwrap();
        let v = density(&p, 2.0, &[2.0]).unwrap();
        assert!((v - 1.0 / (4.0 * PI)).abs() < 1e-10);
        // beyond the table the tail fit takes over
        let far = p.unit(40.0);
        let want = 1.0 / (PI * (1.0 + 1600.0));
        assert!((far / want - 1.0).abs() < 1e-4, "{far} vs {want}");
    }

    #[test]
    fn profiles_have_unit_mass() {
        for (alpha, d) in [(2.0, 1), (1.0, 1), (1.5, 2), (2.0, 2)] {
            let p = default_profile(alpha, d).unwrap();
            assert!(
                (p.total_mass() - 1.0).abs() < 1e-6,
                "alpha={alpha} d={d}: {}",
                p.total_mass()
            );
        }
    }

    #[test]
    fn r0_halves_the_origin_density() {
        let p = build_profile(2.0, 1, 6.0, 61).unwrap();
        let r0 = default_r0(&p);
        assert!((r0 - 1.0 / PI).abs() < 1e-12);
        assert!((p.origin(r0) - 0.5).abs() < 1e-14);
        let c = build_profile(1.0, 1, 6.0, 61).unwrap();
        assert!((default_r0(&c) - 2.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn expectation_of_indicator() {
        let p = build_profile(2.0, 1, 8.0, 201).unwrap();
        let f = SpatialFunction::Indicator {
            radius: 1.0,
            height: 1.0,
        };
        let e = expected_under_density(&p, &f, 1.0).unwrap();
        assert!((e - erf(0.5)).abs() < 1e-8, "{e}");
        let c = SpatialFunction::Constant { value: 2.5 };
        assert_eq!(expected_under_density(&p, &c, 0.3).unwrap(), 2.5);
        // the nested quadrature agrees at the origin
        let s = semigroup_action(&p, &f, 1.0, &[0.0]).unwrap();
        assert!((s - e).abs() < 1e-9);
    }

    #[test]
    fn semigroup_in_two_dimensions_matches_radial_expectation() {
        let p = build_profile(2.0, 2, 8.0, 201).unwrap();
        let f = SpatialFunction::Bump {
            radius: 1.5,
            height: 2.0,
        };
        let a = semigroup_action(&p, &f, 0.4, &[0.0, 0.0]).unwrap();
        let b = expected_under_density(&p, &f, 0.4).unwrap();
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        // off-centre value is smaller for a centred bump
        let c = semigroup_action(&p, &f, 0.4, &[1.0, 0.5]).unwrap();
        assert!(c < a && c > 0.0);
    }

    #[test]
    fn high_dimension_needs_constant_data() {
        let p = build_profile(2.0, 4, 6.0, 31).unwrap();
        let f = SpatialFunction::Tent {
            radius: 1.0,
            height: 1.0,
        };
        assert_eq!(
            semigroup_action(&p, &f, 1.0, &[0.0; 4]),
            Err(StableError::UnsupportedDimension(4))
        );
        assert!(expected_under_density(&p, &f, 1.0).is_ok());
    }

    #[test]
    fn r_constant_composition() {
        let p = build_profile(2.0, 1, 6.0, 61).unwrap();
        let one = SpatialFunction::Constant { value: 1.0 };
        let r0 = default_r0(&p);
        let r = r_constant(&p, 1.0, r0, &one).unwrap();
        let want = 0.25 * p_unit_origin(2.0, 1) * r0.exp();
        assert!((r - want).abs() < 1e-14);
        assert!((r - 0.096_956_137_019_942_4).abs() < 1e-12);
        let two = SpatialFunction::Constant { value: 2.0 };
        assert_eq!(r_constant(&p, 1.0, r0, &two).unwrap(), 2.0 * r);
    }
}
