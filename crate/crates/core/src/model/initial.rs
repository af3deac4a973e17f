use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::ModelError;
use crate::quad::{adaptive, Tolerance};

/// Radial, nonnegative, bounded functions on R^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpatialFunction {
    Constant {
        value: f64,
    },
    /// `height * 1{|x| <= radius}`
    Indicator {
        radius: f64,
        height: f64,
    },
    /// Smooth bump `height * exp(1 - 1/(1 - (|x|/radius)^2))` on the open ball.
    Bump {
        radius: f64,
        height: f64,
    },
    /// `height * (1 - |x|/radius)_+`
    Tent {
        radius: f64,
        height: f64,
    },
}

impl SpatialFunction {
    pub fn eval_radial(&self, r: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Indicator { radius, height } => {
                if r <= radius {
                    height
                } else {
                    0.0
                }
            }
            Self::Bump { radius, height } => {
                let u = r / radius;
                if u < 1.0 {
                    height * (1.0 - 1.0 / (1.0 - u * u)).exp()
                } else {
                    0.0
                }
            }
            Self::Tent { radius, height } => height * (1.0 - r / radius).max(0.0),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_radial(x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    pub fn sup_norm(&self) -> f64 {
        match *self {
            Self::Constant { value } => value.abs(),
            Self::Indicator { height, .. }
            | Self::Bump { height, .. }
            | Self::Tent { height, .. } => height,
        }
    }

    /// `None` for functions without compact support.
    pub fn support_radius(&self) -> Option<f64> {
        match *self {
            Self::Constant { .. } => None,
            Self::Indicator { radius, .. }
            | Self::Bump { radius, .. }
            | Self::Tent { radius, .. } => Some(radius),
        }
    }

    pub fn is_constant(&self) -> Option<f64> {
        match *self {
            Self::Constant { value } => Some(value),
            _ => None,
        }
    }

    pub fn l1_norm(&self, d: usize) -> f64 {
        let df = d as f64;
        let sphere = 2.0 * std::f64::consts::PI.powf(df / 2.0) / gamma(df / 2.0);
        match *self {
            Self::Constant { value } => {
                if value == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::Indicator { radius, height } => height * sphere * radius.powf(df) / df,
            Self::Tent { radius, height } => height * sphere * radius.powf(df) / (df * (df + 1.0)),
            Self::Bump { radius, .. } => {
                let r = adaptive(
                    |s| self.eval_radial(s) * s.powi(d as i32 - 1),
                    0.0,
                    radius,
                    Tolerance::new(1e-14, 1e-12),
                );
                sphere * r.value
            }
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match *self {
            Self::Constant { value } => Self::Constant { value: c * value },
            Self::Indicator { radius, height } => Self::Indicator {
                radius,
                height: c * height,
            },
            Self::Bump { radius, height } => Self::Bump {
                radius,
                height: c * height,
            },
            Self::Tent { radius, height } => Self::Tent {
                radius,
                height: c * height,
            },
        }
    }

    fn validate(&self, name: &str) -> Result<(), ModelError> {
        let bad = |msg: &str| Err(ModelError::InitialData(format!("{name}: {msg}")));
        match *self {
            Self::Constant { value } => {
                if !(value > 0.0 && value.is_finite()) {
                    return bad("constant value must be positive and finite");
                }
            }
            Self::Indicator { radius, height }
            | Self::Bump { radius, height }
            | Self::Tent { radius, height } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return bad("radius must be positive and finite");
                }
                if !(height > 0.0 && height.is_finite()) {
                    return bad("height must be positive and finite");
                }
            }
        }
        Ok(())
    }
}

/// Initial values `(f1, f2)` of the system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `f_i = C_i * psi` with `C1 <= C2`.
    Scaled {
        c1: f64,
        c2: f64,
        psi: SpatialFunction,
    },
    General {
        f1: SpatialFunction,
        f2: SpatialFunction,
    },
}

impl InitialData {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            Self::Scaled { c1, c2, psi } => {
                if !(*c1 > 0.0 && c1.is_finite() && c2.is_finite()) {
                    return Err(ModelError::InitialData("C1 and C2 must be positive".into()));
                }
                if c1 > c2 {
                    return Err(ModelError::InitialData(format!(
                        "C1 = {c1} exceeds C2 = {c2}"
                    )));
                }
                psi.validate("psi")
            }
            Self::General { f1, f2 } => {
                f1.validate("f1")?;
                f2.validate("f2")
            }
        }
    }

    pub fn component(&self, i: usize) -> SpatialFunction {
        match self {
            Self::Scaled { c1, c2, psi } => psi.scaled([*c1, *c2][i]),
            Self::General { f1, f2 } => [f1, f2][i].clone(),
        }
    }

    pub fn sup_norm(&self, i: usize) -> f64 {
        self.component(i).sup_norm()
    }

    pub fn l1_norm(&self, i: usize, d: usize) -> f64 {
        self.component(i).l1_norm(d)
    }

    /// `(C1, C2, psi)` when the data has the scaled form.
    pub fn as_scaled(&self) -> Option<(f64, f64, &SpatialFunction)> {
        match self {
            Self::Scaled { c1, c2, psi } => Some((*c1, *c2, psi)),
            Self::General { .. } => None,
        }
    }
}
