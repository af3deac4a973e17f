//! Model parameters, derived constants and regime classification.

mod initial;
mod regime;

pub use initial::{InitialData, SpatialFunction};
pub use regime::{classify_regime, HypothesisCheck, Regime, RegimeReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("parameter `{name}` = {value} is outside its admissible range ({range})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("noise coefficient k{i}{j} must be nonzero")]
    ZeroNoise { i: usize, j: usize },
    #[error("initial data: {0}")]
    InitialData(String),
    #[error("cannot build a coupled noise matrix: {0}")]
    Coupling(String),
}

/// 2x2 noise matrix; `k[i][j]` multiplies `B_j` in component `i` (0-based).
pub type NoiseMatrix = [[f64; 2]; 2];

/// Scalar inputs of the coupled system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub alpha: f64,
    pub d: usize,
    #[serde(rename = "H")]
    pub hurst: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub k: NoiseMatrix,
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let range = |name, value: f64, ok: bool, range| {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(ModelError::OutOfRange { name, value, range })
            }
        };
        range(
            "alpha",
            self.alpha,
            self.alpha > 0.0 && self.alpha <= 2.0,
            "0 < alpha <= 2",
        )?;
        range("d", self.d as f64, self.d >= 1, "d >= 1")?;
        range(
            "H",
            self.hurst,
            (0.5..1.0).contains(&self.hurst),
            "1/2 <= H < 1",
        )?;
        range("beta2", self.beta2, self.beta2 > 0.0, "beta2 > 0")?;
        range(
            "beta1",
            self.beta1,
            self.beta1 >= self.beta2,
            "beta1 >= beta2",
        )?;
        range("gamma1", self.gamma1, self.gamma1 > 0.0, "gamma1 > 0")?;
        range("gamma2", self.gamma2, self.gamma2 > 0.0, "gamma2 > 0")?;
        for i in 0..2 {
            for j in 0..2 {
                let v = self.k[i][j];
                if v == 0.0 {
                    return Err(ModelError::ZeroNoise { i: i + 1, j: j + 1 });
                }
                if !v.is_finite() {
                    return Err(ModelError::OutOfRange {
                        name: "k",
                        value: v,
                        range: "finite",
                    });
                }
            }
        }
        Ok(())
    }

    pub fn beta(&self, i: usize) -> f64 {
        [self.beta1, self.beta2][i]
    }

    pub fn gamma(&self, i: usize) -> f64 {
        [self.gamma1, self.gamma2][i]
    }

    pub fn is_brownian(&self) -> bool {
        self.hurst == 0.5
    }

    /// Singularity exponent `d * beta_i / alpha` of the semigroup sup-norm.
    pub fn singularity(&self, i: usize) -> f64 {
        self.d as f64 * self.beta(i) / self.alpha
    }

    /// Returns a copy with `gamma_i` replaced by the Ito-shifted drift and the
    /// Hurst index moved to `hurst`. Used to cross-check the H = 1/2 branch.
    pub fn with_drifts(&self, gamma1: f64, gamma2: f64, hurst: f64) -> Self {
        Self {
            gamma1,
            gamma2,
            hurst,
            ..self.clone()
        }
    }
}

/// Builds a noise matrix satisfying the coupling condition for the given
/// shared exponents.
///
/// The two linear equations per column are solved in closed form, then the
/// second entry is nudged by a few ulps until the two sides agree exactly in
/// floating point.
pub fn coupled_noise_matrix(
    rho1: f64,
    rho2: f64,
    beta1: f64,
    beta2: f64,
) -> Result<NoiseMatrix, ModelError> {
    let denom = (1.0 + beta1) * (1.0 + beta2) - 1.0;
    let mut k = [[0.0; 2]; 2];
    for (col, rho) in [rho1, rho2].into_iter().enumerate() {
        let top = rho * (2.0 + beta1) / denom;
        let bottom = (1.0 + beta2) * top - rho;
        let (a, b) = exact_column(top, bottom, beta1, beta2).ok_or_else(|| {
            ModelError::Coupling(format!(
                "no exactly representable solution for rho{}",
                col + 1
            ))
        })?;
        if a == 0.0 || b == 0.0 {
            return Err(ModelError::Coupling(format!(
                "rho{} = {rho} forces a zero coefficient",
                col + 1
            )));
        }
        k[0][col] = a;
        k[1][col] = b;
    }
    Ok(k)
}

// For fixed `a` the gap `fl((1+b1) b - a) - fl((1+b2) a - b)` is nondecreasing
// in `b`, so an exact root (if any) is found by bisection over ulp offsets.
fn exact_column(top: f64, bottom: f64, beta1: f64, beta2: f64) -> Option<(f64, f64)> {
    const RANGE: i64 = 1 << 20;
    let gap = |a: f64, b: f64| ((1.0 + beta1) * b - a) - ((1.0 + beta2) * a - b);
    for da in 0..=64i64 {
        for sa in [1i64, -1] {
            let a = ulp_shift(top, sa * da);
            let (mut lo, mut hi) = (-RANGE, RANGE);
            if gap(a, ulp_shift(bottom, lo)) > 0.0 || gap(a, ulp_shift(bottom, hi)) < 0.0 {
                continue;
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if gap(a, ulp_shift(bottom, mid)) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            for i in [lo, hi] {
                let b = ulp_shift(bottom, i);
                if gap(a, b) == 0.0 {
                    return Some((a, b));
                }
            }
        }
    }
    None
}

fn ulp_shift(x: f64, n: i64) -> f64 {
    if n == 0 || x == 0.0 {
        return x;
    }
    let bits = x.to_bits() as i64;
    let step = if x > 0.0 { n } else { -n };
    f64::from_bits((bits + step) as u64)
}

/// Constants derived from [`ModelParams`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub rho1: f64,
    pub rho2: f64,
    /// Exponent weights of the first nonlinearity, `(1+b1)k2. - k1.`.
    pub weights1: [f64; 2],
    /// Exponent weights of the second nonlinearity, `(1+b2)k1. - k2.`.
    pub weights2: [f64; 2],
    pub coupling_ok: bool,
    pub k12_drift: f64,
    pub k21_drift: f64,
    pub n1: f64,
    pub n2: f64,
    /// Common effective drift, present iff `n1 == n2`.
    pub lambda: Option<f64>,
    /// Young-inequality constant, present iff `beta1 > beta2`.
    pub d1: Option<f64>,
}

impl DerivedConstants {
    pub fn n(&self, i: usize) -> f64 {
        [self.n1, self.n2][i]
    }

    pub fn weights(&self, i: usize) -> [f64; 2] {
        [self.weights1, self.weights2][i]
    }

    pub fn rho(&self) -> [f64; 2] {
        [self.rho1, self.rho2]
    }
}

/// Effective drift `N_i`: `gamma_i` for H > 1/2, `gamma_i - |k_i|^2 / 2` at H = 1/2.
pub fn effective_drift(params: &ModelParams, i: usize) -> f64 {
    let g = params.gamma(i);
    if params.is_brownian() {
        let [a, b] = params.k[i];
        g - (a * a + b * b) / 2.0
    } else {
        g
    }
}

pub fn young_constant(beta1: f64, beta2: f64) -> Option<f64> {
    (beta1 > beta2).then(|| {
        ((beta1 - beta2) / (1.0 + beta1))
            * ((1.0 + beta1) / (1.0 + beta2)).powf((1.0 + beta2) / (beta1 - beta2))
    })
}

pub fn derive_constants(params: &ModelParams) -> DerivedConstants {
    let (b1, b2) = (params.beta1, params.beta2);
    let k = &params.k;
    let weights1 = [
        (1.0 + b1) * k[1][0] - k[0][0],
        (1.0 + b1) * k[1][1] - k[0][1],
    ];
    let weights2 = [
        (1.0 + b2) * k[0][0] - k[1][0],
        (1.0 + b2) * k[0][1] - k[1][1],
    ];
    let n1 = effective_drift(params, 0);
    let n2 = effective_drift(params, 1);
    DerivedConstants {
        rho1: weights1[0],
        rho2: weights1[1],
        weights1,
        weights2,
        coupling_ok: weights1 == weights2,
        k12_drift: -n1 + (1.0 + b1) * n2,
        k21_drift: -n2 + (1.0 + b2) * n1,
        n1,
        n2,
        lambda: (n1 == n2).then_some(n1),
        d1: young_constant(b1, b2),
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::symmetric;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn symmetric_unit_matrix_couples() {
        let c = derive_constants(&symmetric(2.0, 1, 0.75, 1.0, 1.0));
        assert_eq!((c.rho1, c.rho2), (1.0, 1.0));
        assert!(c.coupling_ok);
    }

    #[test]
    fn asymmetric_column_breaks_coupling() {
        let mut p = symmetric(2.0, 1, 0.75, 1.0, 1.0);
        p.k[1][0] = 2.0;
        let c = derive_constants(&p);
        assert_eq!(c.weights1[0], 3.0);
        assert_eq!(c.weights2[0], 0.0);
        assert!(!c.coupling_ok);
    }

    #[test]
    fn drift_constant_substitution() {
        let mut p = symmetric(2.0, 1, 0.75, 1.0, 1.0);
        p.gamma2 = 2.0;
        let c = derive_constants(&p);
        assert_eq!(c.k12_drift, 3.0);
        assert_eq!(c.lambda, None);
    }

    #[test]
    fn brownian_shift() {
        let c = derive_constants(&symmetric(2.0, 1, 0.5, 1.0, 2.0));
        assert_eq!((c.n1, c.n2), (1.0, 1.0));
        assert_eq!(c.lambda, Some(1.0));
        // H > 1/2 keeps the raw drift
        let c = derive_constants(&symmetric(2.0, 1, 0.75, 1.0, 2.0));
        assert_eq!(c.n1, 2.0);
    }

    #[test]
    fn young_constant_value() {
        assert!((young_constant(2.0, 1.0).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(young_constant(1.0, 1.0), None);
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        let mut p = symmetric(2.0, 1, 0.75, 1.0, 1.0);
        p.k[0][1] = 0.0;
        assert_eq!(p.validate(), Err(ModelError::ZeroNoise { i: 1, j: 2 }));
        let mut p = symmetric(2.5, 1, 0.75, 1.0, 1.0);
        assert!(p.validate().is_err());
        p.alpha = 2.0;
        p.hurst = 1.0;
        assert!(p.validate().is_err());
        p.hurst = 0.5;
        p.beta1 = 0.5;
        assert!(p.validate().is_err());
    }

    #[test]
    fn coupled_matrix_round_numbers() {
        let k = coupled_noise_matrix(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(k, [[1.0, 1.0], [1.0, 1.0]]);
    }

    proptest! {
        #[test]
        fn coupled_matrix_satisfies_condition(
            rho1 in 0.05f64..3.0,
            rho2 in 0.05f64..3.0,
            beta2 in 0.2f64..2.0,
            extra in 0.0f64..1.5,
        ) {
            let beta1 = beta2 + extra;
            let k = coupled_noise_matrix(rho1, rho2, beta1, beta2).unwrap();
            let p = ModelParams {
                alpha: 2.0, d: 1, hurst: 0.75, beta1, beta2,
                gamma1: 1.0, gamma2: 1.0, k,
            };
            let c = derive_constants(&p);
            prop_assert!(c.coupling_ok);
            prop_assert!((c.rho1 - rho1).abs() <= 1e-12 * rho1.max(1.0));
            prop_assert!((c.rho2 - rho2).abs() <= 1e-12 * rho2.max(1.0));
        }

        #[test]
        fn symmetric_noise_always_couples(
            a in -3.0f64..3.0, b in -3.0f64..3.0, beta in 0.1f64..3.0,
        ) {
            prop_assume!(a != 0.0 && b != 0.0);
            let mut p = symmetric(1.5, 2, 0.6, beta, 1.0);
            p.k = [[a, b], [a, b]];
            prop_assert!(derive_constants(&p).coupling_ok);
        }
    }
}
