use serde::{Deserialize, Serialize};

use super::{DerivedConstants, ModelParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    AlmostSureBlowup,
    BoundedProbabilityRegime,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// Name of the branch that produced `regime`, if any.
    pub branch: Option<String>,
    pub checks: Vec<HypothesisCheck>,
}

impl RegimeReport {
    pub fn check(&self, name: &str) -> Option<bool> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.holds)
    }
}

/// Qualitative blow-up classification.
///
/// The drift-sign branches require the coupling condition, positive shared
/// exponents and `N1 >= N2 > 0`. The zero-drift branch (H = 1/2,
/// `N1 = N2 = 0`) only needs `d <= alpha / beta1`.
pub fn classify_regime(params: &ModelParams, derived: &DerivedConstants) -> RegimeReport {
    let mut checks = Vec::new();
    let mut record = |name: &str, holds: bool| {
        checks.push(HypothesisCheck {
            name: name.to_string(),
            holds,
        });
        holds
    };

    let coupling = record("coupling", derived.coupling_ok);
    let rho_pos = record("rho_positive", derived.rho1 > 0.0 && derived.rho2 > 0.0);
    let drift_order = record(
        "drift_ordered_positive",
        derived.n1 >= derived.n2 && derived.n2 > 0.0,
    );
    let k12_pos = record("k12_positive", derived.k12_drift > 0.0);
    let k12_neg = record("k12_negative", derived.k12_drift < 0.0);
    let zero_drift = record(
        "brownian_zero_drift",
        params.is_brownian() && derived.n1 == 0.0 && derived.n2 == 0.0,
    );
    let low_dim = record(
        "dimension_subcritical",
        params.d as f64 <= params.alpha / params.beta1,
    );

    let common = coupling && rho_pos && drift_order;
    let (regime, branch) = if zero_drift && low_dim {
        (Regime::AlmostSureBlowup, Some("zero_drift_low_dimension"))
    } else if common && k12_pos {
        (Regime::AlmostSureBlowup, Some("positive_k12"))
    } else if common && k12_neg {
        (Regime::BoundedProbabilityRegime, Some("negative_k12"))
    } else {
        (Regime::Indeterminate, None)
    };
    RegimeReport {
        regime,
        branch: branch.map(str::to_string),
        checks,
    }
}
