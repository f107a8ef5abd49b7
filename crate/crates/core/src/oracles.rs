//! Closed-form approximations used to cross-check simulated metrics.
//!
//! They use population moments and the normal critical value, so they are
//! sanity rails with stated tolerances, not substitutes for simulation.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::metrics::Estimate;
use crate::runner::ScenarioResult;

/// Two-sided 95% normal critical value.
pub const Z_975: f64 = 1.959_963_984_540_054;

fn phi(x: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").cdf(x)
}

/// `sigma_eps · sqrt(vif / n)`.
pub fn analytic_se(n: usize, vif: f64, sigma_eps: f64) -> f64 {
    sigma_eps * (vif / n as f64).sqrt()
}

/// Mean absolute deviation of a centred normal with SD [`analytic_se`].
pub fn analytic_mae(n: usize, vif: f64, sigma_eps: f64) -> f64 {
    analytic_se(n, vif, sigma_eps) * (2.0 / std::f64::consts::PI).sqrt()
}

/// Probability that `β̂ ± 1.96·s` lies inside `β ± c`.
pub fn analytic_pa(n: usize, vif: f64, sigma_eps: f64, c: f64) -> f64 {
    let s = analytic_se(n, vif, sigma_eps);
    let h = Z_975 * s;
    if h >= c {
        0.0
    } else {
        2.0 * phi((c - h) / s) - 1.0
    }
}

/// Probability that `β̂ ± 1.96·s` excludes zero.
pub fn analytic_power(n: usize, vif: f64, sigma_eps: f64, beta: f64) -> f64 {
    let s = analytic_se(n, vif, sigma_eps);
    let z = beta.abs() / s;
    phi(z - Z_975) + phi(-z - Z_975)
}

/// Shift of each included coefficient when one equicorrelated predictor
/// with slope `beta_omitted` is dropped, leaving `k_included` predictors.
pub fn ovb_bias_equicorrelated(r: f64, beta_omitted: f64, k_included: usize) -> f64 {
    beta_omitted * r / (1.0 + (k_included as f64 - 1.0) * r)
}

/// Simulated versus closed-form values for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub se: (f64, f64),
    pub mae: (Estimate, f64),
    pub pa: (Estimate, f64),
    pub power: (Estimate, f64),
    /// Present for single-predictor omission under equicorrelation.
    pub bias: Option<(Estimate, f64)>,
}

impl OracleComparison {
    pub fn se_rel_error(&self) -> f64 {
        (self.se.0 / self.se.1 - 1.0).abs()
    }

    pub fn se_ok(&self) -> bool {
        self.se_rel_error() <= 0.03
    }

    pub fn mae_ok(&self) -> bool {
        (self.mae.0.value - self.mae.1).abs() <= 3.0 * self.mae.0.mc_se
    }

    pub fn pa_ok(&self) -> bool {
        within_proportion(self.pa.0, self.pa.1)
    }

    pub fn power_ok(&self) -> bool {
        within_proportion(self.power.0, self.power.1)
    }

    pub fn bias_ok(&self) -> Option<bool> {
        self.bias
            .map(|(sim, oracle)| (sim.value - oracle).abs() <= 3.0 * sim.mc_se)
    }
}

/// `|sim - oracle| <= max(0.03, 3 mc_se)`.
pub fn within_proportion(sim: Estimate, oracle: f64) -> bool {
    (sim.value - oracle).abs() <= 0.03f64.max(3.0 * sim.mc_se)
}

/// Builds the oracle comparison for a finished scenario.
///
/// `r` is the scenario's off-diagonal correlation and `beta_omitted` the
/// slope of the single omitted predictor, if any.
pub fn compare(
    result: &ScenarioResult,
    sigma_eps: f64,
    c_powval: f64,
    r: f64,
    beta_omitted: Option<f64>,
) -> OracleComparison {
    let (n, vif) = (result.n, result.vif);
    let m = &result.metrics;
    let bias = match (beta_omitted, result.structure) {
        (Some(b), crate::corrstruct::Structure::Equicorrelated) => {
            let k = result.p - result.omit.len();
            Some((m.bias, ovb_bias_equicorrelated(r, b, k)))
        }
        _ => None,
    };
    OracleComparison {
        se: (m.mean_se.value, analytic_se(n, vif, sigma_eps)),
        mae: (m.mae, analytic_mae(n, vif, sigma_eps)),
        pa: (m.precision_assurance, analytic_pa(n, vif, sigma_eps, c_powval)),
        power: (m.power_traditional, analytic_power(n, vif, sigma_eps, result.beta_main)),
        bias,
    }
}
