//! Replicate-level indicators and their Monte Carlo aggregation.
//!
//! Interval comparisons are closed at both ends. Proportions carry the
//! binomial standard error `sqrt(q(1-q)/n)`; real-valued means carry the
//! sample SD over `sqrt(n)`.

use serde::{Deserialize, Serialize};

use crate::datagen::Scenario;
use crate::ols::FitSummary;
use crate::{Error, Result};

pub const DEFAULT_C_POWVAL: f64 = 0.189;

/// Default calibration tolerance: one replicate in 400.
pub const DEFAULT_CALIBRATION_TOL: f64 = 0.0025;

/// Half-width of the precision-assurance band around the true coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionMargin {
    pub c_powval: f64,
}

impl PrecisionMargin {
    pub fn new(c_powval: f64) -> Result<Self> {
        if !(c_powval > 0.0 && c_powval.is_finite()) {
            return Err(Error::Domain(format!("c_powval must be positive, got {c_powval}")));
        }
        Ok(Self { c_powval })
    }
}

impl Default for PrecisionMargin {
    fn default() -> Self {
        Self {
            c_powval: DEFAULT_C_POWVAL,
        }
    }
}

pub fn covers(fit: &FitSummary, beta_true: f64) -> bool {
    fit.ci_low <= beta_true && beta_true <= fit.ci_high
}

pub fn has_precision_assurance(fit: &FitSummary, beta_true: f64, margin: PrecisionMargin) -> bool {
    beta_true - margin.c_powval <= fit.ci_low && fit.ci_high <= beta_true + margin.c_powval
}

pub fn has_traditional_power(fit: &FitSummary) -> bool {
    !(fit.ci_low <= 0.0 && 0.0 <= fit.ci_high)
}

/// A Monte Carlo mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub mc_se: f64,
}

impl Estimate {
    pub fn proportion(hits: usize, n: usize) -> Self {
        let q = hits as f64 / n as f64;
        Self {
            value: q,
            mc_se: (q * (1.0 - q) / n as f64).sqrt(),
        }
    }

    /// Mean with SD/sqrt(n); SD uses the n-1 denominator (0 for n = 1).
    pub fn mean(values: impl Iterator<Item = f64> + Clone) -> Self {
        let (n, sum) = values.clone().fold((0usize, 0.0), |(c, s), v| (c + 1, s + v));
        let mean = sum / n as f64;
        let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
        let sd = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
        Self {
            value: mean,
            mc_se: sd / (n as f64).sqrt(),
        }
    }
}

/// The aggregated outcome measures of one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub coverage: Estimate,
    pub bias: Estimate,
    pub mae: Estimate,
    pub precision_assurance: Estimate,
    pub power_traditional: Estimate,
    pub mean_ci_width: Estimate,
    pub mean_se: Estimate,
    pub n_sims: usize,
}

/// Aggregates fits in the order given (ascending `sim_index` by convention).
pub fn summarize(fits: &[FitSummary], beta_true: f64, margin: PrecisionMargin) -> Result<MetricSummary> {
    if fits.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = fits.len();
    let count = |pred: &dyn Fn(&FitSummary) -> bool| fits.iter().filter(|f| pred(f)).count();
    Ok(MetricSummary {
        coverage: Estimate::proportion(count(&|f| covers(f, beta_true)), n),
        bias: Estimate::mean(fits.iter().map(|f| f.beta_hat - beta_true)),
        mae: Estimate::mean(fits.iter().map(|f| (f.beta_hat - beta_true).abs())),
        precision_assurance: Estimate::proportion(count(&|f| has_precision_assurance(f, beta_true, margin)), n),
        power_traditional: Estimate::proportion(count(&has_traditional_power), n),
        mean_ci_width: Estimate::mean(fits.iter().map(FitSummary::ci_width)),
        mean_se: Estimate::mean(fits.iter().map(|f| f.se)),
        n_sims: n,
    })
}

fn pa_at(fits: &[FitSummary], beta_true: f64, c: f64) -> f64 {
    let hits = fits
        .iter()
        .filter(|f| has_precision_assurance(f, beta_true, PrecisionMargin { c_powval: c }))
        .count();
    hits as f64 / fits.len() as f64
}

/// Bisects the margin `c` until PA over `fits` is within `tol` of `target_pa`.
///
/// PA is a nondecreasing step function of `c`: it is 0 at `c = 0` (all
/// intervals have positive width) and 1 once `c` reaches the largest
/// distance from the truth to either interval end.
pub fn calibrate_from_fits(fits: &[FitSummary], beta_true: f64, target_pa: f64, tol: f64) -> Result<PrecisionMargin> {
    if fits.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(target_pa > 0.0 && target_pa < 1.0) {
        return Err(Error::Domain(format!("target PA {target_pa} not in (0, 1)")));
    }
    if !(tol >= 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be >= 0")));
    }
    let reach = |f: &FitSummary| (beta_true - f.ci_low).max(f.ci_high - beta_true);
    let mut hi = fits.iter().map(reach).fold(0.0, f64::max);
    let mut lo = 0.0;
    let (mut lo_pa, mut hi_pa) = (pa_at(fits, beta_true, lo), pa_at(fits, beta_true, hi));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let pa = pa_at(fits, beta_true, mid);
        if (pa - target_pa).abs() <= tol {
            return PrecisionMargin::new(mid);
        }
        if pa < target_pa {
            lo = mid;
            lo_pa = pa;
        } else {
            hi = mid;
            hi_pa = pa;
        }
    }
    Err(Error::Calibration {
        target: target_pa,
        tol,
        lo_c: lo,
        lo_pa,
        hi_c: hi,
        hi_pa,
    })
}

/// Runs `baseline` with the default engine and calibrates the margin on
/// its fixed seed set. The usual baseline is N = 1000, VIF = 1 with the
/// default coefficients and error SD.
pub fn calibrate_c_powval(baseline: &Scenario, target_pa: f64, tol: f64) -> Result<PrecisionMargin> {
    let fits = crate::engine::default_engine().fit_replicates(baseline)?;
    calibrate_from_fits(&fits, baseline.beta_main(), target_pa, tol)
}
