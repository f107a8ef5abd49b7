//! Ordinary least squares with intercept, solved through an orthogonal
//! triangularization of `[1, X, y]`.
//!
//! With `R` the triangular factor of the augmented matrix, the leading
//! `(k+1) × (k+1)` block is the factor of `[1, X]`, the last column above the
//! diagonal is `Qᵀy`, and the bottom-right entry is `±sqrt(RSS)`. Everything
//! the inference summary needs follows from `R` alone, which lets callers
//! build `R` however they like (see [`crate::engine`]).

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::linalg::{householder_r, invert_upper, solve_upper, Matrix};
use crate::{Error, Result};

/// Relative pivot size below which a fitted column counts as dependent.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub beta_hat: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub df: usize,
    pub sigma_hat: f64,
    /// Intercept first, then one slope per fitted predictor.
    pub all_coefficients: Vec<f64>,
}

impl FitSummary {
    pub fn ci_width(&self) -> f64 {
        self.ci_high - self.ci_low
    }
}

/// Quantile `level` of Student's t with `df` degrees of freedom.
///
/// `t_critical(df, 0.975)` is the two-sided 95% critical value.
pub fn t_critical(df: usize, level: f64) -> Result<f64> {
    if df < 1 {
        return Err(Error::Domain("t quantile needs df >= 1".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("quantile level {level} not in (0, 1)")));
    }
    if df >= LARGE_DF {
        return Ok(t_quantile_expansion(df as f64, level));
    }
    let dist =
        StudentsT::new(0.0, 1.0, df as f64).map_err(|e| Error::Domain(format!("Student t with df {df}: {e}")))?;
    Ok(dist.inverse_cdf(level))
}

// statrs' t inverse drifts below the normal quantile once df reaches ~1e5;
// the expansion below is accurate to ~1e-12 from here on.
const LARGE_DF: usize = 1000;

/// Cornish-Fisher expansion of the t quantile in powers of 1/df.
fn t_quantile_expansion(nu: f64, level: f64) -> f64 {
    let z = Normal::standard().inverse_cdf(level);
    let z2 = z * z;
    let g1 = z * (z2 + 1.0) / 4.0;
    let g2 = z * ((5.0 * z2 + 16.0) * z2 + 3.0) / 96.0;
    let g3 = z * (((3.0 * z2 + 19.0) * z2 + 17.0) * z2 - 15.0) / 384.0;
    let g4 = z * ((((79.0 * z2 + 776.0) * z2 + 1482.0) * z2 - 1920.0) * z2 - 945.0) / 92160.0;
    z + g1 / nu + g2 / nu.powi(2) + g3 / nu.powi(3) + g4 / nu.powi(4)
}

/// Fits `y ~ 1 + x` and summarizes the slope of column `tracked_index`.
pub fn fit_ols(x: &Matrix, y: &[f64], tracked_index: usize) -> Result<FitSummary> {
    let (n, k) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::Domain(format!("x has {n} rows but y has {}", y.len())));
    }
    if tracked_index >= k {
        return Err(Error::Domain(format!(
            "tracked index {tracked_index} out of range for {k} columns"
        )));
    }
    if n <= k + 1 {
        return Err(Error::InsufficientDf { n, k });
    }
    let t = t_critical(n - k - 1, 0.975)?;
    fit_with_critical(x, y, tracked_index, t)
}

/// [`fit_ols`] with a precomputed critical value; no argument checks.
pub(crate) fn fit_with_critical(x: &Matrix, y: &[f64], tracked_index: usize, t_crit: f64) -> Result<FitSummary> {
    let (n, k) = (x.rows(), x.cols());
    let mut a = Matrix::zeros(n, k + 2);
    for i in 0..n {
        let row = a.row_mut(i);
        row[0] = 1.0;
        row[1..=k].copy_from_slice(x.row(i));
        row[k + 1] = y[i];
    }
    let r = householder_r(&a);
    summary_from_triangular(&r, n, tracked_index, t_crit)
}

/// Inference summary from the triangular factor of `[1, X, y]`.
///
/// `tracked_index` counts predictors only (0 is the first slope), and
/// `t_crit` is the critical value for `n - k - 1` degrees of freedom.
pub fn summary_from_triangular(r: &Matrix, n: usize, tracked_index: usize, t_crit: f64) -> Result<FitSummary> {
    let m = r.rows();
    let k = m - 2;
    if n <= k + 1 {
        return Err(Error::InsufficientDf { n, k });
    }
    let q = k + 1;
    let scale = (0..q).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    for i in 0..q {
        if !(r[(i, i)].abs() > RANK_TOL * scale) {
            // Column 0 is the intercept; report predictor positions.
            return Err(Error::SingularFit {
                column: i.saturating_sub(1),
            });
        }
    }
    let mut r11 = Matrix::zeros(q, q);
    let mut qty = vec![0.0; q];
    for i in 0..q {
        for j in i..q {
            r11[(i, j)] = r[(i, j)];
        }
        qty[i] = r[(i, q)];
    }
    let coefs = solve_upper(&r11, &qty);
    let df = n - k - 1;
    let rss = r[(q, q)] * r[(q, q)];
    let sigma2 = rss / df as f64;

    let j = tracked_index + 1;
    let inv = invert_upper(&r11);
    // [(XᵀX)⁻¹]_jj = ‖row j of R⁻¹‖².
    let xtx_inv_jj: f64 = (j..q).map(|l| inv[(j, l)] * inv[(j, l)]).sum();
    let se = (sigma2 * xtx_inv_jj).sqrt();
    let beta_hat = coefs[j];
    let half = t_crit * se;
    Ok(FitSummary {
        beta_hat,
        se,
        ci_low: beta_hat - half,
        ci_high: beta_hat + half,
        df,
        sigma_hat: sigma2.sqrt(),
        all_coefficients: coefs,
    })
}
