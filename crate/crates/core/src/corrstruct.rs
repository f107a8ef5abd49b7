//! Correlation matrices that hit an exact target VIF for the tracked
//! predictor `x_main` (column 0), and their Cholesky factors.
//!
//! Two structures are registered:
//!
//! * `pairwise`: only `x_main` and `x1` are correlated, with
//!   `r = sqrt(1 - 1/VIF)`.
//! * `equi`: every off-diagonal equals `r`, the positive root of
//!   `(p-1) r² - R²(p-2) r - R² = 0` with `R² = 1 - 1/VIF`.
//!
//! Tolerances: VIF round trips hold to 1e-9 absolute, Cholesky
//! reconstruction to 1e-12 max-abs entrywise. Positive definiteness is
//! decided by whether the Cholesky factorization succeeds.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::registry::{Named, Registry};
use crate::{Error, Result};

/// The targeted VIF levels, in ascending order.
pub const DEFAULT_VIF_GRID: [f64; 82] = [
    1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, //
    2.0, 2.1, 2.2, 2.3, 2.4, 2.5, 2.6, 2.7, 2.8, 2.9, //
    3.0, 3.1, 3.2, 3.3, 3.4, 3.5, 3.6, 3.7, 3.8, 3.9, //
    4.0, 4.1, 4.2, 4.3, 4.4, 4.5, 4.6, 4.7, 4.8, 4.9, //
    5.0, 5.2, 5.4, 5.6, 5.8, 6.0, 6.2, 6.4, 6.6, 6.8, //
    7.0, 7.2, 7.4, 7.6, 7.8, 8.0, 8.2, 8.4, 8.6, 8.8, //
    9.0, 9.2, 9.4, 9.6, 9.8, 10.0, 11.0, 12.0, 13.0, 14.0, //
    15.0, 16.0, 17.0, 18.0, 19.0, 20.0, 25.0, 30.0, 35.0, 40.0, //
    45.0, 50.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Structure {
    /// Only `x_main` and `x1` are correlated.
    PairwiseMain,
    /// All predictors share one off-diagonal correlation.
    Equicorrelated,
}

impl Structure {
    /// The registered strategy implementing this structure.
    pub fn kernel(self) -> &'static dyn CorrelationStructure {
        let name = match self {
            Structure::PairwiseMain => "pairwise",
            Structure::Equicorrelated => "equi",
        };
        structures().get(name).expect("built-in structure is registered")
    }

    pub fn label(self) -> &'static str {
        self.kernel().name()
    }

    /// Resolves a user-supplied name such as `pairwise` or `equi`.
    pub fn parse(name: &str) -> Result<Self> {
        Ok(structures().get(name)?.structure())
    }
}

impl std::fmt::Display for Structure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A way of spreading a target VIF over the predictor correlations.
pub trait CorrelationStructure: Named + Send + Sync {
    fn structure(&self) -> Structure;

    /// Off-diagonal value achieving `target_vif` for `x_main` among `p` predictors.
    fn r_from_vif(&self, target_vif: f64, p: usize) -> Result<f64>;

    /// VIF of `x_main` implied by off-diagonal value `r`.
    fn vif_from_r(&self, r: f64, p: usize) -> Result<f64>;

    /// Row-major `p × p` entries with off-diagonal value `r` placed per the structure.
    fn entries(&self, r: f64, p: usize) -> Vec<f64>;
}

fn check_inputs(target_vif: f64, p: usize) -> Result<()> {
    if !(target_vif >= 1.0) || !target_vif.is_finite() {
        return Err(Error::Domain(format!("target VIF must be >= 1, got {target_vif}")));
    }
    if p < 2 {
        return Err(Error::Domain(format!("need at least 2 predictors, got {p}")));
    }
    Ok(())
}

struct PairwiseMainKernel;

impl Named for PairwiseMainKernel {
    fn name(&self) -> &'static str {
        "pairwise"
    }
    fn aliases(&self) -> &'static [&'static str] {
        &["pairwise-main", "pairwise_main"]
    }
}

impl CorrelationStructure for PairwiseMainKernel {
    fn structure(&self) -> Structure {
        Structure::PairwiseMain
    }

    fn r_from_vif(&self, target_vif: f64, p: usize) -> Result<f64> {
        check_inputs(target_vif, p)?;
        r_from_vif_pairwise(target_vif)
    }

    fn vif_from_r(&self, r: f64, p: usize) -> Result<f64> {
        if p < 2 || !(r.abs() < 1.0) {
            return Err(Error::Domain(format!(
                "pairwise correlation must lie in (-1, 1), got {r}"
            )));
        }
        Ok(1.0 / (1.0 - r * r))
    }

    fn entries(&self, r: f64, p: usize) -> Vec<f64> {
        let mut e = identity_entries(p);
        e[1] = r;
        e[p] = r;
        e
    }
}

struct EquicorrelatedKernel;

impl Named for EquicorrelatedKernel {
    fn name(&self) -> &'static str {
        "equi"
    }
    fn aliases(&self) -> &'static [&'static str] {
        &["equicorrelated"]
    }
}

impl CorrelationStructure for EquicorrelatedKernel {
    fn structure(&self) -> Structure {
        Structure::Equicorrelated
    }

    fn r_from_vif(&self, target_vif: f64, p: usize) -> Result<f64> {
        r_from_vif_equicorrelated(target_vif, p)
    }

    fn vif_from_r(&self, r: f64, p: usize) -> Result<f64> {
        if p < 2 {
            return Err(Error::Domain(format!("need at least 2 predictors, got {p}")));
        }
        let pf = p as f64;
        let lower = -1.0 / (pf - 1.0);
        if !(r > lower && r < 1.0) {
            return Err(Error::Domain(format!(
                "equicorrelation {r} outside ({lower}, 1): matrix is not positive definite"
            )));
        }
        let r2 = (pf - 1.0) * r * r / (1.0 + (pf - 2.0) * r);
        Ok(1.0 / (1.0 - r2))
    }

    fn entries(&self, r: f64, p: usize) -> Vec<f64> {
        let mut e = vec![r; p * p];
        for i in 0..p {
            e[i * p + i] = 1.0;
        }
        e
    }
}

fn identity_entries(p: usize) -> Vec<f64> {
    let mut e = vec![0.0; p * p];
    for i in 0..p {
        e[i * p + i] = 1.0;
    }
    e
}

/// Registry of every correlation structure, keyed by name.
pub fn structures() -> &'static Registry<dyn CorrelationStructure> {
    static REGISTRY: OnceLock<Registry<dyn CorrelationStructure>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<dyn CorrelationStructure> = Registry::new("correlation structure");
        reg.register(Box::new(PairwiseMainKernel));
        reg.register(Box::new(EquicorrelatedKernel));
        reg
    })
}

/// `r = sqrt(1 - 1/VIF)`.
pub fn r_from_vif_pairwise(target_vif: f64) -> Result<f64> {
    check_inputs(target_vif, 2)?;
    Ok((1.0 - 1.0 / target_vif).sqrt())
}

/// Positive root of the equicorrelation quadratic for `p` predictors.
pub fn r_from_vif_equicorrelated(target_vif: f64, p: usize) -> Result<f64> {
    check_inputs(target_vif, p)?;
    let r2 = 1.0 - 1.0 / target_vif;
    let pm2 = p as f64 - 2.0;
    let pm1 = p as f64 - 1.0;
    let disc = r2 * r2 * pm2 * pm2 + 4.0 * r2 * pm1;
    Ok((r2 * pm2 + disc.sqrt()) / (2.0 * pm1))
}

/// VIF of `x_main` implied by off-diagonal `r` under `spec`'s structure and `p`.
pub fn vif_from_r(r: f64, spec: &CorrelationSpec) -> Result<f64> {
    spec.structure.kernel().vif_from_r(r, spec.p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSpec {
    pub structure: Structure,
    pub target_vif: f64,
    pub p: usize,
}

impl CorrelationSpec {
    pub fn new(structure: Structure, target_vif: f64, p: usize) -> Result<Self> {
        check_inputs(target_vif, p)?;
        Ok(Self {
            structure,
            target_vif,
            p,
        })
    }

    /// Off-diagonal value realizing the target VIF.
    pub fn r(&self) -> Result<f64> {
        self.structure.kernel().r_from_vif(self.target_vif, self.p)
    }
}

/// Symmetric, unit-diagonal matrix with every off-diagonal in (-1, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    inner: Matrix,
}

impl CorrelationMatrix {
    /// Validates the shape invariants. Positive definiteness is checked
    /// separately by [`cholesky_lower`].
    pub fn new(m: Matrix) -> Result<Self> {
        let dim = m.rows();
        if m.cols() != dim {
            return Err(Error::Domain(format!(
                "correlation matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        for i in 0..dim {
            if m[(i, i)] != 1.0 {
                return Err(Error::Domain(format!("diagonal entry {i} is {}", m[(i, i)])));
            }
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::Domain(format!("entries ({i}, {j}) and ({j}, {i}) differ")));
                }
                if !(m[(i, j)].abs() < 1.0) {
                    return Err(Error::Domain(format!(
                        "off-diagonal ({i}, {j}) = {} is not in (-1, 1)",
                        m[(i, j)]
                    )));
                }
            }
        }
        Ok(Self { inner: m })
    }

    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.inner
    }
}

pub fn build_correlation_matrix(spec: &CorrelationSpec) -> Result<CorrelationMatrix> {
    let kernel = spec.structure.kernel();
    let r = kernel.r_from_vif(spec.target_vif, spec.p)?;
    let entries = kernel.entries(r, spec.p);
    CorrelationMatrix::new(Matrix::from_row_major(spec.p, spec.p, entries))
}

/// Lower-triangular `L` with `L·Lᵀ` equal to a correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    lower: Matrix,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    pub fn lower(&self) -> &Matrix {
        &self.lower
    }

    /// `L·Lᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        self.lower.matmul(&self.lower.transpose())
    }
}

pub fn cholesky_lower(m: &CorrelationMatrix) -> Result<CholeskyFactor> {
    let a = m.matrix();
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(CholeskyFactor { lower: l })
}
