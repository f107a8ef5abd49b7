//! Seeded replicate generation.
//!
//! Each replicate draws a raw `N × p` standard-normal matrix from the
//! `Design` stream and an `N`-vector from the `Error` stream, both keyed by
//! `seed_base + sim_index`. The raw matrix never depends on the VIF level,
//! structure or coefficients, so replicates with the same index differ
//! across scenarios only through the correlation transform.
//!
//! Generator: ChaCha8 (`rand_chacha` 0.9.0), seeded with `seed_from_u64`
//! and split by `set_stream` (Design = 0, Error = 1). Normals come from
//! the ziggurat sampler of `rand_distr` 0.5.1. Both crate versions are
//! pinned; bit-exact reproducibility holds only under these versions.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::corrstruct::{build_correlation_matrix, cholesky_lower, CholeskyFactor, CorrelationSpec};
use crate::linalg::{householder_r, Matrix};
use crate::{Error, Result};

/// Recorded in run manifests.
pub const GENERATOR_ID: &str =
    "ChaCha8Rng (rand_chacha 0.9.0, seed_from_u64, set_stream Design=0/Error=1); StandardNormal ziggurat (rand_distr 0.5.1)";

/// Error SD giving variance π²/3.
pub fn default_sigma_eps() -> f64 {
    PI / 3f64.sqrt()
}

pub const DEFAULT_INTERCEPT: f64 = 10.0;

/// `β_main, β1, …, β5` for the six-predictor model.
pub const DEFAULT_BETAS_6: [f64; 6] = [2.0, 1.3, 1.5, 6.0, 3.0, 1.0];

/// `β_main, β1, …, β19` for the twenty-predictor model.
pub const DEFAULT_BETAS_20: [f64; 20] = [
    2.0, 1.3, 1.5, 6.0, 3.0, 1.0, 6.6, 0.7, 3.1, 2.6, 7.5, 6.9, 9.0, 1.3, 4.5, 0.8, 2.6, 5.3, 0.8, 2.4,
];

/// Default slopes for `p` predictors, when a preset exists.
pub fn default_betas(p: usize) -> Option<Vec<f64>> {
    match p {
        6 => Some(DEFAULT_BETAS_6.to_vec()),
        20 => Some(DEFAULT_BETAS_20.to_vec()),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamLabel {
    Design,
    Error,
}

impl StreamLabel {
    fn stream_id(self) -> u64 {
        match self {
            StreamLabel::Design => 0,
            StreamLabel::Error => 1,
        }
    }
}

/// Deterministic, endless sequence of standard normals.
pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl Iterator for NormalStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.rng.sample(StandardNormal))
    }
}

pub fn standard_normal_stream(seed: u64, label: StreamLabel) -> NormalStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(label.stream_id());
    NormalStream { rng }
}

/// One grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub n: usize,
    pub spec: CorrelationSpec,
    pub intercept: f64,
    /// Slopes in predictor order, `x_main` first.
    pub betas: Vec<f64>,
    pub beta_main_index: usize,
    pub sigma_eps: f64,
    pub n_sims: usize,
    pub seed_base: u64,
    /// Predictor indices dropped before fitting.
    pub omit: BTreeSet<usize>,
}

impl Scenario {
    /// Scenario with the preset coefficients for `spec.p`, default error
    /// SD, 1000 replicates, seed base 0 and nothing omitted.
    pub fn with_defaults(n: usize, spec: CorrelationSpec) -> Result<Self> {
        let betas = default_betas(spec.p).ok_or_else(|| {
            Error::Scenario(format!(
                "no default coefficients for p = {}; supply betas explicitly",
                spec.p
            ))
        })?;
        let s = Self {
            n,
            spec,
            intercept: DEFAULT_INTERCEPT,
            betas,
            beta_main_index: 0,
            sigma_eps: default_sigma_eps(),
            n_sims: 1000,
            seed_base: 0,
            omit: BTreeSet::new(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.spec.p;
        if self.n < p + 2 {
            return Err(Error::Scenario(format!(
                "n = {} too small for {p} predictors (need n >= {})",
                self.n,
                p + 2
            )));
        }
        if self.betas.len() != p {
            return Err(Error::Scenario(format!(
                "{} slopes supplied for {p} predictors",
                self.betas.len()
            )));
        }
        if self.beta_main_index >= p {
            return Err(Error::Scenario(format!(
                "tracked index {} out of range",
                self.beta_main_index
            )));
        }
        if !self.intercept.is_finite() || self.betas.iter().any(|b| !b.is_finite()) {
            return Err(Error::Scenario("coefficients must be finite".into()));
        }
        if !(self.sigma_eps >= 0.0 && self.sigma_eps.is_finite()) {
            return Err(Error::Scenario(format!("invalid error SD {}", self.sigma_eps)));
        }
        if self.n_sims == 0 {
            return Err(Error::Scenario("n_sims must be >= 1".into()));
        }
        if let Some(&bad) = self.omit.iter().find(|&&j| j >= p) {
            return Err(Error::Scenario(format!("omitted predictor {bad} out of range")));
        }
        if self.omit.contains(&self.beta_main_index) {
            return Err(Error::Scenario("the tracked predictor cannot be omitted".into()));
        }
        if self.seed_base.checked_add(self.n_sims as u64).is_none() {
            return Err(Error::Scenario("seed range overflows u64".into()));
        }
        Ok(())
    }

    pub fn beta_main(&self) -> f64 {
        self.betas[self.beta_main_index]
    }

    pub fn cohens_d(&self) -> f64 {
        self.beta_main() / self.sigma_eps
    }

    pub fn seed(&self, sim_index: usize) -> u64 {
        self.seed_base + sim_index as u64
    }

    pub fn cholesky(&self) -> Result<CholeskyFactor> {
        cholesky_lower(&build_correlation_matrix(&self.spec)?)
    }

    /// Predictor columns kept for fitting, ascending.
    pub fn kept_columns(&self) -> Vec<usize> {
        (0..self.spec.p).filter(|j| !self.omit.contains(j)).collect()
    }

    /// Position of the tracked predictor among the kept columns.
    pub fn tracked_fit_index(&self) -> usize {
        self.kept_columns()
            .iter()
            .position(|&j| j == self.beta_main_index)
            .expect("tracked predictor is never omitted")
    }

    pub fn with_beta_main(&self, beta_main: f64) -> Self {
        let mut s = self.clone();
        s.betas[s.beta_main_index] = beta_main;
        s
    }
}

/// One replicate: correlated design, error draw and outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub eps: Vec<f64>,
    pub y: Vec<f64>,
}

/// Raw `n × p` standard-normal matrix, filled row by row.
pub fn raw_design(seed: u64, n: usize, p: usize) -> Matrix {
    let data: Vec<f64> = standard_normal_stream(seed, StreamLabel::Design).take(n * p).collect();
    Matrix::from_row_major(n, p, data)
}

pub fn generate_dataset(s: &Scenario, sim_index: usize) -> Result<Dataset> {
    s.validate()?;
    if sim_index >= s.n_sims {
        return Err(Error::Scenario(format!(
            "sim_index {sim_index} out of range for {} replicates",
            s.n_sims
        )));
    }
    let chol = s.cholesky()?;
    Ok(generate_with_factor(s, &chol, sim_index))
}

/// Generation with a precomputed Cholesky factor; no validation.
pub(crate) fn generate_with_factor(s: &Scenario, chol: &CholeskyFactor, sim_index: usize) -> Dataset {
    let (n, p) = (s.n, s.spec.p);
    let seed = s.seed(sim_index);
    let raw = raw_design(seed, n, p);
    // Row covariance L·Lᵀ: each row becomes L·z.
    let x = raw.matmul(&chol.lower().transpose());
    let eps: Vec<f64> = standard_normal_stream(seed, StreamLabel::Error)
        .take(n)
        .map(|e| s.sigma_eps * e)
        .collect();
    let y = (0..n)
        .map(|i| {
            let lin: f64 = x.row(i).iter().zip(&s.betas).map(|(a, b)| a * b).sum();
            s.intercept + lin + eps[i]
        })
        .collect();
    Dataset { x, eps, y }
}

/// `1/(1 - R²)` of column `j` regressed (with intercept) on the others.
pub fn empirical_vif(x: &Matrix, j: usize) -> Result<f64> {
    let (n, p) = (x.rows(), x.cols());
    if j >= p {
        return Err(Error::Domain(format!("column {j} out of range for {p} columns")));
    }
    if p < 2 || n < p + 1 {
        return Err(Error::Domain(format!("need at least 2 columns and n > p, got {n}x{p}")));
    }
    // [1, X_{-j}, x_j]; the last diagonal of R is ±sqrt(RSS).
    let mut a = Matrix::zeros(n, p + 1);
    for i in 0..n {
        a[(i, 0)] = 1.0;
        let mut c = 1;
        for l in (0..p).filter(|&l| l != j) {
            a[(i, c)] = x[(i, l)];
            c += 1;
        }
        a[(i, p)] = x[(i, j)];
    }
    let r = householder_r(&a);
    let scale = (0..p).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    for i in 1..p {
        if r[(i, i)].abs() <= 1e-10 * scale {
            return Err(Error::InfiniteVif { column: j });
        }
    }
    let col = x.column(j);
    let mean = col.iter().sum::<f64>() / n as f64;
    let tss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
    let rss = r[(p, p)] * r[(p, p)];
    if tss == 0.0 || rss <= 1e-12 * tss {
        return Err(Error::InfiniteVif { column: j });
    }
    Ok(tss / rss)
}

/// Writes one replicate as CSV with columns `x_main, x1, …, eps, y`.
pub fn write_dataset_csv(d: &Dataset, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    let p = d.x.cols();
    let mut header = vec!["x_main".to_string()];
    header.extend((1..p).map(|j| format!("x{j}")));
    header.push("eps".into());
    header.push("y".into());
    writeln!(w, "{}", header.join(","))?;
    for i in 0..d.x.rows() {
        let mut fields: Vec<String> = d.x.row(i).iter().map(|v| format!("{v:e}")).collect();
        fields.push(format!("{:e}", d.eps[i]));
        fields.push(format!("{:e}", d.y[i]));
        writeln!(w, "{}", fields.join(","))?;
    }
    w.flush()?;
    Ok(())
}
