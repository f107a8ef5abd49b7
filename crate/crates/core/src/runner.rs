//! Scenario grids and their deterministic execution.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corrstruct::{CorrelationSpec, Structure, DEFAULT_VIF_GRID};
use crate::datagen::{default_betas, default_sigma_eps, Scenario, DEFAULT_INTERCEPT, GENERATOR_ID};
use crate::engine::{engines, FitEngine, DEFAULT_ENGINE};
use crate::metrics::{summarize, MetricSummary, PrecisionMargin};
use crate::{Error, Result};

pub const DEFAULT_N_GRID: [usize; 7] = [100, 500, 1000, 5000, 10_000, 50_000, 100_000];

/// `0, 0.1, …, 2.0`.
pub fn effect_size_sweep() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 10.0).collect()
}

/// Everything needed to enumerate and run a grid of scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub vif_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub structure: Structure,
    pub p: usize,
    pub intercept: f64,
    /// Slopes, `x_main` first. `None` uses the preset for `p`.
    pub betas: Option<Vec<f64>>,
    /// `β_main` values to run. `None` runs the slope from `betas` only.
    pub beta_main_sweep: Option<Vec<f64>>,
    pub sigma_eps: f64,
    pub n_sims: usize,
    pub seed_base: u64,
    pub omit: BTreeSet<usize>,
    pub margin: PrecisionMargin,
    pub engine: String,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            vif_grid: DEFAULT_VIF_GRID.to_vec(),
            n_grid: DEFAULT_N_GRID.to_vec(),
            structure: Structure::PairwiseMain,
            p: 6,
            intercept: DEFAULT_INTERCEPT,
            betas: None,
            beta_main_sweep: None,
            sigma_eps: default_sigma_eps(),
            n_sims: 1000,
            seed_base: 0,
            omit: BTreeSet::new(),
            margin: PrecisionMargin::default(),
            engine: DEFAULT_ENGINE.to_string(),
        }
    }
}

impl GridConfig {
    pub fn resolved_betas(&self) -> Result<Vec<f64>> {
        match &self.betas {
            Some(b) => Ok(b.clone()),
            None => default_betas(self.p)
                .ok_or_else(|| Error::Config(format!("no preset coefficients for p = {}; set `betas`", self.p))),
        }
    }

    pub fn resolved_sweep(&self) -> Result<Vec<f64>> {
        match &self.beta_main_sweep {
            Some(s) => Ok(s.clone()),
            None => Ok(vec![*self
                .resolved_betas()?
                .first()
                .ok_or_else(|| Error::Config("empty coefficient list".into()))?]),
        }
    }

    pub fn engine(&self) -> Result<&'static dyn FitEngine> {
        engines().get(&self.engine)
    }

    /// SHA-256 of the canonical config text.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_config_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Descriptor plus aggregated metrics for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub n: usize,
    pub vif: f64,
    pub structure: Structure,
    pub p: usize,
    pub beta_main: f64,
    pub cohens_d: f64,
    pub omit: Vec<usize>,
    pub metrics: MetricSummary,
}

impl ScenarioResult {
    pub fn from_fits(s: &Scenario, fits: &[crate::ols::FitSummary], margin: PrecisionMargin) -> Result<Self> {
        Ok(Self {
            n: s.n,
            vif: s.spec.target_vif,
            structure: s.spec.structure,
            p: s.spec.p,
            beta_main: s.beta_main(),
            cohens_d: s.cohens_d(),
            omit: s.omit.iter().copied().collect(),
            metrics: summarize(fits, s.beta_main(), margin)?,
        })
    }
}

/// All scenarios of `g`: `n` ascending, then VIF, then `β_main`.
pub fn enumerate_scenarios(g: &GridConfig) -> Result<Vec<Scenario>> {
    if g.vif_grid.is_empty() || g.n_grid.is_empty() {
        return Err(Error::Config("vif_grid and n_grid must be non-empty".into()));
    }
    let betas = g.resolved_betas()?;
    let mut sweep = g.resolved_sweep()?;
    if sweep.is_empty() {
        return Err(Error::Config("beta_main_sweep must be non-empty".into()));
    }
    let mut ns = g.n_grid.clone();
    ns.sort_unstable();
    let mut vifs = g.vif_grid.clone();
    vifs.sort_by(f64::total_cmp);
    sweep.sort_by(f64::total_cmp);

    let mut out = Vec::with_capacity(ns.len() * vifs.len() * sweep.len());
    let mut problems = Vec::new();
    for (ni, &n) in ns.iter().enumerate() {
        for (vi, &vif) in vifs.iter().enumerate() {
            let built = CorrelationSpec::new(g.structure, vif, g.p).and_then(|spec| {
                let s = Scenario {
                    n,
                    spec,
                    intercept: g.intercept,
                    betas: betas.clone(),
                    beta_main_index: 0,
                    sigma_eps: g.sigma_eps,
                    n_sims: g.n_sims,
                    seed_base: g.seed_base,
                    omit: g.omit.clone(),
                };
                s.validate()?;
                s.cholesky()?;
                Ok(s)
            });
            match built {
                Ok(s) => out.extend(sweep.iter().map(|&b| s.with_beta_main(b))),
                Err(e) => problems.push(format!("(n[{ni}] = {n}, vif[{vi}] = {vif}): {e}")),
            }
        }
    }
    if !problems.is_empty() {
        return Err(Error::Config(format!("invalid grid cells: {}", problems.join("; "))));
    }
    Ok(out)
}

/// Runs one scenario with the default engine and margin.
pub fn run_scenario(s: &Scenario) -> Result<ScenarioResult> {
    run_scenario_with(s, crate::engine::default_engine(), PrecisionMargin::default())
}

pub fn run_scenario_with(s: &Scenario, engine: &dyn FitEngine, margin: PrecisionMargin) -> Result<ScenarioResult> {
    let fits = engine.fit_replicates(s)?;
    ScenarioResult::from_fits(s, &fits, margin)
}

/// Reruns `s` at each `β_main`, reusing the same seeded designs and errors.
pub fn sweep_effect_sizes(
    s: &Scenario,
    betas_main: &[f64],
    engine: &dyn FitEngine,
    margin: PrecisionMargin,
) -> Result<Vec<ScenarioResult>> {
    let batch: Vec<Scenario> = betas_main.iter().map(|&b| s.with_beta_main(b)).collect();
    engine
        .fit_batch(&batch)
        .into_iter()
        .zip(&batch)
        .map(|(fits, sc)| ScenarioResult::from_fits(sc, &fits?, margin))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRange {
    pub index: usize,
    pub n: usize,
    pub vif: f64,
    pub beta_main: f64,
    pub first_seed: u64,
    pub last_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFailure {
    pub index: usize,
    pub n: usize,
    pub vif: f64,
    pub beta_main: f64,
    pub error: String,
}

/// Provenance for a grid run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub config: String,
    pub generator: String,
    pub engine: String,
    pub software: String,
    pub software_version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub notes: Vec<String>,
    pub scenarios: Vec<SeedRange>,
    pub failures: Vec<ScenarioFailure>,
}

#[derive(Debug, Clone)]
pub struct GridRun {
    /// Successful scenarios in enumeration order.
    pub results: Vec<ScenarioResult>,
    pub failures: Vec<ScenarioFailure>,
    pub manifest: RunManifest,
}

impl GridRun {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

const MANIFEST_NOTES: [&str; 3] = [
    "design and error draws use separate labeled streams of one seed per replicate (seed = seed_base + sim_index)",
    "raw design rows are filled before the correlation transform; rows are multiplied by the transposed Cholesky factor",
    "intervals are closed; PA and power use the 95% Student-t interval with df = n - k - 1",
];

/// Runs every scenario of `g` on a pool of `threads` workers (rayon's
/// default when `None`). Output is identical for any thread count.
pub fn run_grid(g: &GridConfig, threads: Option<usize>) -> Result<GridRun> {
    let engine = g.engine()?;
    let scenarios = enumerate_scenarios(g)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;

    let mut slots: Vec<Option<Result<ScenarioResult>>> = (0..scenarios.len()).map(|_| None).collect();
    pool.install(|| {
        engine.fit_batch_into(&scenarios, &mut |i, fits| {
            slots[i] = Some(fits.and_then(|f| ScenarioResult::from_fits(&scenarios[i], &f, g.margin)));
        })
    });

    let mut results = Vec::with_capacity(scenarios.len());
    let mut failures = Vec::new();
    for (index, (slot, s)) in slots.into_iter().zip(&scenarios).enumerate() {
        match slot.expect("engine delivers every scenario") {
            Ok(r) => results.push(r),
            Err(e) => failures.push(ScenarioFailure {
                index,
                n: s.n,
                vif: s.spec.target_vif,
                beta_main: s.beta_main(),
                error: e.to_string(),
            }),
        }
    }

    let manifest = RunManifest {
        config_hash: g.hash(),
        config: g.to_config_text(),
        generator: GENERATOR_ID.to_string(),
        engine: engine.name().to_string(),
        software: env!("CARGO_PKG_NAME").to_string(),
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        notes: MANIFEST_NOTES.iter().map(|s| s.to_string()).collect(),
        scenarios: scenarios
            .iter()
            .enumerate()
            .map(|(index, s)| SeedRange {
                index,
                n: s.n,
                vif: s.spec.target_vif,
                beta_main: s.beta_main(),
                first_seed: s.seed_base,
                last_seed: s.seed_base + s.n_sims as u64 - 1,
            })
            .collect(),
        failures: failures.clone(),
    };
    Ok(GridRun {
        results,
        failures,
        manifest,
    })
}
