//! Replicate fitting strategies.
//!
//! Both engines see the same seeded draws and produce the same fits up to
//! floating-point rounding:
//!
//! * `direct` materializes every dataset, drops omitted columns and runs a
//!   Householder QR on `[1, X, y]`.
//! * `compressed` streams each replicate's raw rows `[1, z, e]` through a
//!   Givens triangularizer once, giving `S` with `SᵀS = AᵀA`. Any scenario
//!   sharing that raw draw has `[1, X, y] = A·M` for a small matrix `M`
//!   built from the Cholesky factor, coefficients and error SD, so its
//!   factor is the R of `S·M`. Cost per cell drops from O(N·k²) to O(k³).
//!
//! Replicates run on the current rayon pool; results are returned in
//! `sim_index` order so aggregation never depends on scheduling.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::corrstruct::CholeskyFactor;
use crate::datagen::{generate_with_factor, standard_normal_stream, Scenario, StreamLabel};
use crate::linalg::{householder_r, Matrix, RowTriangularizer};
use crate::ols::{fit_with_critical, summary_from_triangular, t_critical, FitSummary};
use crate::registry::{Named, Registry};
use crate::{Error, Result};

pub trait FitEngine: Named + Send + Sync {
    fn description(&self) -> &'static str;

    /// Fits every replicate of every scenario in `batch` and hands each
    /// scenario's fits to `sink` with its batch position. Scenarios that
    /// share a [`DesignFamily`] may reuse work; delivery order is unspecified.
    fn fit_batch_into(&self, batch: &[Scenario], sink: &mut dyn FnMut(usize, Result<Vec<FitSummary>>));

    /// One result per scenario, in batch order.
    fn fit_batch(&self, batch: &[Scenario]) -> Vec<Result<Vec<FitSummary>>> {
        let mut out: Vec<Option<Result<Vec<FitSummary>>>> = (0..batch.len()).map(|_| None).collect();
        self.fit_batch_into(batch, &mut |i, r| out[i] = Some(r));
        out.into_iter()
            .map(|r| r.expect("engine delivers every scenario"))
            .collect()
    }

    fn fit_replicates(&self, s: &Scenario) -> Result<Vec<FitSummary>> {
        self.fit_batch(std::slice::from_ref(s))
            .pop()
            .expect("one result per scenario")
    }
}

/// Scenarios with equal families draw identical raw replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DesignFamily {
    pub n: usize,
    pub p: usize,
    pub n_sims: usize,
    pub seed_base: u64,
}

impl DesignFamily {
    pub fn of(s: &Scenario) -> Self {
        Self {
            n: s.n,
            p: s.spec.p,
            n_sims: s.n_sims,
            seed_base: s.seed_base,
        }
    }
}

/// Per-scenario quantities shared by all of its replicates.
struct Prepared {
    chol: CholeskyFactor,
    kept: Vec<usize>,
    tracked: usize,
    t_crit: f64,
}

impl Prepared {
    fn new(s: &Scenario) -> Result<Self> {
        s.validate()?;
        let kept = s.kept_columns();
        let df = s.n - kept.len() - 1;
        Ok(Self {
            chol: s.cholesky()?,
            tracked: s.tracked_fit_index(),
            t_crit: t_critical(df, 0.975)?,
            kept,
        })
    }
}

/// Collects per-replicate results, failing on the lowest failing index.
fn in_order(results: Vec<Result<FitSummary>>) -> Result<Vec<FitSummary>> {
    results
        .into_iter()
        .enumerate()
        .map(|(sim_index, r)| {
            r.map_err(|e| Error::Replicate {
                sim_index,
                source: Box::new(e),
            })
        })
        .collect()
}

pub struct DirectEngine;

impl Named for DirectEngine {
    fn name(&self) -> &'static str {
        "direct"
    }
}

impl FitEngine for DirectEngine {
    fn description(&self) -> &'static str {
        "generate each replicate and fit it with a Householder QR"
    }

    fn fit_batch_into(&self, batch: &[Scenario], sink: &mut dyn FnMut(usize, Result<Vec<FitSummary>>)) {
        for (idx, s) in batch.iter().enumerate() {
            let result = Prepared::new(s).and_then(|prep| {
                let fits: Vec<_> = (0..s.n_sims)
                    .into_par_iter()
                    .map(|i| {
                        let d = generate_with_factor(s, &prep.chol, i);
                        let x = d.x.select_columns(&prep.kept);
                        fit_with_critical(&x, &d.y, prep.tracked, prep.t_crit)
                    })
                    .collect();
                in_order(fits)
            });
            sink(idx, result);
        }
    }
}

pub struct CompressedEngine;

impl Named for CompressedEngine {
    fn name(&self) -> &'static str {
        "compressed"
    }
    fn aliases(&self) -> &'static [&'static str] {
        &["sketch"]
    }
}

/// Triangular factor of the raw replicate `[1, z_1..z_p, e]`.
pub fn raw_sketch(seed: u64, n: usize, p: usize) -> Matrix {
    let mut design = standard_normal_stream(seed, StreamLabel::Design);
    let mut errors = standard_normal_stream(seed, StreamLabel::Error);
    let mut tri = RowTriangularizer::new(p + 2);
    let mut row = vec![0.0; p + 2];
    for _ in 0..n {
        row[0] = 1.0;
        for v in &mut row[1..=p] {
            *v = design.next().expect("endless stream");
        }
        row[p + 1] = errors.next().expect("endless stream");
        tri.push_row(&mut row);
    }
    tri.into_r()
}

/// Maps raw columns `[1, z, e]` to fitted columns `[1, X_kept, y]`.
fn column_map(s: &Scenario, prep: &Prepared) -> Matrix {
    let p = s.spec.p;
    let k = prep.kept.len();
    let l = prep.chol.lower();
    let mut m = Matrix::zeros(p + 2, k + 2);
    m[(0, 0)] = 1.0;
    for (c, &j) in prep.kept.iter().enumerate() {
        for t in 0..=j {
            m[(1 + t, 1 + c)] = l[(j, t)];
        }
    }
    // y uses the full model, omitted predictors included.
    m[(0, k + 1)] = s.intercept;
    for t in 0..p {
        let mut acc = 0.0;
        for j in t..p {
            acc += s.betas[j] * l[(j, t)];
        }
        m[(1 + t, k + 1)] = acc;
    }
    m[(p + 1, k + 1)] = s.sigma_eps;
    m
}

impl FitEngine for CompressedEngine {
    fn description(&self) -> &'static str {
        "triangularize each raw replicate once and refit every scenario from the small factor"
    }

    fn fit_batch_into(&self, batch: &[Scenario], sink: &mut dyn FnMut(usize, Result<Vec<FitSummary>>)) {
        let mut families: Vec<DesignFamily> = batch.iter().map(DesignFamily::of).collect();
        families.sort();
        families.dedup();
        for fam in families {
            let members: Vec<usize> = (0..batch.len())
                .filter(|&i| DesignFamily::of(&batch[i]) == fam)
                .collect();
            let preps: Vec<(usize, Result<Prepared>)> =
                members.iter().map(|&i| (i, Prepared::new(&batch[i]))).collect();
            if preps.iter().all(|(_, p)| p.is_err()) {
                for (i, p) in preps {
                    sink(i, Err(p.err().expect("checked")));
                }
                continue;
            }
            let sketches: Vec<Matrix> = (0..fam.n_sims)
                .into_par_iter()
                .map(|i| raw_sketch(fam.seed_base + i as u64, fam.n, fam.p))
                .collect();
            for (i, prep) in preps {
                sink(
                    i,
                    prep.and_then(|prep| {
                        let s = &batch[i];
                        let map = column_map(s, &prep);
                        let fits: Vec<_> = sketches
                            .par_iter()
                            .map(|sk| {
                                let r = householder_r(&sk.matmul(&map));
                                summary_from_triangular(&r, s.n, prep.tracked, prep.t_crit)
                            })
                            .collect();
                        in_order(fits)
                    }),
                );
            }
        }
    }
}

/// Registry of fit engines, keyed by name.
pub fn engines() -> &'static Registry<dyn FitEngine> {
    static REGISTRY: OnceLock<Registry<dyn FitEngine>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<dyn FitEngine> = Registry::new("fit engine");
        reg.register(Box::new(CompressedEngine));
        reg.register(Box::new(DirectEngine));
        reg
    })
}

pub const DEFAULT_ENGINE: &str = "compressed";

pub fn default_engine() -> &'static dyn FitEngine {
    engines().get(DEFAULT_ENGINE).expect("default engine registered")
}
