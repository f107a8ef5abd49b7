//! Named experiment presets.
//!
//! Each preset rewrites the parts of a base [`GridConfig`] it owns and
//! leaves the rest (seed base, replicate count, engine, margin) to the
//! caller. Some presets expand to several runs.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use crate::corrstruct::Structure;
use crate::registry::{Named, Registry};
use crate::report::HeatmapMetric;
use crate::runner::{effect_size_sweep, GridConfig};

/// One grid run produced by a preset.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetRun {
    /// Subdirectory name when a preset has several runs, otherwise empty.
    pub label: String,
    pub config: GridConfig,
    pub heatmaps: Vec<HeatmapMetric>,
}

pub trait Experiment: Named + Send + Sync {
    fn description(&self) -> &'static str;

    fn runs(&self, base: &GridConfig) -> Vec<PresetRun>;
}

fn single(config: GridConfig, heatmaps: &[HeatmapMetric]) -> Vec<PresetRun> {
    vec![PresetRun {
        label: String::new(),
        config,
        heatmaps: heatmaps.to_vec(),
    }]
}

fn six_predictors(base: &GridConfig, structure: Structure) -> GridConfig {
    GridConfig {
        structure,
        p: 6,
        betas: None,
        omit: BTreeSet::new(),
        ..base.clone()
    }
}

/// Declares a unit-struct preset with a fixed name and description.
macro_rules! preset {
    ($ty:ident, $name:literal, $desc:literal, |$base:ident| $body:expr) => {
        struct $ty;

        impl Named for $ty {
            fn name(&self) -> &'static str {
                $name
            }
        }

        impl Experiment for $ty {
            fn description(&self) -> &'static str {
                $desc
            }

            fn runs(&self, $base: &GridConfig) -> Vec<PresetRun> {
                $body
            }
        }
    };
}

use HeatmapMetric::{Coverage, Mae, Pa, Power};

preset!(
    Fig1,
    "fig1",
    "coverage, MAE and bias vs VIF per N; x_main correlated with x1 only",
    |base| { single(six_predictors(base, Structure::PairwiseMain), &[Coverage, Mae]) }
);

preset!(
    Fig2,
    "fig2",
    "precision assurance vs VIF per N; x_main correlated with x1 only",
    |base| { single(six_predictors(base, Structure::PairwiseMain), &[Pa]) }
);

preset!(
    Fig4,
    "fig4",
    "traditional power across beta_main = 0, 0.1, ..., 2",
    |base| {
        let config = GridConfig {
            beta_main_sweep: Some(effect_size_sweep()),
            ..six_predictors(base, Structure::PairwiseMain)
        };
        single(config, &[Power, Pa])
    }
);

preset!(
    Fig5,
    "fig5",
    "(N x VIF) heatmaps of precision assurance and power",
    |base| {
        single(
            six_predictors(base, Structure::PairwiseMain),
            &[Pa, Power, Coverage, Mae],
        )
    }
);

preset!(
    S1,
    "s1",
    "replication sensitivity at N = 100 with 1000, 2000, 5000 and 10000 replicates",
    |base| {
        [1000usize, 2000, 5000, 10_000]
            .into_iter()
            .map(|n_sims| PresetRun {
                label: format!("nsims{n_sims}"),
                config: GridConfig {
                    n_grid: vec![100],
                    n_sims,
                    ..six_predictors(base, Structure::PairwiseMain)
                },
                heatmaps: Vec::new(),
            })
            .collect()
    }
);

preset!(S3, "s3", "all six predictors equicorrelated", |base| {
    single(
        six_predictors(base, Structure::Equicorrelated),
        &[Pa, Power, Coverage, Mae],
    )
});

preset!(
    S5,
    "s5",
    "twenty equicorrelated predictors with the 20-variable coefficients",
    |base| {
        let config = GridConfig {
            structure: Structure::Equicorrelated,
            p: 20,
            betas: None,
            omit: BTreeSet::new(),
            ..base.clone()
        };
        single(config, &[Pa, Power, Coverage, Mae])
    }
);

preset!(
    S11,
    "s11",
    "misspecification: six equicorrelated predictors, x4 omitted from the fit",
    |base| {
        let config = GridConfig {
            omit: BTreeSet::from([4]),
            ..six_predictors(base, Structure::Equicorrelated)
        };
        single(config, &[Pa, Power, Coverage, Mae])
    }
);

/// Registry of experiment presets, keyed by name.
pub fn presets() -> &'static Registry<dyn Experiment> {
    static REGISTRY: OnceLock<Registry<dyn Experiment>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<dyn Experiment> = Registry::new("preset");
        reg.register(Box::new(Fig1));
        reg.register(Box::new(Fig2));
        reg.register(Box::new(Fig4));
        reg.register(Box::new(Fig5));
        reg.register(Box::new(S1));
        reg.register(Box::new(S3));
        reg.register(Box::new(S5));
        reg.register(Box::new(S11));
        reg
    })
}
