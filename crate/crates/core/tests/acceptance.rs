//! Acceptance criteria 1-12. Each test prints one `PASS`/`FAIL` line;
//! run with `--nocapture` to see all of them.
//!
//! The Monte Carlo criteria share one fitted batch so every raw design
//! family is drawn and triangularized once.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use collinsim::corrstruct::{r_from_vif_equicorrelated, CorrelationSpec, Structure, DEFAULT_VIF_GRID};
use collinsim::datagen::{default_sigma_eps, Scenario};
use collinsim::engine::default_engine;
use collinsim::metrics::{calibrate_c_powval, Estimate, PrecisionMargin, DEFAULT_CALIBRATION_TOL};
use collinsim::oracles::{compare, ovb_bias_equicorrelated};
use collinsim::report::{write_run_outputs, HeatmapMetric};
use collinsim::runner::{enumerate_scenarios, run_grid, sweep_effect_sizes, GridConfig, ScenarioResult};

/// Published `(VIF, r)` pairs for six equicorrelated predictors.
const EQUI_R_TABLE: [(f64, f64); 82] = [
    (1.0, 0.000),
    (1.1, 0.176),
    (1.2, 0.261),
    (1.3, 0.326),
    (1.4, 0.380),
    (1.5, 0.424),
    (1.6, 0.462),
    (1.7, 0.496),
    (1.8, 0.525),
    (1.9, 0.551),
    (2.0, 0.574),
    (2.1, 0.595),
    (2.2, 0.614),
    (2.3, 0.631),
    (2.4, 0.647),
    (2.5, 0.661),
    (2.6, 0.674),
    (2.7, 0.687),
    (2.8, 0.699),
    (2.9, 0.709),
    (3.0, 0.719),
    (3.1, 0.728),
    (3.2, 0.737),
    (3.3, 0.745),
    (3.4, 0.752),
    (3.5, 0.759),
    (3.6, 0.766),
    (3.7, 0.773),
    (3.8, 0.779),
    (3.9, 0.785),
    (4.0, 0.790),
    (4.1, 0.795),
    (4.2, 0.800),
    (4.3, 0.804),
    (4.4, 0.809),
    (4.5, 0.814),
    (4.6, 0.818),
    (4.7, 0.821),
    (4.8, 0.825),
    (4.9, 0.829),
    (5.0, 0.832),
    (5.2, 0.839),
    (5.4, 0.845),
    (5.6, 0.850),
    (5.8, 0.856),
    (6.0, 0.860),
    (6.2, 0.865),
    (6.4, 0.869),
    (6.6, 0.873),
    (6.8, 0.877),
    (7.0, 0.880),
    (7.2, 0.884),
    (7.4, 0.887),
    (7.6, 0.890),
    (7.8, 0.893),
    (8.0, 0.895),
    (8.2, 0.898),
    (8.4, 0.900),
    (8.6, 0.903),
    (8.8, 0.905),
    (9.0, 0.907),
    (9.2, 0.909),
    (9.4, 0.911),
    (9.6, 0.913),
    (9.8, 0.915),
    (10.0, 0.916),
    (11.0, 0.924),
    (12.0, 0.931),
    (13.0, 0.936),
    (14.0, 0.941),
    (15.0, 0.944),
    (16.0, 0.948),
    (17.0, 0.951),
    (18.0, 0.953),
    (19.0, 0.956),
    (20.0, 0.958),
    (25.0, 0.967),
    (30.0, 0.972),
    (35.0, 0.976),
    (40.0, 0.979),
    (45.0, 0.982),
    (50.0, 0.983),
];

fn verdict(criterion: u32, ok: bool, detail: &str) {
    println!("{} criterion {criterion}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion}: {detail}");
}

const CHECK_N: [usize; 3] = [100, 1000, 10_000];
const CHECK_VIF: [f64; 4] = [1.0, 2.0, 10.0, 50.0];

struct Shared {
    results: Vec<ScenarioResult>,
}

impl Shared {
    fn find(&self, structure: Structure, p: usize, omit: bool, n: usize, vif: f64, beta: f64) -> &ScenarioResult {
        self.results
            .iter()
            .find(|r| {
                r.structure == structure
                    && r.p == p
                    && r.omit.is_empty() != omit
                    && r.n == n
                    && r.vif == vif
                    && r.beta_main == beta
            })
            .unwrap_or_else(|| panic!("cell {structure} p={p} omit={omit} n={n} vif={vif} beta={beta} not in batch"))
    }

    fn pairwise(&self, n: usize, vif: f64) -> &ScenarioResult {
        self.find(Structure::PairwiseMain, 6, false, n, vif, 2.0)
    }
}

fn grid(structure: Structure, p: usize, ns: &[usize], vifs: &[f64]) -> GridConfig {
    GridConfig {
        structure,
        p,
        n_grid: ns.to_vec(),
        vif_grid: vifs.to_vec(),
        ..GridConfig::default()
    }
}

fn shared() -> &'static Shared {
    static SHARED: OnceLock<Shared> = OnceLock::new();
    SHARED.get_or_init(|| {
        let full = GridConfig::default();
        let configs = [
            // Criteria 3-8: the whole pairwise grid at beta_main = 2.
            full.clone(),
            // Criterion 6: null effect and the small effect at N = 10000.
            GridConfig {
                beta_main_sweep: Some(vec![0.0]),
                ..grid(Structure::PairwiseMain, 6, &CHECK_N, &CHECK_VIF)
            },
            GridConfig {
                beta_main_sweep: Some(vec![0.3]),
                ..grid(Structure::PairwiseMain, 6, &[10_000], &[1.0, 10.0, 25.0, 50.0])
            },
            // Criterion 9: every cell with x4 omitted.
            GridConfig {
                omit: BTreeSet::from([4]),
                ..grid(Structure::Equicorrelated, 6, &full.n_grid, &full.vif_grid)
            },
            // Criterion 11.
            grid(Structure::Equicorrelated, 6, &[1000], &[2.0, 10.0]),
            grid(Structure::Equicorrelated, 20, &[1000], &[2.0, 10.0]),
        ];
        let batch: Vec<Scenario> = configs
            .iter()
            .flat_map(|g| enumerate_scenarios(g).expect("valid grid"))
            .collect();
        let results = default_engine()
            .fit_batch(&batch)
            .into_iter()
            .zip(&batch)
            .map(|(fits, s)| {
                ScenarioResult::from_fits(s, &fits.expect("scenario fits"), PrecisionMargin::default()).unwrap()
            })
            .collect();
        Shared { results }
    })
}

#[test]
fn criterion_01_equicorrelation_table() {
    let misses: Vec<String> = EQUI_R_TABLE
        .iter()
        .filter_map(|&(vif, r)| {
            let got = r_from_vif_equicorrelated(vif, 6).unwrap();
            ((got - r).abs() > 0.0005).then(|| format!("vif {vif}: {got:.5} vs {r}"))
        })
        .collect();
    let worst = EQUI_R_TABLE
        .iter()
        .map(|&(vif, r)| (r_from_vif_equicorrelated(vif, 6).unwrap() - r).abs())
        .fold(0.0, f64::max);
    verdict(
        1,
        misses.is_empty(),
        &format!(
            "{}/{} pairs within 0.0005 (max deviation {worst:.5}); misses: [{}]",
            EQUI_R_TABLE.len() - misses.len(),
            EQUI_R_TABLE.len(),
            misses.join("; ")
        ),
    );
}

#[test]
fn default_vif_grid_is_the_table_grid() {
    let vifs: Vec<f64> = EQUI_R_TABLE.iter().map(|p| p.0).collect();
    assert_eq!(vifs, DEFAULT_VIF_GRID.to_vec());
}

#[test]
fn criterion_02_calibration() {
    let spec = CorrelationSpec::new(Structure::PairwiseMain, 1.0, 6).unwrap();
    let s = Scenario::with_defaults(1000, spec).unwrap();
    let c = calibrate_c_powval(&s, 0.8, DEFAULT_CALIBRATION_TOL).unwrap().c_powval;
    verdict(
        2,
        (c - 0.189).abs() <= 0.010,
        &format!("c_powval = {c:.4} (target 0.189 ± 0.010)"),
    );
}

#[test]
fn criterion_03_coverage() {
    let sh = shared();
    let mut bad = Vec::new();
    let mut range = (f64::INFINITY, f64::NEG_INFINITY);
    for n in CHECK_N {
        for vif in CHECK_VIF {
            let c = sh.pairwise(n, vif).metrics.coverage.value;
            range = (range.0.min(c), range.1.max(c));
            if !(0.93..=0.97).contains(&c) {
                bad.push(format!("({n}, {vif}) = {c}"));
            }
        }
    }
    verdict(
        3,
        bad.is_empty(),
        &format!(
            "coverage over 12 cells in [{:.3}, {:.3}]; outside [0.93, 0.97]: {bad:?}",
            range.0, range.1
        ),
    );
}

#[test]
fn criterion_04_mae_anchors() {
    let sh = shared();
    let small = sh.pairwise(100, 50.0).metrics.mae.value;
    let large = sh.pairwise(100_000, 50.0).metrics.mae.value;
    let ok = (0.89..=1.09).contains(&small) && (0.025..=0.035).contains(&large);
    verdict(
        4,
        ok,
        &format!("MAE(100, 50) = {small:.4} in [0.89, 1.09]; MAE(100000, 50) = {large:.4} in [0.025, 0.035]"),
    );
}

#[test]
fn criterion_05_pa_cliffs() {
    let sh = shared();
    let pa = |n, v| sh.pairwise(n, v).metrics.precision_assurance.value;
    let zeros = [(1000, 3.0), (5000, 15.0), (10_000, 30.0)].map(|(n, v)| (n, v, pa(n, v)));
    let highs = [(50_000, 50.0), (100_000, 50.0)].map(|(n, v)| (n, v, pa(n, v)));
    let ok = zeros.iter().all(|c| c.2 <= 0.005) && highs.iter().all(|c| c.2 >= 0.5);
    verdict(5, ok, &format!("PA <= 0.005 at {zeros:?}; PA >= 0.5 at {highs:?}"));
}

#[test]
fn criterion_06_traditional_power() {
    let sh = shared();
    let power = |r: &ScenarioResult| r.metrics.power_traditional.value;
    let at10 = power(sh.pairwise(100, 10.0));
    let high_vif: Vec<(f64, f64)> = DEFAULT_VIF_GRID
        .iter()
        .filter(|&&v| v >= 16.0)
        .map(|&v| (v, power(sh.pairwise(100, v))))
        .collect();
    let max_high = high_vif.iter().map(|c| c.1).fold(0.0, f64::max);
    let mut nulls = Vec::new();
    for n in CHECK_N {
        for vif in CHECK_VIF {
            nulls.push(power(sh.find(Structure::PairwiseMain, 6, false, n, vif, 0.0)));
        }
    }
    let null_range = (
        nulls.iter().copied().fold(1.0, f64::min),
        nulls.iter().copied().fold(0.0, f64::max),
    );
    let small: Vec<(f64, f64)> = [1.0, 10.0, 25.0, 50.0]
        .map(|v| (v, power(sh.find(Structure::PairwiseMain, 6, false, 10_000, v, 0.3))))
        .to_vec();

    let ok_a = at10 >= 0.80 - 0.04 && max_high <= 0.80 + 0.04;
    let ok_b = null_range.0 >= 0.03 && null_range.1 <= 0.07;
    let ok_c = small.iter().all(|c| c.1 > 0.95);
    verdict(
        6,
        ok_a && ok_b && ok_c,
        &format!(
            "beta 2, N 100: power(VIF 10) = {at10:.3}, max power(VIF >= 16) = {max_high:.3} [{}]; \
             beta 0: power in [{:.3}, {:.3}] [{}]; beta 0.3, N 10000: {small:?} [{}]",
            if ok_a { "ok" } else { "miss" },
            null_range.0,
            null_range.1,
            if ok_b { "ok" } else { "miss" },
            if ok_c { "ok" } else { "miss" },
        ),
    );
}

#[test]
fn criterion_07_oracle_equivalence() {
    let sh = shared();
    let sigma = default_sigma_eps();
    let mut misses = Vec::new();
    let mut worst_se: f64 = 0.0;
    for n in CHECK_N {
        for vif in CHECK_VIF {
            let r = sh.pairwise(n, vif);
            let rho = CorrelationSpec::new(r.structure, vif, 6).unwrap().r().unwrap();
            let c = compare(r, sigma, PrecisionMargin::default().c_powval, rho, None);
            worst_se = worst_se.max(c.se_rel_error());
            if !c.se_ok() {
                misses.push(format!(
                    "({n}, {vif}) se {:.5} vs {:.5} ({:.1}%)",
                    c.se.0,
                    c.se.1,
                    100.0 * c.se_rel_error()
                ));
            }
            if !c.pa_ok() {
                misses.push(format!("({n}, {vif}) pa {:.3} vs {:.3}", c.pa.0.value, c.pa.1));
            }
            if !c.power_ok() {
                misses.push(format!("({n}, {vif}) power {:.3} vs {:.3}", c.power.0.value, c.power.1));
            }
        }
    }
    verdict(
        7,
        misses.is_empty(),
        &format!(
            "max SE deviation {:.2}% (limit 3%); misses: {misses:?}",
            100.0 * worst_se
        ),
    );
}

#[test]
fn criterion_08_se_inflation_law() {
    let sh = shared();
    let base = sh.pairwise(10_000, 1.0).metrics.mean_se.value;
    let ratios: Vec<(f64, f64)> = [4.0, 25.0, 50.0]
        .map(|v| (v, sh.pairwise(10_000, v).metrics.mean_se.value / base / v.sqrt()))
        .to_vec();
    let ok = ratios.iter().all(|c| (c.1 - 1.0).abs() <= 0.05);
    verdict(
        8,
        ok,
        &format!("mean_se(v) / mean_se(1) / sqrt(v) at N = 10000: {ratios:?}"),
    );
}

#[test]
fn criterion_09_misspecification() {
    let sh = shared();
    let omitted: Vec<&ScenarioResult> = sh.results.iter().filter(|r| r.omit == [4]).collect();
    assert_eq!(omitted.len(), 7 * DEFAULT_VIF_GRID.len());
    let nonzero: Vec<(usize, f64, f64)> = omitted
        .iter()
        .filter(|r| r.vif >= 1.1 && r.metrics.precision_assurance.value != 0.0)
        .map(|r| (r.n, r.vif, r.metrics.precision_assurance.value))
        .collect();
    let mut bias_misses = Vec::new();
    let mut bias50 = f64::NAN;
    for vif in [2.0, 10.0, 50.0] {
        let r = sh.find(Structure::Equicorrelated, 6, true, 10_000, vif, 2.0);
        let rho = r_from_vif_equicorrelated(vif, 6).unwrap();
        let oracle = ovb_bias_equicorrelated(rho, 3.0, 5);
        let b = r.metrics.bias;
        if (b.value - oracle).abs() > 3.0 * b.mc_se {
            bias_misses.push(format!("vif {vif}: {:.4} vs {oracle:.4}", b.value));
        }
        if vif == 50.0 {
            bias50 = b.value;
        }
    }
    let ok = nonzero.is_empty() && bias_misses.is_empty() && (0.52..=0.62).contains(&bias50);
    verdict(
        9,
        ok,
        &format!(
            "nonzero PA cells at VIF >= 1.1: {nonzero:?}; bias oracle misses: {bias_misses:?}; bias(10000, 50) = {bias50:.4} in [0.52, 0.62]"
        ),
    );
}

#[test]
fn criterion_10_effect_size_neutrality() {
    let spec = CorrelationSpec::new(Structure::PairwiseMain, 5.0, 6).unwrap();
    let s = Scenario::with_defaults(1000, spec).unwrap();
    let out = sweep_effect_sizes(&s, &[0.0, 1.0, 2.0], default_engine(), PrecisionMargin::default()).unwrap();
    let pick = |r: &ScenarioResult| -> [Estimate; 4] {
        let m = &r.metrics;
        [m.coverage, m.mae, m.bias, m.mean_se]
    };
    let base = pick(&out[0]);
    let worst = out[1..]
        .iter()
        .flat_map(|r| pick(r).into_iter().zip(base).map(|(a, b)| (a.value - b.value).abs()))
        .fold(0.0, f64::max);
    verdict(
        10,
        worst <= 1e-9,
        &format!("max difference across beta_main in {{0, 1, 2}}: {worst:.2e}"),
    );
}

#[test]
fn criterion_11_structure_and_width_insensitivity() {
    let sh = shared();
    let mut misses = Vec::new();
    let mut checked = 0;
    for vif in [2.0, 10.0] {
        let pairwise = sh.pairwise(1000, vif);
        let equi6 = sh.find(Structure::Equicorrelated, 6, false, 1000, vif, 2.0);
        let equi20 = sh.find(Structure::Equicorrelated, 20, false, 1000, vif, 2.0);
        for (label, a, b) in [("pairwise vs equi", pairwise, equi6), ("p 6 vs p 20", equi6, equi20)] {
            let pairs = [
                ("coverage", a.metrics.coverage, b.metrics.coverage),
                ("mae", a.metrics.mae, b.metrics.mae),
                ("pa", a.metrics.precision_assurance, b.metrics.precision_assurance),
            ];
            for (name, x, y) in pairs {
                checked += 1;
                let tol = 3.0 * x.mc_se.hypot(y.mc_se);
                if (x.value - y.value).abs() > tol {
                    misses.push(format!(
                        "{label} vif {vif} {name}: {:.4} vs {:.4} (tol {tol:.4})",
                        x.value, y.value
                    ));
                }
            }
        }
    }
    verdict(
        11,
        misses.is_empty(),
        &format!("{checked} comparisons; misses: {misses:?}"),
    );
}

#[test]
fn criterion_12_determinism() {
    let g = GridConfig {
        n_grid: vec![100, 1000],
        vif_grid: vec![1.0, 10.0],
        n_sims: 300,
        ..GridConfig::default()
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (threads, dir) in [1, 8].into_iter().zip(&dirs) {
        let run = run_grid(&g, Some(threads)).unwrap();
        assert_eq!(run.results.len(), 4);
        write_run_outputs(&run, &HeatmapMetric::ALL, dir.path()).unwrap();
    }
    let mut files = vec!["results.csv".to_string()];
    files.extend(HeatmapMetric::ALL.iter().map(|m| format!("heatmap_{}.csv", m.name())));
    let differing: Vec<&String> = files
        .iter()
        .filter(|f| std::fs::read(dirs[0].path().join(f)).unwrap() != std::fs::read(dirs[1].path().join(f)).unwrap())
        .collect();
    verdict(
        12,
        differing.is_empty(),
        &format!("1 vs 8 threads, files differing: {differing:?}"),
    );
}
