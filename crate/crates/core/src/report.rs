//! Result files: `results.csv`, `manifest.json` and `heatmap_<metric>.csv`.
//!
//! Real numbers are written with 6 significant digits (`%g` style), so
//! reruns produce byte-identical files and heatmap cells match the
//! results table textually.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::config::{parse_omit, predictor_name};
use crate::corrstruct::Structure;
use crate::runner::{RunManifest, ScenarioResult};
use crate::{Error, Result};

pub const RESULTS_HEADER: [&str; 22] = [
    "n",
    "vif",
    "structure",
    "p",
    "beta_main",
    "d",
    "n_sims",
    "omit",
    "coverage",
    "coverage_mcse",
    "bias",
    "bias_mcse",
    "mae",
    "mae_mcse",
    "pa",
    "pa_mcse",
    "power",
    "power_mcse",
    "ci_width",
    "ci_width_mcse",
    "se",
    "se_mcse",
];

/// Formats `x` with `digits` significant digits, like C's `%g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn g6(x: f64) -> String {
    format_sig(x, 6)
}

fn omit_label(omit: &[usize]) -> String {
    omit.iter().map(|&j| predictor_name(j)).collect::<Vec<_>>().join(";")
}

fn result_fields(r: &ScenarioResult) -> Vec<String> {
    let m = &r.metrics;
    let mut f = vec![
        r.n.to_string(),
        g6(r.vif),
        r.structure.label().to_string(),
        r.p.to_string(),
        g6(r.beta_main),
        g6(r.cohens_d),
        m.n_sims.to_string(),
        omit_label(&r.omit),
    ];
    for e in [
        m.coverage,
        m.bias,
        m.mae,
        m.precision_assurance,
        m.power_traditional,
        m.mean_ci_width,
        m.mean_se,
    ] {
        f.push(g6(e.value));
        f.push(g6(e.mc_se));
    }
    f
}

pub fn write_results_csv(results: &[ScenarioResult], path: &Path) -> Result<()> {
    if results.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut text = String::new();
    let _ = writeln!(text, "{}", RESULTS_HEADER.join(","));
    for r in results {
        let _ = writeln!(text, "{}", result_fields(r).join(","));
    }
    write_file(path, text.as_bytes())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(bytes)?;
    f.flush()?;
    Ok(())
}

/// One parsed row of `results.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub n: usize,
    pub vif: f64,
    pub structure: Structure,
    pub p: usize,
    pub beta_main: f64,
    pub d: f64,
    pub n_sims: usize,
    pub omit: Vec<usize>,
    /// The 14 metric columns, in header order.
    pub values: [f64; 14],
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let text = std::fs::read_to_string(path)?;
    let perr = |msg: String| Error::Parse {
        path: path.to_path_buf(),
        msg,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| perr("empty file".into()))?;
    if header != RESULTS_HEADER.join(",") {
        return Err(perr(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != RESULTS_HEADER.len() {
            return Err(perr(format!("row {} has {} fields", i + 1, f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| perr(format!("row {}: {s:?}: {e}", i + 1)));
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| perr(format!("row {}: {s:?}: {e}", i + 1)))
        };
        let mut values = [0.0; 14];
        for (v, s) in values.iter_mut().zip(&f[8..]) {
            *v = num(s)?;
        }
        rows.push(ResultRow {
            n: int(f[0])?,
            vif: num(f[1])?,
            structure: Structure::parse(f[2]).map_err(|e| perr(e.to_string()))?,
            p: int(f[3])?,
            beta_main: num(f[4])?,
            d: num(f[5])?,
            n_sims: int(f[6])?,
            omit: parse_omit(f[7]).map_err(|e| perr(e.to_string()))?.into_iter().collect(),
            values,
        });
    }
    Ok(rows)
}

/// Writes the manifest as pretty-printed JSON in field order.
pub fn write_metadata_json(manifest: &RunManifest, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn read_metadata_json(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapMetric {
    Pa,
    Power,
    Coverage,
    Mae,
}

impl HeatmapMetric {
    pub const ALL: [HeatmapMetric; 4] = [
        HeatmapMetric::Pa,
        HeatmapMetric::Power,
        HeatmapMetric::Coverage,
        HeatmapMetric::Mae,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HeatmapMetric::Pa => "pa",
            HeatmapMetric::Power => "power",
            HeatmapMetric::Coverage => "coverage",
            HeatmapMetric::Mae => "mae",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown heatmap metric {s:?}; use pa, power, coverage or mae")))
    }

    pub fn value(self, r: &ScenarioResult) -> f64 {
        let m = &r.metrics;
        match self {
            HeatmapMetric::Pa => m.precision_assurance.value,
            HeatmapMetric::Power => m.power_traditional.value,
            HeatmapMetric::Coverage => m.coverage.value,
            HeatmapMetric::Mae => m.mae.value,
        }
    }
}

/// Writes an `(n × vif)` matrix of one metric: rows are `n` ascending,
/// columns VIF ascending, with axis labels in the first row and column.
pub fn export_heatmap_grid(results: &[ScenarioResult], metric: HeatmapMetric, path: &Path) -> Result<()> {
    let first = results.first().ok_or(Error::EmptyInput)?;
    if results.iter().any(|r| {
        r.structure != first.structure || r.p != first.p || r.beta_main != first.beta_main || r.omit != first.omit
    }) {
        return Err(Error::Domain(
            "heatmap input must share one structure, p, beta_main and omit set".into(),
        ));
    }
    let mut cells: BTreeMap<(usize, u64), f64> = BTreeMap::new();
    let mut ns = BTreeSet::new();
    let mut vifs: Vec<f64> = Vec::new();
    for r in results {
        if cells.insert((r.n, r.vif.to_bits()), metric.value(r)).is_some() {
            return Err(Error::Domain(format!("duplicate cell (n = {}, vif = {})", r.n, r.vif)));
        }
        ns.insert(r.n);
        if !vifs.contains(&r.vif) {
            vifs.push(r.vif);
        }
    }
    vifs.sort_by(f64::total_cmp);
    let missing: Vec<(usize, f64)> = ns
        .iter()
        .flat_map(|&n| vifs.iter().map(move |&v| (n, v)))
        .filter(|(n, v)| !cells.contains_key(&(*n, v.to_bits())))
        .collect();
    if !missing.is_empty() {
        return Err(Error::RaggedGrid { missing });
    }
    let mut text = String::new();
    let header: Vec<String> = std::iter::once("n/vif".to_string())
        .chain(vifs.iter().map(|&v| g6(v)))
        .collect();
    let _ = writeln!(text, "{}", header.join(","));
    for &n in &ns {
        let row: Vec<String> = std::iter::once(n.to_string())
            .chain(vifs.iter().map(|v| g6(cells[&(n, v.to_bits())])))
            .collect();
        let _ = writeln!(text, "{}", row.join(","));
    }
    write_file(path, text.as_bytes())
}

/// Writes `results.csv`, `manifest.json` and the requested heatmaps under
/// `out_dir`, which must exist. Sweeps get one heatmap per `β_main`, named
/// `heatmap_<metric>_beta<value>.csv`. Returns the written paths.
pub fn write_run_outputs(
    run: &crate::runner::GridRun,
    heatmaps: &[HeatmapMetric],
    out_dir: &Path,
) -> Result<Vec<std::path::PathBuf>> {
    if !out_dir.is_dir() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("output directory {} does not exist", out_dir.display()),
        )));
    }
    let mut written = Vec::new();
    let manifest = out_dir.join("manifest.json");
    write_metadata_json(&run.manifest, &manifest)?;
    written.push(manifest);
    if run.results.is_empty() {
        return Ok(written);
    }
    let results = out_dir.join("results.csv");
    write_results_csv(&run.results, &results)?;
    written.push(results);

    let mut betas: Vec<f64> = Vec::new();
    for r in &run.results {
        if !betas.contains(&r.beta_main) {
            betas.push(r.beta_main);
        }
    }
    betas.sort_by(f64::total_cmp);
    for metric in heatmaps {
        for &b in &betas {
            let subset: Vec<ScenarioResult> = run.results.iter().filter(|r| r.beta_main == b).cloned().collect();
            let name = if betas.len() == 1 {
                format!("heatmap_{}.csv", metric.name())
            } else {
                format!("heatmap_{}_beta{}.csv", metric.name(), g6(b))
            };
            let path = out_dir.join(name);
            export_heatmap_grid(&subset, *metric, &path)?;
            written.push(path);
        }
    }
    Ok(written)
}
