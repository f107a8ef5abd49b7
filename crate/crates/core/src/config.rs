//! Flat `key = value` config files for [`GridConfig`].
//!
//! ```text
//! # comments start with '#'
//! vif_grid = 1, 2, 10        # or `default`
//! n_grid = 100, 1000         # or `default`
//! structure = pairwise       # pairwise | equi
//! p = 6
//! intercept = 10
//! betas = default            # or a list, x_main first
//! beta_main_sweep = default  # `default`, `sweep` (0, 0.1, …, 2) or a list
//! sigma_eps = default        # π/√3, or a number
//! n_sims = 1000
//! seed_base = 0
//! omit = x4                  # predictor names or indices; empty for none
//! c_powval = 0.189
//! engine = compressed        # compressed | direct
//! ```
//!
//! Every key is optional. Unknown keys and repeated keys are errors.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::corrstruct::{Structure, DEFAULT_VIF_GRID};
use crate::metrics::PrecisionMargin;
use crate::runner::{effect_size_sweep, GridConfig, DEFAULT_N_GRID};
use crate::{Error, Result};

const KEYS: [&str; 13] = [
    "vif_grid",
    "n_grid",
    "structure",
    "p",
    "intercept",
    "betas",
    "beta_main_sweep",
    "sigma_eps",
    "n_sims",
    "seed_base",
    "omit",
    "c_powval",
    "engine",
];

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key} = {value:?}: {why}"))
}

fn parse_f64_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| bad(key, s, e)))
        .collect()
}

fn parse_usize_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.replace('_', "").parse::<usize>().map_err(|e| bad(key, s, e)))
        .collect()
}

/// Parses a predictor name: `x_main`/`xmain` is 0, `xK` or `K` is K.
pub fn parse_predictor(name: &str) -> Result<usize> {
    let t = name.trim().to_ascii_lowercase();
    if t == "x_main" || t == "xmain" {
        return Ok(0);
    }
    let digits = t.strip_prefix('x').unwrap_or(&t);
    digits
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("unknown predictor {name:?}; use x_main, x1, x2, …")))
}

pub fn predictor_name(index: usize) -> String {
    if index == 0 {
        "x_main".into()
    } else {
        format!("x{index}")
    }
}

pub fn parse_omit(value: &str) -> Result<BTreeSet<usize>> {
    value
        .split([',', ';'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_predictor)
        .collect()
}

/// Applies one `key = value` setting.
pub fn apply_setting(g: &mut GridConfig, key: &str, value: &str) -> Result<()> {
    let v = value.trim();
    let is_default = v.eq_ignore_ascii_case("default");
    match key {
        "vif_grid" => {
            g.vif_grid = if is_default {
                DEFAULT_VIF_GRID.to_vec()
            } else {
                parse_f64_list(key, v)?
            }
        }
        "n_grid" => {
            g.n_grid = if is_default {
                DEFAULT_N_GRID.to_vec()
            } else {
                parse_usize_list(key, v)?
            }
        }
        "structure" => g.structure = Structure::parse(v)?,
        "p" => g.p = v.parse().map_err(|e| bad(key, v, e))?,
        "intercept" => g.intercept = v.parse().map_err(|e| bad(key, v, e))?,
        "betas" => {
            g.betas = if is_default {
                None
            } else {
                Some(parse_f64_list(key, v)?)
            }
        }
        "beta_main_sweep" => {
            g.beta_main_sweep = if is_default {
                None
            } else if v.eq_ignore_ascii_case("sweep") {
                Some(effect_size_sweep())
            } else {
                Some(parse_f64_list(key, v)?)
            }
        }
        "sigma_eps" => {
            g.sigma_eps = if is_default {
                crate::datagen::default_sigma_eps()
            } else {
                v.parse().map_err(|e| bad(key, v, e))?
            }
        }
        "n_sims" => g.n_sims = v.replace('_', "").parse().map_err(|e| bad(key, v, e))?,
        "seed_base" => g.seed_base = v.parse().map_err(|e| bad(key, v, e))?,
        "omit" => g.omit = parse_omit(v)?,
        "c_powval" => {
            let c: f64 = v.parse().map_err(|e| bad(key, v, e))?;
            g.margin = PrecisionMargin::new(c)?;
        }
        "engine" => {
            crate::engine::engines().get(v)?;
            g.engine = v.to_string();
        }
        other => {
            return Err(Error::Config(format!(
                "unknown key {other:?}; known keys: {}",
                KEYS.join(", ")
            )))
        }
    }
    Ok(())
}

/// Parses config text on top of the defaults.
pub fn parse_config(text: &str) -> Result<GridConfig> {
    let mut g = GridConfig::default();
    let mut seen = BTreeSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        if !seen.insert(key.to_string()) {
            return Err(Error::Config(format!("line {}: duplicate key {key:?}", lineno + 1)));
        }
        apply_setting(&mut g, key, value).map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
    }
    Ok(g)
}

pub fn load_config(path: &Path) -> Result<GridConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

impl GridConfig {
    /// Canonical text form; parses back to an equal config.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let betas = self.betas.as_ref().map_or("default".to_string(), |b| join(b));
        let sweep = self.beta_main_sweep.as_ref().map_or("default".to_string(), |b| join(b));
        let omit: Vec<String> = self.omit.iter().map(|&j| predictor_name(j)).collect();
        let _ = writeln!(s, "vif_grid = {}", join(&self.vif_grid));
        let _ = writeln!(s, "n_grid = {}", join(&self.n_grid));
        let _ = writeln!(s, "structure = {}", self.structure.label());
        let _ = writeln!(s, "p = {}", self.p);
        let _ = writeln!(s, "intercept = {}", self.intercept);
        let _ = writeln!(s, "betas = {betas}");
        let _ = writeln!(s, "beta_main_sweep = {sweep}");
        let _ = writeln!(s, "sigma_eps = {}", self.sigma_eps);
        let _ = writeln!(s, "n_sims = {}", self.n_sims);
        let _ = writeln!(s, "seed_base = {}", self.seed_base);
        let _ = writeln!(s, "omit = {}", omit.join(", "));
        let _ = writeln!(s, "c_powval = {}", self.margin.c_powval);
        let _ = writeln!(s, "engine = {}", self.engine);
        s
    }
}
