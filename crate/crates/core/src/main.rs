use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use collinsim::config::{apply_setting, load_config, parse_omit};
use collinsim::corrstruct::{CorrelationSpec, Structure};
use collinsim::datagen::{generate_dataset, write_dataset_csv, Scenario};
use collinsim::experiments::presets;
use collinsim::metrics::{calibrate_from_fits, DEFAULT_CALIBRATION_TOL};
use collinsim::oracles::compare;
use collinsim::report::{write_run_outputs, HeatmapMetric};
use collinsim::runner::{effect_size_sweep, enumerate_scenarios, run_grid, GridConfig};
use collinsim::{Error, Result};

#[derive(Parser)]
#[command(
    name = "collinsim",
    version,
    about = "Collinearity and sample size Monte Carlo study for OLS inference"
)]
struct Cli {
    #[command(flatten)]
    opts: GridOpts,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GridOpts {
    /// Flat key = value config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing)
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed_base: Option<u64>,
    #[arg(long, global = true)]
    n_sims: Option<usize>,
    /// Predictors to drop before fitting, e.g. x4
    #[arg(long, global = true)]
    omit: Option<String>,
    /// pairwise | equi
    #[arg(long, global = true)]
    structure: Option<String>,
    /// Number of predictors (6 or 20 have preset coefficients)
    #[arg(long, global = true)]
    p: Option<usize>,
    /// Run beta_main = 0, 0.1, ..., 2
    #[arg(long, global = true)]
    sweep_beta_main: bool,
    /// compressed | direct
    #[arg(long, global = true)]
    engine: Option<String>,
    /// Comma-separated VIF levels
    #[arg(long, global = true)]
    vif_grid: Option<String>,
    /// Comma-separated sample sizes
    #[arg(long, global = true)]
    n_grid: Option<String>,
    #[arg(long, global = true)]
    c_powval: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the grid from --config and flags
    Run,
    /// Calibrate c_powval at N = 1000, VIF = 1
    Calibrate {
        #[arg(long, default_value_t = 0.8)]
        target: f64,
        #[arg(long, default_value_t = DEFAULT_CALIBRATION_TOL)]
        tol: f64,
    },
    /// Compare simulated metrics with closed-form approximations
    Check,
    /// Run a named experiment (fig1, fig2, fig4, fig5, s1, s3, s5, s11)
    Preset { name: String },
    /// Write replicate datasets of one scenario as CSV
    Dump {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        vif: f64,
        /// Number of replicates to write
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
}

impl GridOpts {
    /// Config file (or defaults) with command-line overrides applied.
    fn grid(&self) -> Result<GridConfig> {
        let mut g = match &self.config {
            Some(path) => load_config(path)?,
            None => GridConfig::default(),
        };
        self.apply(&mut g)?;
        Ok(g)
    }

    fn apply(&self, g: &mut GridConfig) -> Result<()> {
        if let Some(v) = self.seed_base {
            g.seed_base = v;
        }
        if let Some(v) = self.n_sims {
            g.n_sims = v;
        }
        if let Some(v) = &self.omit {
            g.omit = parse_omit(v)?;
        }
        if let Some(v) = &self.structure {
            g.structure = Structure::parse(v)?;
        }
        if let Some(v) = self.p {
            g.p = v;
        }
        if self.sweep_beta_main {
            g.beta_main_sweep = Some(effect_size_sweep());
        }
        for (key, value) in [
            ("engine", &self.engine),
            ("vif_grid", &self.vif_grid),
            ("n_grid", &self.n_grid),
        ] {
            if let Some(v) = value {
                apply_setting(g, key, v)?;
            }
        }
        if let Some(c) = self.c_powval {
            apply_setting(g, "c_powval", &c.to_string())?;
        }
        Ok(())
    }

    fn has_grid_source(&self) -> bool {
        self.config.is_some() || self.vif_grid.is_some() || self.n_grid.is_some()
    }
}

fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

/// Runs one grid and writes its files. Returns false if any scenario failed.
fn execute(g: &GridConfig, heatmaps: &[HeatmapMetric], threads: Option<usize>, out: &Path) -> Result<bool> {
    ensure_dir(out)?;
    let n = enumerate_scenarios(g)?.len();
    eprintln!("running {n} scenarios x {} replicates -> {}", g.n_sims, out.display());
    let start = std::time::Instant::now();
    let run = run_grid(g, threads)?;
    for f in &run.failures {
        eprintln!(
            "scenario {} (n = {}, vif = {}) failed: {}",
            f.index, f.n, f.vif, f.error
        );
    }
    let written = write_run_outputs(&run, heatmaps, out)?;
    eprintln!("done in {:.1?}; wrote {} files", start.elapsed(), written.len());
    Ok(run.is_complete())
}

fn cmd_check(opts: &GridOpts) -> Result<bool> {
    let mut g = opts.grid()?;
    if !opts.has_grid_source() {
        g.n_grid = vec![100, 1000, 10_000];
        g.vif_grid = vec![1.0, 2.0, 10.0, 50.0];
    }
    let betas = g.resolved_betas()?;
    let beta_omitted = match g.omit.iter().collect::<Vec<_>>().as_slice() {
        [j] => Some(betas[**j]),
        _ => None,
    };
    let run = run_grid(&g, opts.threads)?;
    println!(
        "{:>7} {:>6} {:>6} | {:>9} {:>9} {:>6} | {:>8} {:>8} | {:>6} {:>6} | {:>6} {:>6} | {:>8} {:>8} | ok",
        "n",
        "vif",
        "beta",
        "se_sim",
        "se_orc",
        "rel",
        "mae_sim",
        "mae_orc",
        "pa_sim",
        "pa_orc",
        "pw_sim",
        "pw_orc",
        "bias_sim",
        "bias_orc"
    );
    let (mut ok_count, mut total) = (0, 0);
    for r in &run.results {
        let rho = CorrelationSpec::new(r.structure, r.vif, r.p)?.r()?;
        let c = compare(r, g.sigma_eps, g.margin.c_powval, rho, beta_omitted);
        let (bias_sim, bias_orc) = c.bias.map_or(("-".into(), "-".into()), |(s, o)| {
            (format!("{:.4}", s.value), format!("{o:.4}"))
        });
        let ok = c.se_ok() && c.mae_ok() && c.pa_ok() && c.power_ok() && c.bias_ok().unwrap_or(true);
        total += 1;
        ok_count += ok as usize;
        println!(
            "{:>7} {:>6} {:>6} | {:>9.5} {:>9.5} {:>6.3} | {:>8.4} {:>8.4} | {:>6.3} {:>6.3} | {:>6.3} {:>6.3} | {:>8} {:>8} | {}",
            r.n,
            r.vif,
            r.beta_main,
            c.se.0,
            c.se.1,
            c.se_rel_error(),
            c.mae.0.value,
            c.mae.1,
            c.pa.0.value,
            c.pa.1,
            c.power.0.value,
            c.power.1,
            bias_sim,
            bias_orc,
            if ok { "yes" } else { "NO" }
        );
    }
    println!("{ok_count}/{total} scenarios within oracle tolerance");
    Ok(run.is_complete())
}

fn cmd_calibrate(opts: &GridOpts, target: f64, tol: f64) -> Result<bool> {
    let g = opts.grid()?;
    let spec = CorrelationSpec::new(g.structure, 1.0, g.p)?;
    let mut s = Scenario::with_defaults(1000, spec)?;
    s.betas = g.resolved_betas()?;
    s.intercept = g.intercept;
    s.sigma_eps = g.sigma_eps;
    s.n_sims = g.n_sims;
    s.seed_base = g.seed_base;
    s.validate()?;
    let fits = g.engine()?.fit_replicates(&s)?;
    let margin = calibrate_from_fits(&fits, s.beta_main(), target, tol)?;
    println!("c_powval = {:.6}", margin.c_powval);
    Ok(true)
}

fn cmd_dump(opts: &GridOpts, n: usize, vif: f64, count: usize) -> Result<bool> {
    let g = opts.grid()?;
    let mut s = Scenario::with_defaults(n, CorrelationSpec::new(g.structure, vif, g.p)?)?;
    s.betas = g.resolved_betas()?;
    s.intercept = g.intercept;
    s.sigma_eps = g.sigma_eps;
    s.seed_base = g.seed_base;
    s.n_sims = count.max(1);
    ensure_dir(&opts.out)?;
    for i in 0..count {
        let d = generate_dataset(&s, i)?;
        let path = opts.out.join(format!("replicate_{:04}.csv", s.seed(i)));
        write_dataset_csv(&d, &path)?;
    }
    eprintln!("wrote {count} replicate files to {}", opts.out.display());
    Ok(true)
}

fn dispatch(cli: &Cli) -> Result<bool> {
    let opts = &cli.opts;
    match &cli.command {
        Command::Run => execute(&opts.grid()?, &HeatmapMetric::ALL, opts.threads, &opts.out),
        Command::Calibrate { target, tol } => cmd_calibrate(opts, *target, *tol),
        Command::Check => cmd_check(opts),
        Command::Preset { name } => {
            let preset = presets().get(name)?;
            let base = opts.grid()?;
            let mut complete = true;
            let runs = preset.runs(&base);
            for run in &runs {
                let out = if runs.len() == 1 {
                    opts.out.clone()
                } else {
                    opts.out.join(&run.label)
                };
                complete &= execute(&run.config, &run.heatmaps, opts.threads, &out)?;
            }
            Ok(complete)
        }
        Command::Dump { n, vif, count } => cmd_dump(opts, *n, *vif, *count),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Parse { .. } | Error::Domain(_) | Error::Scenario(_) => ExitCode::from(2),
                Error::Replicate { .. } | Error::SingularFit { .. } | Error::Calibration { .. } => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
