//! `specfold`: spectral statistics of random and clustered networks.
//!
//! ```text
//! specfold generate --set ensemble.p=0.05 --set ensemble.count=5 --out nets/
//! specfold run --config fig2.conf --set ensemble.seed=9
//! specfold reproduce-fig 2 --out out/fig2
//! specfold analyze network.edges --set unfolding.methods=poly3,poly5
//! specfold theory goe_delta3 --grid 0.5:50:0.5
//! ```
//!
//! The output directory defaults to `$SPECFOLD_OUTPUT_DIR`, then `specfold-out`.
//! Exit codes: 0 success, 2 configuration error, 3 numerical error, 4 I/O error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use specfold::ensemble::{generate_member, EnsembleSpec};
use specfold::pipeline::{self, ExperimentConfig, ResultBundle};
use specfold::spectral;
use specfold::stats::SpacingHistogram;
use specfold::theory::{self, TheoryCurve};
use specfold::Error;

const OUTPUT_ENV: &str = "SPECFOLD_OUTPUT_DIR";
const FALLBACK_OUTPUT: &str = "specfold-out";

#[derive(Parser)]
#[command(name = "specfold", version, about = "Level statistics of network adjacency spectra")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an ensemble and write one edge list per member.
    Generate {
        #[command(flatten)]
        experiment: ExperimentArgs,
        /// Also write each member's eigenvalues.
        #[arg(long)]
        spectra: bool,
    },
    /// Run a full experiment from a config file and overrides.
    Run {
        #[command(flatten)]
        experiment: ExperimentArgs,
    },
    /// Recompute the data behind figure 1, 2 or 3.
    ReproduceFig {
        #[arg(value_parser = clap::value_parser!(u32).range(1..=3))]
        which: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0: all cores).
        #[arg(long, default_value_t = 0)]
        parallelism: usize,
    },
    /// Analyze a single network given as an edge list.
    Analyze {
        edge_list: PathBuf,
        /// `section.key=value` override, repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate a reference curve.
    Theory {
        /// One of goe_nnsd, poisson_nnsd, two_goe_nnsd, goe_sigma2, goe_delta3,
        /// poisson_sigma2, poisson_delta3, semicircle_density.
        curve: String,
        /// `start:stop:step` or a comma-separated list.
        #[arg(long)]
        grid: String,
        /// Level count for semicircle_density.
        #[arg(long)]
        n: Option<usize>,
        /// Radius for semicircle_density.
        #[arg(long)]
        a: Option<f64>,
        /// Bin-average a spacing density over the grid intervals instead of
        /// sampling it at the grid points.
        #[arg(long)]
        bins: bool,
        /// Write here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct ExperimentArgs {
    /// Config file (`key = value` lines under `[section]` headers).
    #[arg(long)]
    config: Option<PathBuf>,
    /// `section.key=value` override, repeatable; applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0: all cores).
    #[arg(long)]
    parallelism: Option<usize>,
}

impl ExperimentArgs {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::parse(&fs::read_to_string(path)?)?,
            None => ExperimentConfig::default(),
        };
        for o in &self.overrides {
            cfg.apply_override(o)?;
        }
        if let Some(p) = self.parallelism {
            cfg.parallelism = p;
        }
        cfg.output_dir = Some(resolve_output(self.out.clone(), cfg.output_dir.take()));
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Flag, then config value, then the environment, then the fallback.
fn resolve_output(flag: Option<PathBuf>, configured: Option<PathBuf>) -> PathBuf {
    flag.or(configured)
        .or_else(|| std::env::var_os(OUTPUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(FALLBACK_OUTPUT))
}

fn parse_grid(text: &str) -> Result<Vec<f64>, Error> {
    let bad = || Error::Config(format!("bad grid {text:?}; use start:stop:step or a,b,c"));
    let parts: Vec<&str> = text.split(':').collect();
    let grid = if parts.len() == 3 {
        let nums = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || !(stop >= start) || !stop.is_finite() {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| start + k as f64 * step).collect()
    } else if parts.len() == 1 {
        text.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        return Err(bad());
    };
    if grid.is_empty() {
        return Err(bad());
    }
    Ok(grid)
}

/// Print a summary; the exit code is that of the first member failure, if any.
fn report(bundles: &[ResultBundle], dir: &Path) -> i32 {
    for b in bundles {
        for m in &b.methods {
            let status = if m.failed { "FAILED" } else { "ok" };
            println!("{} {}: {} members, {status}", b.config.name, m.label, m.member_count());
        }
        if let Some(l1) = b.density_l1 {
            println!("{} density: L1 to semicircle {l1:.4}", b.config.name);
        }
    }
    println!("output: {}", dir.display());
    let errors: Vec<_> = bundles.iter().flat_map(|b| &b.errors).collect();
    for e in &errors {
        eprintln!("error: {}", e.error);
    }
    errors.first().map_or(0, |e| e.error.exit_code())
}

fn generate(args: &ExperimentArgs, spectra: bool) -> Result<i32, Error> {
    let cfg = args.load()?;
    let dir = cfg.output_dir.clone().unwrap_or_default();
    fs::create_dir_all(&dir)?;
    let spec: &EnsembleSpec = &cfg.ensemble;
    for i in 0..spec.count {
        let m = generate_member(spec, i)?;
        fs::write(dir.join(format!("member_{i:03}.edges")), m.to_edge_list())?;
        if spectra {
            let s = spectral::eigenvalues::<f64>(&m).map_err(|e| e.at(i, specfold::Stage::Eigen))?;
            let mut buf = Vec::new();
            s.write_csv(&mut buf)?;
            fs::write(dir.join(format!("member_{i:03}_spectrum.csv")), buf)?;
        }
    }
    fs::write(dir.join("ensemble.conf"), cfg.to_text())?;
    println!("{} members written to {}", spec.count, dir.display());
    Ok(0)
}

fn tabulate(
    curve: &str,
    grid: &str,
    n: Option<usize>,
    a: Option<f64>,
    bins: bool,
    out: Option<&Path>,
) -> Result<i32, Error> {
    let params = match (n, a) {
        (Some(n), Some(a)) => Some((n, a)),
        (None, None) => None,
        _ => return Err(Error::Config("--n and --a go together".into())),
    };
    let curve = TheoryCurve::parse(curve, params).map_err(|e| Error::Config(e.to_string()))?;
    let grid = parse_grid(grid)?;
    let mut buf = Vec::new();
    if bins {
        let cdf: fn(f64) -> f64 = match curve {
            TheoryCurve::GoeNnsd => theory::wigner_cdf,
            TheoryCurve::PoissonNnsd => theory::poisson_cdf,
            TheoryCurve::TwoGoeNnsd => theory::two_goe_cdf,
            _ => return Err(Error::Config("--bins applies to spacing densities only".into())),
        };
        if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] < 0.0 {
            return Err(Error::Config("--bins needs ascending non-negative bin edges".into()));
        }
        let shell = SpacingHistogram {
            bin_edges: grid,
            densities: Vec::new(),
            sample_count: 0,
        };
        shell.reference_from_cdf(cdf).write_csv(&mut buf)?;
    } else {
        curve.sample(&grid)?.write_csv(&mut buf)?;
    }
    match out {
        Some(path) => fs::write(path, buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(0)
}

fn dispatch(command: Command) -> Result<i32, Error> {
    match command {
        Command::Generate { experiment, spectra } => generate(&experiment, spectra),
        Command::Run { experiment } => {
            let cfg = experiment.load()?;
            let bundle = pipeline::run_experiment(&cfg)?;
            Ok(report(&[bundle], cfg.output_dir.as_deref().unwrap_or(Path::new("."))))
        }
        Command::ReproduceFig {
            which,
            seed,
            out,
            parallelism,
        } => {
            let dir = resolve_output(out, None);
            let bundles = pipeline::reproduce_figure(which, seed, &dir, parallelism)?;
            Ok(report(&bundles, &dir))
        }
        Command::Analyze {
            edge_list,
            overrides,
            out,
        } => {
            let dir = resolve_output(out, None);
            let bundle = pipeline::analyze_file(&edge_list, &overrides, Some(&dir))?;
            Ok(report(&[bundle], &dir))
        }
        Command::Theory {
            curve,
            grid,
            n,
            a,
            bins,
            out,
        } => tabulate(&curve, &grid, n, a, bins, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
