//! Experiment configuration, end-to-end runs and the canned figure runs.

pub mod config;
pub mod output;
pub mod run;

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, MethodSpec, StatisticsConfig, TrimConfig};
pub use output::{render, write_outputs, OutputFile, MANIFEST_NAME};
pub use run::{check_spectral_identities, execute, resolve_method, MemberError, MethodResult, ResultBundle, Source};

use crate::ensemble::{ingest_edge_list, EnsembleSpec};
use crate::error::{Error, Result};
use crate::stats::{CurveKind, StatCurve};
use crate::theory;

/// Fraction of the level count usable as the largest window length.
const ANALYZE_L_FRACTION: f64 = 0.45;

fn require_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    cfg.output_dir
        .clone()
        .ok_or_else(|| Error::Config("no output directory given".into()))
}

/// Execute `cfg` and write its files and manifest to `cfg.output_dir`.
///
/// Member failures do not abort the run: what succeeded is written and the
/// manifest is marked `FAILED`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultBundle> {
    let dir = require_dir(cfg)?;
    let bundle = execute(cfg, Source::Generate)?;
    let files = render(&bundle)?;
    write_outputs(&dir, &[&bundle], &files)?;
    Ok(bundle)
}

fn poly(degree: usize) -> MethodSpec {
    MethodSpec::Poly {
        degree,
        include_constant: true,
    }
}

/// Configs behind [`reproduce_figure`]: 20 members of dimension 1000 each.
///
/// Figures 2 and 3 unfold the spectrum without edge trimming: only the Perron
/// levels are dropped.
pub fn figure_configs(which: u32, seed: u64) -> Result<Vec<ExperimentConfig>> {
    let base = ExperimentConfig::default();
    let mut cfg = ExperimentConfig {
        panel_letters: true,
        ..base.clone()
    };
    cfg.trim.edge_fraction = 0.0;
    cfg.statistics.sigma2 = true;
    match which {
        1 => {
            let runs = [0.001, 0.01, 0.1]
                .iter()
                .map(|&p| {
                    let mut c = base.clone();
                    c.name = format!("fig1_p{p}");
                    c.ensemble = EnsembleSpec::erdos_renyi(20, 1000, p, seed);
                    c.methods = vec![MethodSpec::Semicircle];
                    c.statistics.density = true;
                    c.statistics.nnsd = false;
                    c.statistics.delta3 = false;
                    c.statistics.sigma2 = false;
                    c
                })
                .collect();
            Ok(runs)
        }
        2 => {
            cfg.name = "fig2".into();
            cfg.ensemble = EnsembleSpec::erdos_renyi(20, 1000, 0.1, seed);
            cfg.methods = vec![MethodSpec::Semicircle, poly(3), poly(4), poly(5)];
            Ok(vec![cfg])
        }
        3 => {
            cfg.name = "fig3".into();
            cfg.ensemble = EnsembleSpec::clustered(20, vec![500, 500], 0.1, 0.0, seed);
            cfg.methods = vec![MethodSpec::BlockSemicircle, poly(3), poly(4), poly(5)];
            Ok(vec![cfg])
        }
        other => Err(Error::Config(format!("no figure {other}; expected 1, 2 or 3"))),
    }
}

/// Unit-area semicircle of radius 2 on `[-2.5, 2.5]`, the rescaled reference of figure 1.
pub fn rescaled_semicircle() -> Result<StatCurve<f64>> {
    let grid: Vec<f64> = (0..=500).map(|k| -2.5 + 0.01 * k as f64).collect();
    let values = grid.iter().map(|&x| theory::semicircle_density(1, 2.0, x)).collect();
    StatCurve::single(grid, values, CurveKind::Theory, "semicircle_density")
}

/// Run one of the canned figure configurations and write it to `output_dir`.
/// Figure 1 yields three bundles sharing one manifest.
pub fn reproduce_figure(which: u32, seed: u64, output_dir: &Path, parallelism: usize) -> Result<Vec<ResultBundle>> {
    let mut bundles = Vec::new();
    let mut files = Vec::new();
    for mut cfg in figure_configs(which, seed)? {
        cfg.output_dir = Some(output_dir.to_path_buf());
        cfg.parallelism = parallelism;
        let bundle = execute(&cfg, Source::Generate)?;
        files.extend(
            render(&bundle)?
                .into_iter()
                .filter(|f| which != 1 || !f.name.ends_with("_density_semicircle.csv")),
        );
        bundles.push(bundle);
    }
    if which == 1 {
        let reference = rescaled_semicircle()?;
        let mut contents = Vec::new();
        reference.write_csv(&mut contents)?;
        files.push(OutputFile {
            name: "fig1_semicircle.csv".into(),
            contents,
        });
    }
    let refs: Vec<&ResultBundle> = bundles.iter().collect();
    write_outputs(output_dir, &refs, &files)?;
    Ok(bundles)
}

/// Defaults for a single real network: polynomial unfoldings only, since no
/// exact density is known.
pub fn analysis_config(name: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.name = name.to_string();
    cfg.ensemble.count = 1;
    cfg.ensemble.seed = 0;
    cfg.methods = vec![poly(3), poly(4), poly(5)];
    cfg.trim.drop_top = Some(1);
    cfg.statistics.sigma2 = true;
    cfg
}

/// Ingest an edge list and run the single-spectrum pipeline on it.
///
/// `overrides` are `section.key=value` assignments applied after the defaults.
/// The ensemble section is replaced by the ingested network's size and link
/// density; `l_max` is capped to what the level count supports.
pub fn analyze_file(path: &Path, overrides: &[String], output_dir: Option<&Path>) -> Result<ResultBundle> {
    let reader = BufReader::new(File::open(path)?);
    let net = ingest_edge_list(reader)?;
    log::info!(
        "{}: {} nodes, {} edges, {} self-loops dropped, {} duplicates",
        path.display(),
        net.matrix.n(),
        net.matrix.edge_count(),
        net.self_loops,
        net.duplicate_edges
    );
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().replace(|c: char| !c.is_ascii_alphanumeric() && c != '_' && c != '-', "_"))
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "network".into());
    let mut cfg = analysis_config(&stem);
    let n = net.matrix.n();
    let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
    cfg.ensemble = EnsembleSpec::erdos_renyi(1, n, net.matrix.edge_count() as f64 / pairs, 0);
    for o in overrides {
        cfg.apply_override(o)?;
    }
    cfg.ensemble.count = 1;
    cfg.ensemble.n = n;
    cfg.ensemble.block_sizes = vec![n];
    if let Some(dir) = output_dir {
        cfg.output_dir = Some(dir.to_path_buf());
    }
    let st = &mut cfg.statistics;
    if st.sigma2 || st.delta3 {
        let levels = n.saturating_sub(cfg.trim.resolved_drop(&cfg.ensemble)) as f64 * (1.0 - 2.0 * cfg.trim.edge_fraction);
        let cap = (ANALYZE_L_FRACTION * (levels - 1.0)).floor();
        if st.l_max > cap {
            log::warn!("l_max {} capped to {cap} for {n} nodes", st.l_max);
            st.l_max = cap;
        }
        if st.l_max < st.l_min {
            st.sigma2 = false;
            st.delta3 = false;
            log::warn!("too few levels for any window length; Σ² and Δ₃ skipped");
        }
    }
    let bundle = execute(&cfg, Source::Matrices(vec![net.matrix]))?;
    if let Some(dir) = &cfg.output_dir {
        let files = render(&bundle)?;
        write_outputs(dir, &[&bundle], &files)?;
    }
    Ok(bundle)
}
