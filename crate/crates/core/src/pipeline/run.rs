//! Ensemble runs: per-member work in parallel, reductions in member order.

use rayon::prelude::*;

use super::config::{ExperimentConfig, MethodSpec};
use crate::ensemble::{generate_member, AdjacencyMatrix, EnsembleSpec};
use crate::error::{Error, Result, Stage};
use crate::rng;
use crate::spectral::{self, DensityHistogram, Spectrum};
use crate::stats::{self, CurveKind, SpacingHistogram, StatCurve};
use crate::theory::{self, TheoryCurve};
use crate::unfolding::{self, UnfoldedSpectrum, UnfoldingMethod};

const SIGMA2_SALT: u64 = 0x5349_474D_4132;
const DELTA3_SALT: u64 = 0x4445_4C54_4133;

/// Relative tolerance of the trace and Frobenius checks on each spectrum.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// Where the matrices of a run come from.
#[derive(Debug, Clone)]
pub enum Source {
    Generate,
    Matrices(Vec<AdjacencyMatrix>),
}

/// A failure of one member, tagged with the method when it happened after
/// trimming.
#[derive(Debug)]
pub struct MemberError {
    pub member: usize,
    pub stage: Stage,
    pub method: Option<String>,
    pub error: Error,
}

#[derive(Debug, Clone)]
pub struct MethodResult {
    pub spec: MethodSpec,
    pub label: String,
    /// Resolved method; per-member polynomial fits live in `unfolded`.
    pub method: UnfoldingMethod<f64>,
    pub unfolded: Vec<Option<UnfoldedSpectrum<f64>>>,
    /// Spacings of each successful member, in member order.
    pub spacings: Vec<Vec<f64>>,
    pub nnsd: Option<SpacingHistogram<f64>>,
    pub sigma2: Option<StatCurve<f64>>,
    pub delta3: Option<StatCurve<f64>>,
    pub failed: bool,
}

impl MethodResult {
    pub fn pooled_spacings(&self) -> Vec<f64> {
        self.spacings.iter().flatten().copied().collect()
    }

    /// Members that entered the averages.
    pub fn member_count(&self) -> usize {
        self.unfolded.iter().filter(|u| u.is_some()).count()
    }
}

/// Everything a run produced, before or after it is written out.
#[derive(Debug)]
pub struct ResultBundle {
    pub config: ExperimentConfig,
    /// Full (untrimmed) spectrum of each member.
    pub spectra: Vec<Option<Spectrum<f64>>>,
    pub edge_counts: Vec<usize>,
    pub drop_top: usize,
    pub methods: Vec<MethodResult>,
    pub density: Option<DensityHistogram<f64>>,
    pub density_reference: Option<StatCurve<f64>>,
    /// L1 distance of `density` to the semicircle reference.
    pub density_l1: Option<f64>,
    pub nnsd_references: Vec<(String, SpacingHistogram<f64>)>,
    pub curve_references: Vec<StatCurve<f64>>,
    pub errors: Vec<MemberError>,
}

impl ResultBundle {
    pub fn failed(&self) -> bool {
        !self.errors.is_empty()
    }

    pub fn method(&self, label: &str) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.label == label)
    }
}

struct MemberMethod {
    unfolded: UnfoldedSpectrum<f64>,
    spacings: Option<Vec<f64>>,
    sigma2: Option<Vec<f64>>,
    delta3: Option<Vec<f64>>,
}

struct MemberOutcome {
    spectrum: Option<Spectrum<f64>>,
    density_levels: Option<Spectrum<f64>>,
    edge_count: usize,
    fatal: Option<(Stage, Error)>,
    methods: Vec<std::result::Result<MemberMethod, (Stage, Error)>>,
}

/// Semicircle parameters `(n_b, a_b)` of each block, one Perron level removed
/// per block.
fn block_parameters(spec: &EnsembleSpec) -> Result<Vec<(usize, f64)>> {
    let sigma = unfolding::bernoulli_sigma(spec.p_intra);
    spec.block_sizes
        .iter()
        .map(|&b| Ok((b - 1, unfolding::semicircle_radius(b, sigma)?)))
        .collect()
}

/// Turn a configured method into concrete unfolding parameters.
pub fn resolve_method(spec: MethodSpec, ensemble: &EnsembleSpec, drop_top: usize) -> Result<UnfoldingMethod<f64>> {
    let method = match spec {
        MethodSpec::Semicircle => {
            let sigma = unfolding::bernoulli_sigma(ensemble.mean_pair_probability());
            UnfoldingMethod::SemicircleExact {
                n_eff: ensemble.n - drop_top,
                a: unfolding::semicircle_radius(ensemble.n, sigma)?,
            }
        }
        MethodSpec::BlockSemicircle => UnfoldingMethod::BlockSemicircle {
            blocks: block_parameters(ensemble)?,
        },
        MethodSpec::Poly {
            degree,
            include_constant,
        } => UnfoldingMethod::PolynomialFit {
            degree,
            include_constant,
        },
    };
    method.validate()?;
    Ok(method)
}

/// Trace and sum of squares of the spectrum against `0` and `2 |E|`.
pub fn check_spectral_identities(matrix: &AdjacencyMatrix, spectrum: &Spectrum<f64>) -> Result<()> {
    let twice_edges = 2.0 * matrix.edge_count() as f64;
    let scale = twice_edges.max(1.0);
    let trace = spectrum.trace();
    let frob = spectrum.sum_of_squares();
    if trace.abs() > IDENTITY_TOLERANCE * scale || (frob - twice_edges).abs() > IDENTITY_TOLERANCE * scale {
        return Err(Error::Domain(format!(
            "spectral identities violated: trace {trace:e}, sum of squares {frob} vs {twice_edges}"
        )));
    }
    Ok(())
}

fn window_seed(seed: u64, salt: u64, member: usize, l_index: usize) -> u64 {
    rng::mix(rng::mix(seed ^ salt, member as u64), l_index as u64)
}

fn unfold_member(
    cfg: &ExperimentConfig,
    member: usize,
    trimmed: &Spectrum<f64>,
    method: &UnfoldingMethod<f64>,
    l_grid: &[f64],
) -> std::result::Result<MemberMethod, (Stage, Error)> {
    let st = &cfg.statistics;
    let seed = cfg.ensemble.seed;
    let unfolded = unfolding::unfold(trimmed, method).map_err(|e| (Stage::Unfold, e))?;
    let stat = |e| (Stage::Statistics, e);
    let spacings = if st.nnsd {
        Some(stats::spacings(&unfolded).map_err(stat)?)
    } else {
        None
    };
    let sigma2 = if st.sigma2 {
        let v = l_grid
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                stats::number_variance(&unfolded, l, st.window_samples, window_seed(seed, SIGMA2_SALT, member, k))
                    .map(|(_, var)| var)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(stat)?;
        Some(v)
    } else {
        None
    };
    let delta3 = if st.delta3 {
        let v = l_grid
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                stats::delta3_direct(&unfolded, l, st.window_samples, window_seed(seed, DELTA3_SALT, member, k))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(stat)?;
        Some(v)
    } else {
        None
    };
    Ok(MemberMethod {
        unfolded,
        spacings,
        sigma2,
        delta3,
    })
}

fn process_member(
    cfg: &ExperimentConfig,
    source: &Source,
    member: usize,
    drop_top: usize,
    methods: &[UnfoldingMethod<f64>],
    l_grid: &[f64],
) -> MemberOutcome {
    let mut out = MemberOutcome {
        spectrum: None,
        density_levels: None,
        edge_count: 0,
        fatal: None,
        methods: Vec::new(),
    };
    let generated;
    let matrix = match source {
        Source::Matrices(list) => &list[member],
        Source::Generate => match generate_member(&cfg.ensemble, member) {
            Ok(m) => {
                generated = m;
                &generated
            }
            Err(e) => {
                out.fatal = Some((Stage::Generate, e));
                return out;
            }
        },
    };
    out.edge_count = matrix.edge_count();
    if !matrix.check_invariants() {
        out.fatal = Some((Stage::Generate, Error::Domain("adjacency invariants violated".into())));
        return out;
    }
    let spectrum = match spectral::eigenvalues::<f64>(matrix)
        .and_then(|s| check_spectral_identities(matrix, &s).map(|_| s))
    {
        Ok(s) => s,
        Err(e) => {
            out.fatal = Some((Stage::Eigen, e));
            return out;
        }
    };
    let st = &cfg.statistics;
    if st.density {
        match spectral::trim_spectrum_min(&spectrum, drop_top, 0.0, 1) {
            Ok(s) => out.density_levels = Some(s),
            Err(e) => {
                out.fatal = Some((Stage::Trim, e));
                out.spectrum = Some(spectrum);
                return out;
            }
        }
    }
    if st.nnsd || st.sigma2 || st.delta3 {
        match spectral::trim_spectrum(&spectrum, drop_top, cfg.trim.edge_fraction) {
            Ok(trimmed) => {
                out.methods = methods
                    .iter()
                    .map(|m| unfold_member(cfg, member, &trimmed, m, l_grid))
                    .collect();
            }
            Err(e) => out.fatal = Some((Stage::Trim, e)),
        }
    }
    out.spectrum = Some(spectrum);
    out
}

fn nnsd_reference_bins(width: f64, methods: &[MethodResult]) -> Vec<f64> {
    let top = methods
        .iter()
        .filter_map(|m| m.nnsd.as_ref())
        .map(|h| h.bin_edges.len() - 1)
        .max()
        .unwrap_or(0)
        .max((5.0 / width).ceil() as usize);
    (0..=top).map(|k| width * k as f64).collect()
}

fn bin_averaged(edges: &[f64], cdf: impl Fn(f64) -> f64) -> SpacingHistogram<f64> {
    let shell = SpacingHistogram {
        bin_edges: edges.to_vec(),
        densities: Vec::new(),
        sample_count: 0,
    };
    shell.reference_from_cdf(cdf)
}

/// Run the experiment in memory: no files are touched.
pub fn execute(cfg: &ExperimentConfig, source: Source) -> Result<ResultBundle> {
    cfg.validate()?;
    let count = match &source {
        Source::Generate => cfg.ensemble.count,
        Source::Matrices(list) => list.len(),
    };
    if count == 0 {
        return Err(Error::Config("no matrices to analyze".into()));
    }
    let drop_top = cfg.trim.resolved_drop(&cfg.ensemble);
    let methods = cfg
        .methods
        .iter()
        .map(|&m| resolve_method(m, &cfg.ensemble, drop_top))
        .collect::<Result<Vec<_>>>()?;
    let st = &cfg.statistics;
    let l_grid = if st.sigma2 || st.delta3 { st.l_grid() } else { Vec::new() };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    log::info!("{}: {} members, {} methods", cfg.name, count, methods.len());
    let outcomes: Vec<MemberOutcome> = pool.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| process_member(cfg, &source, i, drop_top, &methods, &l_grid))
            .collect()
    });

    let mut errors = Vec::new();
    let mut spectra = Vec::with_capacity(count);
    let mut edge_counts = Vec::with_capacity(count);
    let mut density_levels = Vec::new();
    let mut per_method: Vec<Vec<Option<MemberMethod>>> = (0..methods.len()).map(|_| Vec::new()).collect();
    for (i, mut o) in outcomes.into_iter().enumerate() {
        spectra.push(o.spectrum.take());
        edge_counts.push(o.edge_count);
        density_levels.extend(o.density_levels.take());
        if let Some((stage, e)) = o.fatal.take() {
            log::warn!("member {i} failed at {stage}: {e}");
            errors.push(MemberError {
                member: i,
                stage,
                method: None,
                error: e.at(i, stage),
            });
        }
        let mut results = o.methods.into_iter();
        for (k, slot) in per_method.iter_mut().enumerate() {
            match results.next() {
                Some(Ok(r)) => slot.push(Some(r)),
                Some(Err((stage, e))) => {
                    let label = methods[k].label();
                    log::warn!("member {i}, method {label} failed at {stage}: {e}");
                    errors.push(MemberError {
                        member: i,
                        stage,
                        method: Some(label),
                        error: e.at(i, stage),
                    });
                    slot.push(None);
                }
                None => slot.push(None),
            }
        }
    }

    let unfolding_wanted = st.nnsd || st.sigma2 || st.delta3;
    let mut method_results = Vec::new();
    if unfolding_wanted {
        for ((spec, method), members) in cfg.methods.iter().zip(&methods).zip(per_method) {
            let label = method.label();
            let failed = members.iter().any(Option::is_none);
            let mut spacings = Vec::new();
            let mut sigma2 = Vec::new();
            let mut delta3 = Vec::new();
            let mut unfolded = Vec::new();
            for m in members {
                match m {
                    Some(m) => {
                        spacings.extend(m.spacings);
                        if let Some(v) = m.sigma2 {
                            sigma2.push(StatCurve::single(l_grid.clone(), v, CurveKind::Sigma2, label.clone())?);
                        }
                        if let Some(v) = m.delta3 {
                            delta3.push(StatCurve::single(l_grid.clone(), v, CurveKind::Delta3, label.clone())?);
                        }
                        unfolded.push(Some(m.unfolded));
                    }
                    None => unfolded.push(None),
                }
            }
            let nnsd = if st.nnsd && !spacings.is_empty() {
                Some(stats::nnsd(&spacings, st.nnsd_bin_width)?)
            } else {
                None
            };
            let average = |c: &[StatCurve<f64>]| (!c.is_empty()).then(|| stats::ensemble_average(c)).transpose();
            method_results.push(MethodResult {
                spec: *spec,
                label,
                method: method.clone(),
                unfolded,
                spacings,
                nnsd,
                sigma2: average(&sigma2)?,
                delta3: average(&delta3)?,
                failed,
            });
        }
    }

    let (mut density, mut density_reference, mut density_l1) = (None, None, None);
    if st.density && !density_levels.is_empty() {
        let mut blocks = block_parameters(&cfg.ensemble)?;
        let mut hist = spectral::density_histogram(&density_levels, st.density_bins, None)?;
        if st.rescale_density {
            let p = cfg.ensemble.mean_pair_probability();
            hist = spectral::rescale_density(&hist, cfg.ensemble.n, p)?;
            let scale = (cfg.ensemble.n as f64 * p * (1.0 - p)).sqrt();
            for b in &mut blocks {
                b.1 /= scale;
            }
        }
        let total: usize = blocks.iter().map(|b| b.0).sum();
        let norm = total as f64;
        let cdf = |e: f64| unfolding::block_semicircle_cdf(&blocks, e) / norm;
        density_l1 = Some(hist.l1_distance_to(cdf));
        let lo = hist.bin_edges[0];
        let hi = *hist.bin_edges.last().unwrap();
        let points = 4 * st.density_bins + 1;
        let grid: Vec<f64> = (0..points)
            .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
            .collect();
        let values = grid
            .iter()
            .map(|&e| blocks.iter().map(|&(n, a)| theory::semicircle_density(n, a, e)).sum::<f64>() / norm)
            .collect();
        density_reference = Some(StatCurve::single(grid, values, CurveKind::Theory, "semicircle_density")?);
        density = Some(hist);
    }

    let blocks = &cfg.ensemble.block_sizes;
    let two_goe = blocks.len() == 2 && blocks[0] == blocks[1] && cfg.ensemble.q_inter == 0.0;
    let mut nnsd_references = Vec::new();
    if st.nnsd {
        let edges = nnsd_reference_bins(st.nnsd_bin_width, &method_results);
        nnsd_references.push(("goe".to_string(), bin_averaged(&edges, theory::wigner_cdf)));
        if two_goe {
            nnsd_references.push(("two_goe".to_string(), bin_averaged(&edges, theory::two_goe_cdf)));
        }
        nnsd_references.push(("poisson".to_string(), bin_averaged(&edges, theory::poisson_cdf)));
    }
    let mut curve_references = Vec::new();
    if st.sigma2 {
        curve_references.push(TheoryCurve::GoeSigma2.sample(&l_grid)?);
        curve_references.push(TheoryCurve::PoissonSigma2.sample(&l_grid)?);
    }
    if st.delta3 {
        curve_references.push(TheoryCurve::GoeDelta3.sample(&l_grid)?);
        curve_references.push(TheoryCurve::PoissonDelta3.sample(&l_grid)?);
    }

    Ok(ResultBundle {
        config: cfg.clone(),
        spectra,
        edge_counts,
        drop_top,
        methods: method_results,
        density,
        density_reference,
        density_l1,
        nnsd_references,
        curve_references,
        errors,
    })
}
