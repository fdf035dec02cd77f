//! Experiment configuration and its text format.
//!
//! ```text
//! # comment
//! [experiment]
//! name = fig2
//! panel_letters = true
//! output_dir = out/fig2
//! parallelism = 0
//!
//! [ensemble]
//! count = 20
//! n = 1000
//! p = 0.1
//! blocks = 1000      # one block: Erdős–Rényi; otherwise e.g. 500, 500
//! q = 0
//! seed = 42
//!
//! [unfolding]
//! methods = semicircle, poly3, poly4, poly5
//! drop_top = auto     # auto: one level per block
//! edge_fraction = 0.02
//!
//! [statistics]
//! density = false
//! nnsd = true
//! sigma2 = false
//! delta3 = true
//! density_bins = 75
//! rescale_density = true
//! nnsd_bin_width = 0.1
//! l_min = 1
//! l_max = 50
//! l_step = 1
//! window_samples = 200
//! ```
//!
//! Every key is optional and falls back to [`ExperimentConfig::default`].
//! Unknown sections or keys are errors. [`ExperimentConfig::to_text`] writes
//! all keys, and parsing its output gives back an equal config.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::ensemble::EnsembleSpec;
use crate::error::{Error, Result};
use crate::stats::{DEFAULT_NNSD_BIN_WIDTH, DEFAULT_WINDOW_SAMPLES};
use crate::spectral::DEFAULT_DENSITY_BINS;
use crate::unfolding::MAX_DEGREE;

/// Unfolding method as named in a config; radii and level counts are filled
/// in from the ensemble at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodSpec {
    Semicircle,
    BlockSemicircle,
    Poly { degree: usize, include_constant: bool },
}

impl MethodSpec {
    pub fn label(&self) -> String {
        match self {
            MethodSpec::Semicircle => "semicircle".into(),
            MethodSpec::BlockSemicircle => "block_semicircle".into(),
            MethodSpec::Poly {
                degree,
                include_constant: true,
            } => format!("poly{degree}"),
            MethodSpec::Poly {
                degree,
                include_constant: false,
            } => format!("poly{degree}_nc"),
        }
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self, MethodSpec::Poly { .. })
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "semicircle" => return Ok(MethodSpec::Semicircle),
            "block_semicircle" => return Ok(MethodSpec::BlockSemicircle),
            _ => {}
        }
        let bad = || Error::Config(format!("unknown unfolding method {s:?}"));
        let rest = s.strip_prefix("poly").ok_or_else(bad)?;
        let (digits, include_constant) = match rest.strip_suffix("_nc") {
            Some(d) => (d, false),
            None => (rest, true),
        };
        let degree: usize = digits.parse().map_err(|_| bad())?;
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(Error::Config(format!("polynomial degree {degree} not in 1..={MAX_DEGREE}")));
        }
        Ok(MethodSpec::Poly {
            degree,
            include_constant,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrimConfig {
    /// Top levels removed before edge trimming; `None` means one per block.
    pub drop_top: Option<usize>,
    pub edge_fraction: f64,
}

impl TrimConfig {
    pub fn resolved_drop(&self, spec: &EnsembleSpec) -> usize {
        self.drop_top.unwrap_or(if spec.is_clustered() { spec.block_sizes.len() } else { 1 })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatisticsConfig {
    pub density: bool,
    pub nnsd: bool,
    pub sigma2: bool,
    pub delta3: bool,
    pub density_bins: usize,
    /// Divide energies by `sqrt(N p (1 - p))` before binning.
    pub rescale_density: bool,
    pub nnsd_bin_width: f64,
    pub l_min: f64,
    pub l_max: f64,
    pub l_step: f64,
    pub window_samples: usize,
}

impl StatisticsConfig {
    pub fn any(&self) -> bool {
        self.density || self.nnsd || self.sigma2 || self.delta3
    }

    /// `l_min, l_min + l_step, ...` up to `l_max` (inclusive within rounding).
    pub fn l_grid(&self) -> Vec<f64> {
        let count = ((self.l_max - self.l_min) / self.l_step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| self.l_min + k as f64 * self.l_step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    /// Insert a panel letter after the name in file stems (`fig2a_nnsd_...`).
    pub panel_letters: bool,
    pub output_dir: Option<PathBuf>,
    /// Worker threads; 0 lets the runtime decide. Does not affect results.
    pub parallelism: usize,
    pub ensemble: EnsembleSpec,
    pub methods: Vec<MethodSpec>,
    pub trim: TrimConfig,
    pub statistics: StatisticsConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "run".into(),
            panel_letters: false,
            output_dir: None,
            parallelism: 0,
            ensemble: EnsembleSpec::erdos_renyi(20, 1000, 0.1, 42),
            methods: vec![
                MethodSpec::Semicircle,
                MethodSpec::Poly {
                    degree: 3,
                    include_constant: true,
                },
            ],
            trim: TrimConfig {
                drop_top: None,
                edge_fraction: 0.02,
            },
            statistics: StatisticsConfig {
                density: false,
                nnsd: true,
                sigma2: false,
                delta3: true,
                density_bins: DEFAULT_DENSITY_BINS,
                rescale_density: true,
                nnsd_bin_width: DEFAULT_NNSD_BIN_WIDTH,
                l_min: 1.0,
                l_max: 50.0,
                l_step: 1.0,
                window_samples: DEFAULT_WINDOW_SAMPLES,
            },
        }
    }
}

fn parse_value<V: FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean {value:?} for {key}"))),
    }
}

fn parse_list<V: FromStr>(key: &str, value: &str) -> Result<Vec<V>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| parse_value(key, t))
        .collect()
}

impl ExperimentConfig {
    /// Parse the text format, starting from the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut section = String::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                section = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config(format!("line {}: malformed section header", no + 1)))?
                    .trim()
                    .to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            cfg.set(&format!("{section}.{}", key.trim()), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", no + 1, strip_config(e))))?;
        }
        Ok(cfg)
    }

    /// Set one `section.key` to a textual value.
    pub fn set(&mut self, path: &str, value: &str) -> Result<()> {
        let st = &mut self.statistics;
        let en = &mut self.ensemble;
        match path {
            "experiment.name" => {
                if value.is_empty() || value.contains(['/', '\\']) {
                    return Err(Error::Config(format!("invalid experiment name {value:?}")));
                }
                self.name = value.to_string()
            }
            "experiment.panel_letters" => self.panel_letters = parse_bool(path, value)?,
            "experiment.output_dir" => self.output_dir = (!value.is_empty()).then(|| PathBuf::from(value)),
            "experiment.parallelism" => self.parallelism = parse_value(path, value)?,
            "ensemble.count" => en.count = parse_value(path, value)?,
            "ensemble.n" => {
                en.n = parse_value(path, value)?;
                if en.block_sizes.len() <= 1 {
                    en.block_sizes = vec![en.n];
                }
            }
            "ensemble.p" => en.p_intra = parse_value(path, value)?,
            "ensemble.blocks" => {
                en.block_sizes = parse_list(path, value)?;
                if en.block_sizes.is_empty() {
                    en.block_sizes = vec![en.n];
                } else {
                    en.n = en.block_sizes.iter().sum();
                }
            }
            "ensemble.q" => en.q_inter = parse_value(path, value)?,
            "ensemble.seed" => en.seed = parse_value(path, value)?,
            "unfolding.methods" => self.methods = parse_list(path, value)?,
            "unfolding.drop_top" => {
                self.trim.drop_top = if value == "auto" { None } else { Some(parse_value(path, value)?) }
            }
            "unfolding.edge_fraction" => self.trim.edge_fraction = parse_value(path, value)?,
            "statistics.density" => st.density = parse_bool(path, value)?,
            "statistics.nnsd" => st.nnsd = parse_bool(path, value)?,
            "statistics.sigma2" => st.sigma2 = parse_bool(path, value)?,
            "statistics.delta3" => st.delta3 = parse_bool(path, value)?,
            "statistics.density_bins" => st.density_bins = parse_value(path, value)?,
            "statistics.rescale_density" => st.rescale_density = parse_bool(path, value)?,
            "statistics.nnsd_bin_width" => st.nnsd_bin_width = parse_value(path, value)?,
            "statistics.l_min" => st.l_min = parse_value(path, value)?,
            "statistics.l_max" => st.l_max = parse_value(path, value)?,
            "statistics.l_step" => st.l_step = parse_value(path, value)?,
            "statistics.window_samples" => st.window_samples = parse_value(path, value)?,
            _ => return Err(Error::Config(format!("unknown key {path:?}"))),
        }
        Ok(())
    }

    /// Apply a `section.key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (path, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {assignment:?} is not section.key=value")))?;
        self.set(path.trim(), value.trim())
    }

    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate().map_err(|e| Error::Config(strip_config(e)))?;
        if self.methods.is_empty() {
            return Err(Error::Config("no unfolding method selected".into()));
        }
        let mut labels: Vec<String> = self.methods.iter().map(MethodSpec::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("duplicate unfolding method".into()));
        }
        let st = &self.statistics;
        if !st.any() {
            return Err(Error::Config("no statistic enabled".into()));
        }
        if !(0.0..=0.2).contains(&self.trim.edge_fraction) {
            return Err(Error::Config(format!(
                "edge_fraction {} outside [0, 0.2]",
                self.trim.edge_fraction
            )));
        }
        if self.trim.resolved_drop(&self.ensemble) >= self.ensemble.n {
            return Err(Error::Config("drop_top removes every level".into()));
        }
        if st.density && st.density_bins < 2 {
            return Err(Error::Config("density_bins must be at least 2".into()));
        }
        if st.nnsd && !(st.nnsd_bin_width > 0.0 && st.nnsd_bin_width.is_finite()) {
            return Err(Error::Config("nnsd_bin_width must be positive".into()));
        }
        if st.sigma2 || st.delta3 {
            if !(st.l_min > 0.0 && st.l_step > 0.0 && st.l_max >= st.l_min && st.l_max.is_finite()) {
                return Err(Error::Config(format!(
                    "bad L grid {}..{} step {}",
                    st.l_min, st.l_max, st.l_step
                )));
            }
            if st.window_samples < 10 {
                return Err(Error::Config("window_samples must be at least 10".into()));
            }
        }
        Ok(())
    }

    /// File stem for a statistic's panel (`a` NNSD, `b` Δ₃, `c` Σ², `d` density).
    pub fn stem(&self, panel: char) -> String {
        if self.panel_letters {
            format!("{}{panel}", self.name)
        } else {
            self.name.clone()
        }
    }

    /// The text format with every key spelled out.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let en = &self.ensemble;
        let st = &self.statistics;
        let join = |v: Vec<String>| v.join(", ");
        let _ = writeln!(s, "[experiment]");
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "panel_letters = {}", self.panel_letters);
        let dir = self.output_dir.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let _ = writeln!(s, "output_dir = {dir}");
        let _ = writeln!(s, "parallelism = {}", self.parallelism);
        let _ = writeln!(s, "\n[ensemble]");
        let _ = writeln!(s, "count = {}", en.count);
        let _ = writeln!(s, "n = {}", en.n);
        let _ = writeln!(s, "p = {:?}", en.p_intra);
        let _ = writeln!(s, "blocks = {}", join(en.block_sizes.iter().map(|b| b.to_string()).collect()));
        let _ = writeln!(s, "q = {:?}", en.q_inter);
        let _ = writeln!(s, "seed = {}", en.seed);
        let _ = writeln!(s, "\n[unfolding]");
        let _ = writeln!(s, "methods = {}", join(self.methods.iter().map(MethodSpec::label).collect()));
        let drop = self.trim.drop_top.map(|d| d.to_string()).unwrap_or_else(|| "auto".into());
        let _ = writeln!(s, "drop_top = {drop}");
        let _ = writeln!(s, "edge_fraction = {:?}", self.trim.edge_fraction);
        let _ = writeln!(s, "\n[statistics]");
        let _ = writeln!(s, "density = {}", st.density);
        let _ = writeln!(s, "nnsd = {}", st.nnsd);
        let _ = writeln!(s, "sigma2 = {}", st.sigma2);
        let _ = writeln!(s, "delta3 = {}", st.delta3);
        let _ = writeln!(s, "density_bins = {}", st.density_bins);
        let _ = writeln!(s, "rescale_density = {}", st.rescale_density);
        let _ = writeln!(s, "nnsd_bin_width = {:?}", st.nnsd_bin_width);
        let _ = writeln!(s, "l_min = {:?}", st.l_min);
        let _ = writeln!(s, "l_max = {:?}", st.l_max);
        let _ = writeln!(s, "l_step = {:?}", st.l_step);
        let _ = writeln!(s, "window_samples = {}", st.window_samples);
        s
    }
}

fn strip_config(e: Error) -> String {
    match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    }
}
