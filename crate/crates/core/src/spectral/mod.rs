//! Adjacency spectra, the level staircase, and pooled spectral densities.

pub mod eigen;

use std::io::{BufRead, Write};

use crate::ensemble::AdjacencyMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Fewest levels a trimmed spectrum may keep.
pub const MIN_LEVELS: usize = 10;

/// Default number of bins for pooled density histograms.
pub const DEFAULT_DENSITY_BINS: usize = 75;

/// Ascending eigenvalues of one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    values: Vec<T>,
    source_n: usize,
    meta: String,
}

impl<T: Scalar> Spectrum<T> {
    /// Sorts `values`; rejects non-finite entries.
    pub fn new(mut values: Vec<T>, source_n: usize, meta: impl Into<String>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("spectrum contains non-finite values".into()));
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Spectrum {
            values,
            source_n,
            meta: meta.into(),
        })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn source_n(&self) -> usize {
        self.source_n
    }

    pub fn meta(&self) -> &str {
        &self.meta
    }

    pub fn with_meta(mut self, meta: impl Into<String>) -> Self {
        self.meta = meta.into();
        self
    }

    pub fn min(&self) -> Option<T> {
        self.values.first().copied()
    }

    pub fn max(&self) -> Option<T> {
        self.values.last().copied()
    }

    /// `Σ λ`, equal to the trace.
    pub fn trace(&self) -> T {
        self.values.iter().copied().sum()
    }

    /// `Σ λ²`, equal to twice the edge count for an adjacency matrix.
    pub fn sum_of_squares(&self) -> T {
        self.values.iter().map(|&v| v * v).sum()
    }

    /// Write `index,eigenvalue` CSV with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,eigenvalue")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{i},{:.16e}", v.f64())?;
        }
        Ok(())
    }

    /// Read the CSV written by [`Spectrum::write_csv`].
    pub fn read_csv<R: BufRead>(r: R, meta: impl Into<String>) -> Result<Self> {
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "index,eigenvalue" => {}
            Some(Err(e)) => return Err(e.into()),
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    msg: "expected header index,eigenvalue".into(),
                })
            }
        }
        let mut values = Vec::new();
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Parse {
                line: k + 2,
                msg: format!("bad spectrum row {line:?}"),
            };
            let (_, v) = line.split_once(',').ok_or_else(bad)?;
            let v: f64 = v.trim().parse().map_err(|_| bad())?;
            values.push(T::cst(v));
        }
        let n = values.len();
        Spectrum::new(values, n, meta)
    }
}

/// All eigenvalues of an adjacency matrix, ascending.
pub fn eigenvalues<T: Scalar>(a: &AdjacencyMatrix) -> Result<Spectrum<T>> {
    let n = a.n();
    let values = eigen::symmetric_eigenvalues(a.to_dense::<T>(), n).map_err(|_| Error::NoConvergence {
        n,
        meta: format!("{} edges", a.edge_count()),
    })?;
    Spectrum::new(values, n, "")
}

/// Number of levels at or below `e`.
pub fn staircase<T: Scalar>(spec: &Spectrum<T>, e: T) -> usize {
    spec.values.partition_point(|&v| v <= e)
}

/// Drop the `drop_top` largest levels, then `floor(edge_fraction * remaining)`
/// levels from each end. At least [`MIN_LEVELS`] must survive.
pub fn trim_spectrum<T: Scalar>(spec: &Spectrum<T>, drop_top: usize, edge_fraction: f64) -> Result<Spectrum<T>> {
    trim_spectrum_min(spec, drop_top, edge_fraction, MIN_LEVELS)
}

/// [`trim_spectrum`] with an explicit floor on the surviving level count.
pub fn trim_spectrum_min<T: Scalar>(
    spec: &Spectrum<T>,
    drop_top: usize,
    edge_fraction: f64,
    min_levels: usize,
) -> Result<Spectrum<T>> {
    if !(0.0..=0.2).contains(&edge_fraction) {
        return Err(Error::InvalidParameter(format!(
            "edge_fraction {edge_fraction} not in [0, 0.2]"
        )));
    }
    let remaining = spec.len().saturating_sub(drop_top);
    let k = (edge_fraction * remaining as f64).floor() as usize;
    let kept = remaining.saturating_sub(2 * k);
    if kept < min_levels {
        return Err(Error::InsufficientLevels {
            needed: min_levels,
            got: kept,
        });
    }
    Ok(Spectrum {
        values: spec.values[k..remaining - k].to_vec(),
        source_n: spec.source_n,
        meta: spec.meta.clone(),
    })
}

/// Unit-area histogram of pooled levels.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityHistogram<T> {
    pub bin_edges: Vec<T>,
    pub densities: Vec<T>,
    pub total_weight: usize,
}

impl<T: Scalar> DensityHistogram<T> {
    pub fn bin_count(&self) -> usize {
        self.densities.len()
    }

    /// `Σ density * width`.
    pub fn area(&self) -> T {
        self.densities
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(&d, w)| d * (w[1] - w[0]))
            .sum()
    }

    /// Scale the abscissa by `factor` and the densities by `1 / factor`.
    pub fn rescaled(&self, factor: T) -> Self {
        DensityHistogram {
            bin_edges: self.bin_edges.iter().map(|&e| e * factor).collect(),
            densities: self.densities.iter().map(|&d| d / factor).collect(),
            total_weight: self.total_weight,
        }
    }

    /// L1 distance `Σ |h_b - F(b)/w_b| w_b` to a reference density given by its
    /// cumulative distribution `cdf` (bin-averaged comparison).
    pub fn l1_distance_to<F: Fn(T) -> T>(&self, cdf: F) -> T {
        let first = self.bin_edges[0];
        let last = *self.bin_edges.last().unwrap();
        // reference mass outside the histogram range counts in full
        let mut total = cdf(first) + (T::one() - cdf(last));
        for (d, w) in self.densities.iter().zip(self.bin_edges.windows(2)) {
            let width = w[1] - w[0];
            let reference = cdf(w[1]) - cdf(w[0]);
            total = total + (*d * width - reference).abs();
        }
        total
    }

    /// `e_lo,e_hi,density` CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "e_lo,e_hi,density")?;
        for (d, e) in self.densities.iter().zip(self.bin_edges.windows(2)) {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", e[0].f64(), e[1].f64(), d.f64())?;
        }
        Ok(())
    }
}

/// Pooled, unit-area density of all levels in `specs`. The default range is
/// `[min, max]` of the pool widened by one nominal bin width on each side.
pub fn density_histogram<T: Scalar>(
    specs: &[Spectrum<T>],
    bin_count: usize,
    range: Option<(T, T)>,
) -> Result<DensityHistogram<T>> {
    if bin_count < 2 {
        return Err(Error::InvalidParameter(format!("bin_count {bin_count} below 2")));
    }
    let pool = specs.iter().flat_map(|s| s.values.iter().copied());
    let (lo, hi) = match range {
        Some((lo, hi)) if hi > lo => (lo, hi),
        Some(_) => return Err(Error::InvalidParameter("empty histogram range".into())),
        None => {
            let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
            for v in pool.clone() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if lo > hi {
                return Err(Error::EmptyInput);
            }
            if hi == lo {
                let half = T::cst(0.5);
                (lo - half, hi + half)
            } else {
                let w = (hi - lo) / T::from_usize_lossy(bin_count);
                (lo - w, hi + w)
            }
        }
    };

    let width = (hi - lo) / T::from_usize_lossy(bin_count);
    let mut counts = vec![0usize; bin_count];
    let mut total = 0usize;
    for v in pool {
        if v < lo || v > hi {
            continue;
        }
        let idx = ((v - lo) / width).floor().to_usize().unwrap_or(0).min(bin_count - 1);
        counts[idx] += 1;
        total += 1;
    }
    if total == 0 {
        return Err(Error::EmptyInput);
    }
    let bin_edges = (0..=bin_count)
        .map(|k| if k == bin_count { hi } else { lo + width * T::from_usize_lossy(k) })
        .collect::<Vec<_>>();
    let norm = T::from_usize_lossy(total);
    let densities = counts
        .iter()
        .zip(bin_edges.windows(2))
        .map(|(&c, e)| T::from_usize_lossy(c) / (norm * (e[1] - e[0])))
        .collect();
    Ok(DensityHistogram {
        bin_edges,
        densities,
        total_weight: total,
    })
}

/// Rescale a density by the node-count/probability scale `sqrt(N p (1 - p))`:
/// edges are divided by it and densities multiplied by it.
pub fn rescale_density<T: Scalar>(h: &DensityHistogram<T>, n: usize, p: f64) -> Result<DensityHistogram<T>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::DegenerateVariance(p));
    }
    let scale = T::cst((n as f64 * p * (1.0 - p)).sqrt());
    Ok(h.rescaled(T::one() / scale))
}
