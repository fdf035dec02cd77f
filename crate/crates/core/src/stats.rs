//! Fluctuation statistics of unfolded spectra: nearest-neighbour spacings,
//! number variance Σ²(L), spectral rigidity Δ₃(L), and ensemble averages.
//!
//! Window statistics place `window_samples` windows of length `L` with starts
//! drawn uniformly from `[ε_min, ε_max − L]`. The draws depend only on the
//! seed and on the span, so passing the same seed for several `L` (or several
//! unfoldings of one spectrum) reuses the same positions.

use std::io::Write;

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;
use crate::unfolding::UnfoldedSpectrum;

/// Default number of windows per spectrum and per `L`.
pub const DEFAULT_WINDOW_SAMPLES: usize = 200;

/// Default NNSD bin width.
pub const DEFAULT_NNSD_BIN_WIDTH: f64 = 0.1;

/// Fewest pooled spacings accepted by [`nnsd`].
pub const MIN_NNSD_SAMPLES: usize = 100;

/// Largest step accepted on the Σ² grid fed to [`delta3_via_integral`].
pub const MAX_SIGMA2_STEP: f64 = 0.05;

/// `s_i = ε_{i+1} − ε_i`.
pub fn spacings<T: Scalar>(u: &UnfoldedSpectrum<T>) -> Result<Vec<T>> {
    spacings_of(u.levels())
}

/// Spacings of a sorted level sequence.
pub fn spacings_of<T: Scalar>(levels: &[T]) -> Result<Vec<T>> {
    if levels.len() < 2 {
        return Err(Error::InsufficientLevels {
            needed: 2,
            got: levels.len(),
        });
    }
    Ok(levels.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Unit-area histogram of spacings.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacingHistogram<T> {
    pub bin_edges: Vec<T>,
    pub densities: Vec<T>,
    pub sample_count: usize,
}

impl<T: Scalar> SpacingHistogram<T> {
    pub fn area(&self) -> T {
        self.densities
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(&d, w)| d * (w[1] - w[0]))
            .sum()
    }

    /// Bin-averaged reference density on the same bins, from its CDF.
    pub fn reference_from_cdf<F: Fn(T) -> T>(&self, cdf: F) -> SpacingHistogram<T> {
        let densities = self
            .bin_edges
            .windows(2)
            .map(|w| (cdf(w[1]) - cdf(w[0])) / (w[1] - w[0]))
            .collect();
        SpacingHistogram {
            bin_edges: self.bin_edges.clone(),
            densities,
            sample_count: 0,
        }
    }

    /// `s_lo,s_hi,density` CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "s_lo,s_hi,density")?;
        for (d, e) in self.densities.iter().zip(self.bin_edges.windows(2)) {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", e[0].f64(), e[1].f64(), d.f64())?;
        }
        Ok(())
    }
}

/// Pooled nearest-neighbour spacing distribution over `[0, s_max]`, with
/// `s_max` rounded up to a bin edge.
pub fn nnsd<T: Scalar>(spacing_lists: &[Vec<T>], bin_width: T) -> Result<SpacingHistogram<T>> {
    if !(bin_width > T::zero()) {
        return Err(Error::InvalidParameter(format!("bin width {bin_width} must be positive")));
    }
    let count: usize = spacing_lists.iter().map(Vec::len).sum();
    if count == 0 {
        return Err(Error::EmptyInput);
    }
    if count < MIN_NNSD_SAMPLES {
        return Err(Error::InsufficientLevels {
            needed: MIN_NNSD_SAMPLES,
            got: count,
        });
    }
    let index = |s: T| (s.max(T::zero()) / bin_width).floor().to_usize().unwrap_or(0);
    let bins = spacing_lists
        .iter()
        .flatten()
        .map(|&s| index(s))
        .max()
        .unwrap_or(0)
        + 1;
    let mut counts = vec![0usize; bins];
    for &s in spacing_lists.iter().flatten() {
        counts[index(s)] += 1;
    }
    let norm = T::from_usize_lossy(count) * bin_width;
    Ok(SpacingHistogram {
        bin_edges: (0..=bins).map(|k| bin_width * T::from_usize_lossy(k)).collect(),
        densities: counts.iter().map(|&c| T::from_usize_lossy(c) / norm).collect(),
        sample_count: count,
    })
}

fn window_starts<T: Scalar>(levels: &[T], length: T, samples: usize, seed: u64) -> Result<Vec<T>> {
    if !(length > T::zero()) {
        return Err(Error::InvalidParameter(format!("window length {length} must be positive")));
    }
    if samples < 10 {
        return Err(Error::InvalidParameter(format!("window_samples {samples} below 10")));
    }
    if levels.len() < 2 {
        return Err(Error::InsufficientLevels {
            needed: 2,
            got: levels.len(),
        });
    }
    let lo = levels[0];
    let span = levels[levels.len() - 1] - lo;
    if span < length + length {
        return Err(Error::IntervalTooLong {
            length: length.f64(),
            span: span.f64(),
        });
    }
    let room = span - length;
    let mut r = rng::stream(seed);
    Ok((0..samples)
        .map(|_| lo + room * T::cst(rng::unit_f64(&mut r)))
        .collect())
}

/// Sample mean and sample variance of the level count in `[α, α + L)`.
pub fn number_variance<T: Scalar>(
    u: &UnfoldedSpectrum<T>,
    length: T,
    window_samples: usize,
    seed: u64,
) -> Result<(T, T)> {
    let levels = u.levels();
    let starts = window_starts(levels, length, window_samples, seed)?;
    let counts: Vec<T> = starts
        .iter()
        .map(|&a| {
            let hi = levels.partition_point(|&v| v < a + length);
            let lo = levels.partition_point(|&v| v < a);
            T::from_usize_lossy(hi - lo)
        })
        .collect();
    let k = T::from_usize_lossy(counts.len());
    let mean = counts.iter().copied().sum::<T>() / k;
    let var = counts.iter().map(|&c| (c - mean) * (c - mean)).sum::<T>() / (k - T::one());
    Ok((mean, var))
}

/// Least-squares deviation of the unit-step staircase from its best straight
/// line over `[0, L]`. `steps` are the positions (relative to the window
/// start, ascending, inside `(0, L]`) where the staircase rises by one.
///
/// Evaluated in closed form from the integrals of `n`, `n·y` and `n²` with
/// `y = x − L/2`, so no discretization is involved.
pub fn staircase_line_deviation<T: Scalar>(steps: &[T], length: T) -> T {
    let half = length * T::cst(0.5);
    let (mut i0, mut i1, mut i2) = (T::zero(), T::zero(), T::zero());
    for (k, &x0) in steps.iter().enumerate() {
        let x1 = steps.get(k + 1).copied().unwrap_or(length);
        let n = T::from_usize_lossy(k + 1);
        let w = x1 - x0;
        let (y0, y1) = (x0 - half, x1 - half);
        i0 = i0 + n * w;
        i1 = i1 + n * (y1 * y1 - y0 * y0) * T::cst(0.5);
        i2 = i2 + n * n * w;
    }
    let l3 = length * length * length;
    let residual = i2 - i0 * i0 / length - T::cst(12.0) * i1 * i1 / l3;
    (residual / length).max(T::zero())
}

/// Δ₃(L) averaged over sampled windows, each fitted exactly.
pub fn delta3_direct<T: Scalar>(
    u: &UnfoldedSpectrum<T>,
    length: T,
    window_samples: usize,
    seed: u64,
) -> Result<T> {
    let levels = u.levels();
    let starts = window_starts(levels, length, window_samples, seed)?;
    let mut steps = Vec::new();
    let mut total = T::zero();
    for &a in &starts {
        let first = levels.partition_point(|&v| v <= a);
        let last = levels.partition_point(|&v| v <= a + length);
        steps.clear();
        steps.extend(levels[first..last].iter().map(|&v| v - a));
        total = total + staircase_line_deviation(&steps, length);
    }
    Ok(total / T::from_usize_lossy(starts.len()))
}

/// Δ₃(L) from Σ² through `Δ₃(L) = (2/L⁴) ∫₀ᴸ (L³ − 2L²r + r³) Σ²(r) dr`.
///
/// `r` must be ascending and positive with steps (including the first one from
/// the implicit point `Σ²(0) = 0`) of at most [`MAX_SIGMA2_STEP`], and must
/// reach `L`. Points beyond `L` are ignored; `Σ²(L)` is interpolated linearly.
pub fn delta3_via_integral<T: Scalar>(r: &[T], sigma2: &[T], length: T) -> Result<T> {
    if r.len() != sigma2.len() {
        return Err(Error::Alignment(format!(
            "{} grid points but {} values",
            r.len(),
            sigma2.len()
        )));
    }
    if !(length > T::zero()) {
        return Err(Error::Domain(format!("L = {length} must be positive")));
    }
    let max_step = T::cst(MAX_SIGMA2_STEP * (1.0 + 1e-9));
    let reach = r.last().copied().unwrap_or(T::zero());
    if reach < length * (T::one() - T::epsilon() * T::cst(16.0)) {
        return Err(Error::Domain(format!("Σ² grid ends at {reach} before L = {length}")));
    }
    let weight = |x: T| length * length * length - T::cst(2.0) * length * length * x + x * x * x;

    let half = T::cst(0.5);
    let (mut prev_r, mut prev_s) = (T::zero(), T::zero());
    let mut integral = T::zero();
    for (&ri, &si) in r.iter().zip(sigma2) {
        if !(ri > prev_r) || ri - prev_r > max_step {
            return Err(Error::Domain(format!(
                "Σ² grid step at r = {ri} is non-increasing or exceeds {MAX_SIGMA2_STEP}"
            )));
        }
        let (end, s_end) = if ri >= length {
            (length, prev_s + (si - prev_s) * (length - prev_r) / (ri - prev_r))
        } else {
            (ri, si)
        };
        integral = integral + (end - prev_r) * (weight(prev_r) * prev_s + weight(end) * s_end) * half;
        if ri >= length {
            break;
        }
        prev_r = ri;
        prev_s = si;
    }
    Ok(T::cst(2.0) * integral / length.powi(4))
}

/// Which statistic a curve holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Sigma2,
    Delta3,
    Theory,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Sigma2 => "sigma2",
            CurveKind::Delta3 => "delta3",
            CurveKind::Theory => "theory",
        }
    }
}

/// A statistic sampled on an ascending `L` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StatCurve<T> {
    pub l_values: Vec<T>,
    pub means: Vec<T>,
    pub std_errors: Vec<T>,
    pub kind: CurveKind,
    /// Unfolding label or theory curve name.
    pub method: String,
}

impl<T: Scalar> StatCurve<T> {
    /// Single-sample curve (zero standard errors).
    pub fn single(l_values: Vec<T>, values: Vec<T>, kind: CurveKind, method: impl Into<String>) -> Result<Self> {
        if l_values.len() != values.len() {
            return Err(Error::Alignment(format!(
                "{} grid points but {} values",
                l_values.len(),
                values.len()
            )));
        }
        let n = l_values.len();
        Ok(StatCurve {
            l_values,
            means: values,
            std_errors: vec![T::zero(); n],
            kind,
            method: method.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.l_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.l_values.is_empty()
    }

    /// `L,mean,stderr,kind,method` CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "L,mean,stderr,kind,method")?;
        for ((l, m), s) in self.l_values.iter().zip(&self.means).zip(&self.std_errors) {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{},{}",
                l.f64(),
                m.f64(),
                s.f64(),
                self.kind.as_str(),
                self.method
            )?;
        }
        Ok(())
    }
}

/// Mean and standard error across members sharing one `L` grid, accumulated
/// in member order.
pub fn ensemble_average<T: Scalar>(members: &[StatCurve<T>]) -> Result<StatCurve<T>> {
    let first = members.first().ok_or(Error::EmptyInput)?;
    for (i, m) in members.iter().enumerate() {
        if m.l_values != first.l_values || m.means.len() != first.l_values.len() {
            return Err(Error::Alignment(format!("member {i} has a different L grid")));
        }
    }
    let count = members.len();
    let k = T::from_usize_lossy(count);
    let mut means = Vec::with_capacity(first.len());
    let mut errors = Vec::with_capacity(first.len());
    for j in 0..first.len() {
        let mut sum = T::zero();
        for m in members {
            sum = sum + m.means[j];
        }
        let mean = sum / k;
        let stderr = if count > 1 {
            let mut ss = T::zero();
            for m in members {
                let d = m.means[j] - mean;
                ss = ss + d * d;
            }
            (ss / (k - T::one())).sqrt() / k.sqrt()
        } else {
            T::zero()
        };
        means.push(mean);
        errors.push(stderr);
    }
    Ok(StatCurve {
        l_values: first.l_values.clone(),
        means,
        std_errors: errors,
        kind: first.kind,
        method: first.method.clone(),
    })
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_two_sample<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut a: Vec<T> = a.to_vec();
    let mut b: Vec<T> = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (T::from_usize_lossy(a.len()), T::from_usize_lossy(b.len()));
    let (mut i, mut j) = (0, 0);
    let mut d = T::zero();
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        let gap = (T::from_usize_lossy(i) / na - T::from_usize_lossy(j) / nb).abs();
        d = d.max(gap);
    }
    d
}

/// One-sample Kolmogorov–Smirnov statistic against a continuous CDF.
pub fn ks_against_cdf<T: Scalar, F: Fn(T) -> T>(samples: &[T], cdf: F) -> T {
    let mut s: Vec<T> = samples.to_vec();
    s.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = T::from_usize_lossy(s.len());
    s.iter().enumerate().fold(T::zero(), |d, (i, &x)| {
        let f = cdf(x);
        let above = T::from_usize_lossy(i + 1) / n - f;
        let below = f - T::from_usize_lossy(i) / n;
        d.max(above).max(below)
    })
}
