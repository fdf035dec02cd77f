//! Unfolding: map raw levels `E` to `ε = I(E)` so the mean spacing is one.
//!
//! Three smooth staircases are supported: the semicircle cumulative count, a
//! sum of independent semicircles (one per block of a clustered network), and
//! a least-squares polynomial fitted to the empirical staircase of each
//! spectrum.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::Spectrum;

/// Highest polynomial degree accepted by [`fit_polynomial_cdf`].
pub const MAX_DEGREE: usize = 9;

/// Accepted band for the mean unfolded spacing.
pub const MEAN_SPACING_BAND: (f64, f64) = (0.9, 1.1);

#[derive(Debug, Clone, PartialEq)]
pub enum UnfoldingMethod<T> {
    /// Semicircle cumulative count for `n_eff` levels of radius `a`.
    SemicircleExact { n_eff: usize, a: T },
    /// Sum of semicircle counts, one `(n_b, a_b)` per block.
    BlockSemicircle { blocks: Vec<(usize, T)> },
    /// Polynomial least-squares fit of the staircase.
    PolynomialFit { degree: usize, include_constant: bool },
}

impl<T: Scalar> UnfoldingMethod<T> {
    pub fn poly(degree: usize) -> Self {
        UnfoldingMethod::PolynomialFit {
            degree,
            include_constant: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            UnfoldingMethod::SemicircleExact { n_eff, a } => {
                check_radius(*a)?;
                if *n_eff == 0 {
                    return Err(Error::InvalidParameter("n_eff must be positive".into()));
                }
            }
            UnfoldingMethod::BlockSemicircle { blocks } => {
                if blocks.is_empty() {
                    return Err(Error::InvalidParameter("block list is empty".into()));
                }
                for &(_, a) in blocks {
                    check_radius(a)?;
                }
            }
            UnfoldingMethod::PolynomialFit { degree, .. } => {
                if !(1..=MAX_DEGREE).contains(degree) {
                    return Err(Error::InvalidParameter(format!(
                        "polynomial degree {degree} not in 1..={MAX_DEGREE}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Short label used in file names: `semicircle`, `block_semicircle`, `poly3`, `poly3_nc`.
    pub fn label(&self) -> String {
        match self {
            UnfoldingMethod::SemicircleExact { .. } => "semicircle".into(),
            UnfoldingMethod::BlockSemicircle { .. } => "block_semicircle".into(),
            UnfoldingMethod::PolynomialFit {
                degree,
                include_constant: true,
            } => format!("poly{degree}"),
            UnfoldingMethod::PolynomialFit {
                degree,
                include_constant: false,
            } => format!("poly{degree}_nc"),
        }
    }

    /// Variant name and parameters as JSON.
    pub fn to_json(&self) -> Value {
        match self {
            UnfoldingMethod::SemicircleExact { n_eff, a } => json!({
                "variant": "SemicircleExact",
                "n_eff": n_eff,
                "a": a.f64(),
            }),
            UnfoldingMethod::BlockSemicircle { blocks } => json!({
                "variant": "BlockSemicircle",
                "blocks": blocks.iter().map(|(n, a)| json!({"n_b": n, "a_b": a.f64()})).collect::<Vec<_>>(),
            }),
            UnfoldingMethod::PolynomialFit {
                degree,
                include_constant,
            } => json!({
                "variant": "PolynomialFit",
                "degree": degree,
                "include_constant": include_constant,
            }),
        }
    }
}

fn check_radius<T: Scalar>(a: T) -> Result<()> {
    if a > T::zero() && a.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("semicircle radius {a} must be positive")))
    }
}

/// Semicircle radius `a = 2 σ √n`.
pub fn semicircle_radius<T: Scalar>(n: usize, sigma: T) -> Result<T> {
    if n == 0 {
        return Err(Error::InvalidParameter("level count must be positive".into()));
    }
    if !(sigma > T::zero()) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} must be positive")));
    }
    Ok(T::cst(2.0) * sigma * T::from_usize_lossy(n).sqrt())
}

/// Off-diagonal standard deviation `√(p(1−p))` of a Bernoulli adjacency entry.
pub fn bernoulli_sigma<T: Scalar>(p: T) -> T {
    (p * (T::one() - p)).sqrt()
}

/// Number of semicircle levels below `e`:
/// `n [1/2 + e √(a²−e²)/(π a²) + arctan(e/√(a²−e²))/π]`, clamped to `[0, n]`.
pub fn semicircle_cdf<T: Scalar>(n: usize, a: T, e: T) -> T {
    let nf = T::from_usize_lossy(n);
    if e <= -a {
        return T::zero();
    }
    if e >= a {
        return nf;
    }
    let root = (a * a - e * e).sqrt();
    // arctan(e / root) written as asin(e / a), which stays finite at the edges
    let half = T::cst(0.5);
    nf * (half + e * root / (T::PI() * a * a) + (e / a).asin() / T::PI())
}

/// Sum of per-block semicircle counts.
pub fn block_semicircle_cdf<T: Scalar>(blocks: &[(usize, T)], e: T) -> T {
    blocks.iter().map(|&(n, a)| semicircle_cdf(n, a, e)).sum()
}

/// Least-squares polynomial model of a staircase.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialStaircase<T> {
    /// Coefficients `c_0..c_d` in powers of `E`.
    pub coefficients: Vec<T>,
    /// Root-mean-square residual of the fit, in levels.
    pub residual_rms: T,
    pub include_constant: bool,
    /// `x = scale * E + shift` is the fitting variable.
    scale: T,
    shift: T,
    /// Coefficients in powers of `x` (including a zero constant when omitted).
    x_coefficients: Vec<T>,
    e_range: (T, T),
}

impl<T: Scalar> PolynomialStaircase<T> {
    pub fn degree(&self) -> usize {
        self.x_coefficients.len() - 1
    }

    fn to_x(&self, e: T) -> T {
        self.scale * e + self.shift
    }

    /// Fitted staircase at `e`.
    pub fn eval(&self, e: T) -> T {
        horner(&self.x_coefficients, self.to_x(e))
    }

    /// `dI/dE` at `e`.
    pub fn derivative(&self, e: T) -> T {
        let x = self.to_x(e);
        let mut acc = T::zero();
        for (k, &c) in self.x_coefficients.iter().enumerate().skip(1).rev() {
            acc = acc * x + c * T::from_usize_lossy(k);
        }
        acc * self.scale
    }

    /// Range of the levels the fit was made on.
    pub fn e_range(&self) -> (T, T) {
        self.e_range
    }

    /// First closed subinterval of the fitted range on which the staircase
    /// fails to increase, located on a uniform grid of `samples` points.
    pub fn non_increasing_interval(&self, samples: usize) -> Option<(T, T)> {
        let (lo, hi) = self.e_range;
        let steps = samples.max(2) - 1;
        let step = (hi - lo) / T::from_usize_lossy(steps);
        let at = |k: usize| if k == steps { hi } else { lo + step * T::from_usize_lossy(k) };
        let mut start = None;
        for k in 0..=steps {
            let bad = !(self.derivative(at(k)) > T::zero());
            match (bad, start) {
                (true, None) => start = Some(k),
                (false, Some(s)) => return Some((at(s), at(k - 1))),
                _ => {}
            }
        }
        start.map(|s| (at(s), hi))
    }
}

fn horner<T: Scalar>(coefficients: &[T], x: T) -> T {
    coefficients.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

/// Ordinary least squares fit of `(E_i, i − 1/2)`, `i = 1..m`, by a polynomial
/// of the given degree.
///
/// With a constant term the fit runs on `x = (2E − E_max − E_min)/(E_max − E_min)`;
/// without one it runs on `x = E / max|E|` so that `I(0) = 0` is preserved.
/// Coefficients are reported in powers of `E`.
pub fn fit_polynomial_cdf<T: Scalar>(
    spec: &Spectrum<T>,
    degree: usize,
    include_constant: bool,
) -> Result<PolynomialStaircase<T>> {
    if !(1..=MAX_DEGREE).contains(&degree) {
        return Err(Error::InvalidParameter(format!(
            "polynomial degree {degree} not in 1..={MAX_DEGREE}"
        )));
    }
    let m = spec.len();
    let needed = 10 * (degree + 1);
    if m < needed {
        return Err(Error::InsufficientLevels { needed, got: m });
    }
    let values = spec.values();
    let (e_min, e_max) = (values[0], values[m - 1]);
    if !(e_max > e_min) {
        return Err(Error::Fit("all levels coincide".into()));
    }
    let two = T::cst(2.0);
    let (scale, shift) = if include_constant {
        let width = e_max - e_min;
        (two / width, -(e_max + e_min) / width)
    } else {
        let reach = e_min.abs().max(e_max.abs());
        (T::one() / reach, T::zero())
    };

    let first_power = if include_constant { 0 } else { 1 };
    let cols = degree + 1 - first_power;
    // column-major design matrix
    let mut design = vec![T::zero(); m * cols];
    let mut rhs = Vec::with_capacity(m);
    for (i, &e) in values.iter().enumerate() {
        let x = scale * e + shift;
        let mut power = if first_power == 0 { T::one() } else { x };
        for c in 0..cols {
            design[c * m + i] = power;
            power = power * x;
        }
        rhs.push(T::from_usize_lossy(i) + T::cst(0.5));
    }
    let solution = householder_least_squares(&mut design, &mut rhs.clone(), m, cols)?;
    debug_assert_eq!(solution.len(), cols);

    let mut x_coefficients = vec![T::zero(); degree + 1];
    x_coefficients[first_power..].copy_from_slice(&solution);

    let residual_sq: T = values
        .iter()
        .zip(&rhs)
        .map(|(&e, &y)| {
            let r = horner(&x_coefficients, scale * e + shift) - y;
            r * r
        })
        .sum();
    let residual_rms = (residual_sq / T::from_usize_lossy(m)).sqrt();

    // expand Σ b_j (scale E + shift)^j into powers of E
    let mut coefficients = vec![T::zero(); degree + 1];
    for (j, &b) in x_coefficients.iter().enumerate() {
        let mut binom = T::one();
        for k in 0..=j {
            let term = b * binom * scale.powi(k as i32) * shift.powi((j - k) as i32);
            coefficients[k] = coefficients[k] + term;
            binom = binom * T::from_usize_lossy(j - k) / T::from_usize_lossy(k + 1);
        }
    }
    if !include_constant {
        coefficients[0] = T::zero();
    }

    Ok(PolynomialStaircase {
        coefficients,
        residual_rms,
        include_constant,
        scale,
        shift,
        x_coefficients,
        e_range: (e_min, e_max),
    })
}

/// Solve `min ‖A c − y‖` by Householder QR. `a` is `m x n` column-major and is
/// overwritten; `y` is overwritten with `Qᵀ y`.
fn householder_least_squares<T: Scalar>(a: &mut [T], y: &mut [T], m: usize, n: usize) -> Result<Vec<T>> {
    let mut diag = vec![T::zero(); n];
    for k in 0..n {
        let col = &mut a[k * m..(k + 1) * m];
        let norm = col[k..].iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm == T::zero() {
            return Err(Error::Fit("rank-deficient design matrix".into()));
        }
        let alpha = if col[k] > T::zero() { -norm } else { norm };
        col[k] = col[k] - alpha;
        let vnorm2 = col[k..].iter().map(|&v| v * v).sum::<T>();
        diag[k] = alpha;
        let v: Vec<T> = col[k..].to_vec();
        // apply H = I − 2 v vᵀ / (vᵀv) to remaining columns and to y
        let apply = |target: &mut [T]| {
            let dot = target[k..].iter().zip(&v).fold(T::zero(), |s, (&t, &w)| s + t * w);
            let f = T::cst(2.0) * dot / vnorm2;
            for (t, &w) in target[k..].iter_mut().zip(&v) {
                *t = *t - f * w;
            }
        };
        for j in (k + 1)..n {
            apply(&mut a[j * m..(j + 1) * m]);
        }
        apply(y);
    }

    let largest = diag.iter().fold(T::zero(), |s, d| s.max(d.abs()));
    let tol = T::epsilon() * T::from_usize_lossy(m).sqrt() * T::cst(100.0) * largest;
    if diag.iter().any(|d| d.abs() <= tol) {
        return Err(Error::Fit("rank-deficient design matrix".into()));
    }

    // back substitution with R (strict upper part stored in a, diagonal in diag)
    let mut c = vec![T::zero(); n];
    for k in (0..n).rev() {
        let mut s = y[k];
        for j in (k + 1)..n {
            s = s - a[j * m + k] * c[j];
        }
        c[k] = s / diag[k];
    }
    Ok(c)
}

/// Levels `ε` with unit mean spacing, plus the method that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldedSpectrum<T> {
    levels: Vec<T>,
    method: UnfoldingMethod<T>,
    meta: String,
    fit: Option<PolynomialStaircase<T>>,
}

impl<T: Scalar> UnfoldedSpectrum<T> {
    /// Wrap already-unfolded levels (e.g. synthetic sequences). Levels are sorted.
    pub fn from_levels(mut levels: Vec<T>, method: UnfoldingMethod<T>, meta: impl Into<String>) -> Result<Self> {
        if levels.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite unfolded level".into()));
        }
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(UnfoldedSpectrum {
            levels,
            method,
            meta: meta.into(),
            fit: None,
        })
    }

    pub fn levels(&self) -> &[T] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn method(&self) -> &UnfoldingMethod<T> {
        &self.method
    }

    pub fn meta(&self) -> &str {
        &self.meta
    }

    /// The polynomial model, for polynomial unfolding.
    pub fn fit(&self) -> Option<&PolynomialStaircase<T>> {
        self.fit.as_ref()
    }

    /// `ε_max − ε_min`.
    pub fn span(&self) -> T {
        match (self.levels.first(), self.levels.last()) {
            (Some(&a), Some(&b)) => b - a,
            _ => T::zero(),
        }
    }

    /// Mean nearest-neighbour spacing, `(ε_max − ε_min)/(m − 1)`.
    pub fn mean_spacing(&self) -> T {
        if self.levels.len() < 2 {
            return T::nan();
        }
        self.span() / T::from_usize_lossy(self.levels.len() - 1)
    }

    /// `index,epsilon` CSV with 17 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,epsilon")?;
        for (i, v) in self.levels.iter().enumerate() {
            writeln!(w, "{i},{:.16e}", v.f64())?;
        }
        Ok(())
    }
}

/// Grid resolution used by the monotonicity check.
fn monotonicity_samples(levels: usize) -> usize {
    (4 * levels).max(2048)
}

/// Apply `ε_i = I(E_i)` for the chosen smooth staircase `I`.
pub fn unfold<T: Scalar>(spec: &Spectrum<T>, method: &UnfoldingMethod<T>) -> Result<UnfoldedSpectrum<T>> {
    method.validate()?;
    if spec.len() < 2 {
        return Err(Error::InsufficientLevels {
            needed: 2,
            got: spec.len(),
        });
    }
    let (levels, fit) = match method {
        UnfoldingMethod::SemicircleExact { n_eff, a } => (
            spec.values().iter().map(|&e| semicircle_cdf(*n_eff, *a, e)).collect::<Vec<_>>(),
            None,
        ),
        UnfoldingMethod::BlockSemicircle { blocks } => (
            spec.values().iter().map(|&e| block_semicircle_cdf(blocks, e)).collect(),
            None,
        ),
        UnfoldingMethod::PolynomialFit {
            degree,
            include_constant,
        } => {
            let fit = fit_polynomial_cdf(spec, *degree, *include_constant)?;
            if let Some((lo, hi)) = fit.non_increasing_interval(monotonicity_samples(spec.len())) {
                return Err(Error::NonMonotone { lo: lo.f64(), hi: hi.f64() });
            }
            (spec.values().iter().map(|&e| fit.eval(e)).collect(), Some(fit))
        }
    };

    let unfolded = UnfoldedSpectrum {
        levels,
        method: method.clone(),
        meta: spec.meta().to_owned(),
        fit,
    };
    let mean = unfolded.mean_spacing().f64();
    if !(MEAN_SPACING_BAND.0..=MEAN_SPACING_BAND.1).contains(&mean) {
        return Err(Error::UnfoldingQuality(mean));
    }
    Ok(unfolded)
}
