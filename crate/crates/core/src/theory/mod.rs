//! Analytic reference curves: semicircle density, GOE / Poisson / two-GOE
//! spacing densities, and GOE / Poisson number variance and rigidity.

pub mod special;

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats::{self, CurveKind, StatCurve};

pub use special::{cos_integral, cos_sin_integrals, erfc, euler_gamma, sin_integral, EULER_GAMMA};

/// Grid step of the Σ² integral behind [`delta3_goe`].
pub const DELTA3_GOE_STEP: f64 = 0.01;

fn non_negative<T: Scalar>(x: T, what: &str) -> Result<()> {
    if x >= T::zero() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} requires a non-negative argument, got {x}")))
    }
}

/// Semicircle level density `(2n/(π a²)) √(a² − E²)`, zero outside `[−a, a]`.
pub fn semicircle_density<T: Scalar>(n: usize, a: T, e: T) -> T {
    if e.abs() > a {
        return T::zero();
    }
    T::cst(2.0) * T::from_usize_lossy(n) / (T::PI() * a * a) * (a * a - e * e).sqrt()
}

/// Wigner surmise `(π/2) s exp(−π s²/4)`.
pub fn wigner_surmise<T: Scalar>(s: T) -> Result<T> {
    non_negative(s, "wigner_surmise")?;
    Ok(T::FRAC_PI_2() * s * (-T::FRAC_PI_4() * s * s).exp())
}

/// Cumulative distribution of the Wigner surmise, `1 − exp(−π s²/4)`.
pub fn wigner_cdf<T: Scalar>(s: T) -> T {
    if s <= T::zero() {
        return T::zero();
    }
    T::one() - (-T::FRAC_PI_4() * s * s).exp()
}

/// Gap function of the Wigner surmise, `E(s) = erfc(√π s / 2)`; `E'' = P`.
pub fn wigner_gap<T: Scalar>(s: T) -> T {
    erfc(T::PI().sqrt() * s * T::cst(0.5))
}

pub fn poisson_nnsd<T: Scalar>(s: T) -> Result<T> {
    non_negative(s, "poisson_nnsd")?;
    Ok((-s).exp())
}

pub fn poisson_cdf<T: Scalar>(s: T) -> T {
    if s <= T::zero() {
        return T::zero();
    }
    T::one() - (-s).exp()
}

pub fn poisson_sigma2<T: Scalar>(l: T) -> Result<T> {
    non_negative(l, "poisson_sigma2")?;
    Ok(l)
}

pub fn poisson_delta3<T: Scalar>(l: T) -> Result<T> {
    non_negative(l, "poisson_delta3")?;
    Ok(l / T::cst(15.0))
}

/// Spacing density of two merged, independent, equal-density GOE sequences at
/// Wigner-surmise level: `P₂ = d²/ds² [E_W(s/2)]²`, i.e.
/// `½ e^{−πs²/8} + (πs/8) e^{−πs²/16} erfc(√π s / 4)`.
pub fn two_goe_nnsd<T: Scalar>(s: T) -> Result<T> {
    non_negative(s, "two_goe_nnsd")?;
    let pi = T::PI();
    let first = T::cst(0.5) * (-pi * s * s / T::cst(8.0)).exp();
    let second = pi * s / T::cst(8.0) * (-pi * s * s / T::cst(16.0)).exp() * erfc(pi.sqrt() * s / T::cst(4.0));
    Ok(first + second)
}

/// Cumulative distribution of [`two_goe_nnsd`]: `1 − erfc(√π s/4) e^{−πs²/16}`.
pub fn two_goe_cdf<T: Scalar>(s: T) -> T {
    if s <= T::zero() {
        return T::zero();
    }
    let pi = T::PI();
    T::one() - erfc(pi.sqrt() * s / T::cst(4.0)) * (-pi * s * s / T::cst(16.0)).exp()
}

/// GOE number variance
///
/// `Σ²(L) = (2/π²)[ln(2πL) + γ + 1 + ½Si²(πL) − (π/2)Si(πL) − cos(2πL) − Ci(2πL)
///          + π²L(1 − (2/π)Si(2πL))]`,
///
/// which tends to `(2/π²)(ln 2πL + γ + 1 − π²/8)` for large `L`.
pub fn sigma2_goe<T: Scalar>(l: T) -> Result<T> {
    non_negative(l, "sigma2_goe")?;
    if l == T::zero() {
        return Ok(T::zero());
    }
    let pi = T::PI();
    let x = T::cst(2.0) * pi * l;
    let si_half = sin_integral(pi * l);
    let (ci, si) = cos_sin_integrals(x)?;
    let half = T::cst(0.5);
    let bracket = x.ln() + euler_gamma::<T>() + T::one() + half * si_half * si_half - T::FRAC_PI_2() * si_half
        - x.cos()
        - ci
        + pi * pi * l * (T::one() - T::cst(2.0) / pi * si);
    Ok(T::cst(2.0) / (pi * pi) * bracket)
}

/// GOE spectral rigidity: [`stats::delta3_via_integral`] of [`sigma2_goe`] on a
/// grid of step [`DELTA3_GOE_STEP`].
pub fn delta3_goe<T: Scalar>(l: T) -> Result<T> {
    if !(l > T::zero()) {
        return Err(Error::Domain(format!("delta3_goe requires L > 0, got {l}")));
    }
    let h = T::cst(DELTA3_GOE_STEP);
    let steps = (l / h).ceil().to_usize().unwrap_or(1).max(1);
    let grid: Vec<T> = (1..=steps)
        .map(|k| if k == steps { l } else { h * T::from_usize_lossy(k) })
        .collect();
    let values = grid.iter().map(|&r| sigma2_goe(r)).collect::<Result<Vec<_>>>()?;
    stats::delta3_via_integral(&grid, &values, l)
}

/// Reference curves available for export.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TheoryCurve {
    GoeNnsd,
    PoissonNnsd,
    TwoGoeNnsd,
    GoeSigma2,
    GoeDelta3,
    PoissonSigma2,
    PoissonDelta3,
    /// Needs the level count and the radius.
    SemicircleDensity { n: usize, a: f64 },
}

impl TheoryCurve {
    pub const NAMES: [&'static str; 8] = [
        "goe_nnsd",
        "poisson_nnsd",
        "two_goe_nnsd",
        "goe_sigma2",
        "goe_delta3",
        "poisson_sigma2",
        "poisson_delta3",
        "semicircle_density",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TheoryCurve::GoeNnsd => "goe_nnsd",
            TheoryCurve::PoissonNnsd => "poisson_nnsd",
            TheoryCurve::TwoGoeNnsd => "two_goe_nnsd",
            TheoryCurve::GoeSigma2 => "goe_sigma2",
            TheoryCurve::GoeDelta3 => "goe_delta3",
            TheoryCurve::PoissonSigma2 => "poisson_sigma2",
            TheoryCurve::PoissonDelta3 => "poisson_delta3",
            TheoryCurve::SemicircleDensity { .. } => "semicircle_density",
        }
    }

    /// Parse a curve name; `semicircle_density` takes `params = Some((n, a))`.
    pub fn parse(name: &str, params: Option<(usize, f64)>) -> Result<Self> {
        let curve = match name {
            "goe_nnsd" => TheoryCurve::GoeNnsd,
            "poisson_nnsd" => TheoryCurve::PoissonNnsd,
            "two_goe_nnsd" => TheoryCurve::TwoGoeNnsd,
            "goe_sigma2" => TheoryCurve::GoeSigma2,
            "goe_delta3" => TheoryCurve::GoeDelta3,
            "poisson_sigma2" => TheoryCurve::PoissonSigma2,
            "poisson_delta3" => TheoryCurve::PoissonDelta3,
            "semicircle_density" => {
                let (n, a) = params.ok_or_else(|| {
                    Error::InvalidParameter("semicircle_density needs level count and radius".into())
                })?;
                if !(a > 0.0) || n == 0 {
                    return Err(Error::InvalidParameter(format!("bad semicircle parameters n={n}, a={a}")));
                }
                return Ok(TheoryCurve::SemicircleDensity { n, a });
            }
            other => return Err(Error::InvalidParameter(format!("unknown theory curve {other:?}"))),
        };
        if params.is_some() {
            return Err(Error::InvalidParameter(format!("{name} takes no parameters")));
        }
        Ok(curve)
    }

    pub fn eval<T: Scalar>(&self, x: T) -> Result<T> {
        match *self {
            TheoryCurve::GoeNnsd => wigner_surmise(x),
            TheoryCurve::PoissonNnsd => poisson_nnsd(x),
            TheoryCurve::TwoGoeNnsd => two_goe_nnsd(x),
            TheoryCurve::GoeSigma2 => sigma2_goe(x),
            TheoryCurve::GoeDelta3 => delta3_goe(x),
            TheoryCurve::PoissonSigma2 => poisson_sigma2(x),
            TheoryCurve::PoissonDelta3 => poisson_delta3(x),
            TheoryCurve::SemicircleDensity { n, a } => Ok(semicircle_density(n, T::cst(a), x)),
        }
    }

    /// Sample on `grid` as a theory [`StatCurve`] (zero standard errors).
    pub fn sample<T: Scalar>(&self, grid: &[T]) -> Result<StatCurve<T>> {
        let values = grid.iter().map(|&x| self.eval(x)).collect::<Result<Vec<_>>>()?;
        StatCurve::single(grid.to_vec(), values, CurveKind::Theory, self.name())
    }
}

impl FromStr for TheoryCurve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoryCurve::parse(s, None)
    }
}
