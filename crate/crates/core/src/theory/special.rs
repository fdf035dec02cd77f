//! Sine and cosine integrals and the complementary error function.
//!
//! `Si`/`Ci` use their power series for `x <= 2` and the continued fraction of
//! `E1(ix)` (modified Lentz) above; `erfc` uses the positive-term series of
//! `erf` for `|x| < 2` and the Laplace continued fraction above. Both branches
//! are accurate to a few ulps in double precision.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Euler–Mascheroni constant.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_431;

/// Crossover between the series and continued-fraction branches.
pub const SERIES_SWITCH: f64 = 2.0;

const MAX_TERMS: usize = 1000;

pub fn euler_gamma<T: Scalar>() -> T {
    T::cst(EULER_GAMMA)
}

/// `(Ci(x), Si(x))` for `x > 0`.
fn cisi_positive<T: Scalar>(t: T) -> (T, T) {
    let eps = T::epsilon();
    if t > T::cst(SERIES_SWITCH) {
        let tiny = T::min_positive_value().sqrt();
        let one = Complex::new(T::one(), T::zero());
        let mut b = Complex::new(T::one(), t);
        let mut c = Complex::new(T::one() / tiny, T::zero());
        let mut d = one / b;
        let mut h = d;
        let two = T::cst(2.0);
        for i in 2..MAX_TERMS {
            let k = T::from_usize_lossy(i - 1);
            let a = -(k * k);
            b = b + Complex::new(two, T::zero());
            d = one / (d * a + b);
            c = b + one / c * a;
            let del = c * d;
            h = h * del;
            if (del.re - T::one()).abs() + del.im.abs() <= eps {
                break;
            }
        }
        h = Complex::new(t.cos(), -t.sin()) * h;
        (-h.re, T::FRAC_PI_2() + h.im)
    } else {
        let x2 = t * t;
        // Si = Σ (-1)^k t^(2k+1) / ((2k+1)(2k+1)!)
        let mut term = t; // t^(2k+1)/(2k+1)!
        let mut si = t;
        // Ci - γ - ln t = Σ_{k≥1} (-1)^k t^(2k) / (2k (2k)!)
        let mut cterm = T::one(); // t^(2k)/(2k)!
        let mut cin = T::zero();
        for k in 1..MAX_TERMS {
            let kf = T::from_usize_lossy(k);
            let two_k = kf + kf;
            cterm = -cterm * x2 / ((two_k - T::one()) * two_k);
            let cpart = cterm / two_k;
            cin = cin + cpart;
            term = -term * x2 / (two_k * (two_k + T::one()));
            let spart = term / (two_k + T::one());
            si = si + spart;
            if spart.abs() <= eps * si.abs() && cpart.abs() <= eps * cin.abs().max(eps) {
                break;
            }
        }
        (euler_gamma::<T>() + t.ln() + cin, si)
    }
}

/// Sine integral `Si(x) = ∫₀ˣ sin t / t dt` (odd in `x`).
pub fn sin_integral<T: Scalar>(x: T) -> T {
    if x == T::zero() {
        return T::zero();
    }
    let (_, si) = cisi_positive(x.abs());
    if x < T::zero() {
        -si
    } else {
        si
    }
}

/// Cosine integral `Ci(x) = γ + ln x + ∫₀ˣ (cos t − 1)/t dt`, defined for `x > 0`.
pub fn cos_integral<T: Scalar>(x: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("Ci undefined at x = {x}")));
    }
    Ok(cisi_positive(x).0)
}

/// `(Ci(x), Si(x))` in one evaluation, `x > 0`.
pub fn cos_sin_integrals<T: Scalar>(x: T) -> Result<(T, T)> {
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("Ci undefined at x = {x}")));
    }
    Ok(cisi_positive(x))
}

/// Complementary error function.
pub fn erfc<T: Scalar>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x < T::zero() {
        return T::cst(2.0) - erfc(-x);
    }
    let eps = T::epsilon();
    let x2 = x * x;
    if x < T::cst(SERIES_SWITCH) {
        // erf x = 2/√π e^{-x²} Σ 2^k x^{2k+1} / (1·3···(2k+1))
        let mut term = x;
        let mut sum = x;
        for k in 1..MAX_TERMS {
            term = term * (x2 + x2) / T::from_usize_lossy(2 * k + 1);
            sum = sum + term;
            if term <= eps * sum {
                break;
            }
        }
        T::one() - T::FRAC_2_SQRT_PI() * (-x2).exp() * sum
    } else {
        // erfc x = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
        let tiny = T::min_positive_value().sqrt();
        let mut f = x;
        let mut c = x;
        let mut d = T::zero();
        for j in 1..MAX_TERMS {
            let a = T::from_usize_lossy(j) * T::cst(0.5);
            d = x + a * d;
            if d == T::zero() {
                d = tiny;
            }
            c = x + a / c;
            if c == T::zero() {
                c = tiny;
            }
            d = T::one() / d;
            let del = c * d;
            f = f * del;
            if (del - T::one()).abs() <= eps {
                break;
            }
        }
        (-x2).exp() / (T::PI().sqrt() * f)
    }
}
