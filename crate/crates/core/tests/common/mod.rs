//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::RngCore;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// 15-point Kronrod estimate and its difference from the embedded 7-point Gauss rule.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, (k - g).abs() * h)
}

fn adapt(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (k, err) = gk15(f, a, b);
    // below ~50 ulp of the piece the Gauss-Kronrod difference is rounding noise
    if err <= tol || err <= 50.0 * f64::EPSILON * k.abs() || depth == 0 {
        return k;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss–Kronrod quadrature of `f` over `[a, b]`, pieces of length at
/// most `piece` integrated separately.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, piece: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let pieces = ((b - a) / piece).ceil().max(1.0) as usize;
    let w = (b - a) / pieces as f64;
    let per = tol / pieces as f64;
    (0..pieces)
        .map(|k| {
            let lo = a + w * k as f64;
            let hi = if k + 1 == pieces { b } else { lo + w };
            adapt(&f, lo, hi, per, 20)
        })
        .sum()
}

/// `Si(x)` by quadrature of `sin t / t`.
pub fn si_quad(x: f64) -> f64 {
    let f = |t: f64| if t == 0.0 { 1.0 } else { t.sin() / t };
    integrate(f, 0.0, x, 1e-12, std::f64::consts::PI)
}

/// `Ci(x) = γ + ln x + ∫₀ˣ (cos t − 1)/t dt` by quadrature.
pub fn ci_quad(x: f64) -> f64 {
    let f = |t: f64| {
        if t < 1e-4 {
            // (cos t − 1)/t = −t/2 + t³/24 − ...
            -t / 2.0 + t * t * t / 24.0
        } else {
            (t.cos() - 1.0) / t
        }
    };
    0.577_215_664_901_532_9 + x.ln() + integrate(f, 0.0, x, 1e-12, std::f64::consts::PI)
}

/// `erfc(x) = (2/√π) ∫ₓ^∞ e^{−t²} dt`, truncated where the integrand underflows.
pub fn erfc_quad(x: f64) -> f64 {
    let upper = x.max(0.0) + 40.0;
    let scale = 2.0 / std::f64::consts::PI.sqrt();
    if x >= 0.0 {
        // factor out e^{−x²} so the relative accuracy survives large x
        let g = |t: f64| (-(t - x) * (t + x)).exp();
        let tail = integrate(g, x, upper, 1e-16, 0.25);
        scale * (-x * x).exp() * tail
    } else {
        2.0 - erfc_quad(-x)
    }
}

/// Standard normal pairs by Box–Muller on 53-bit uniforms.
pub struct Gaussian {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Gaussian {
    pub fn new(seed: u64) -> Self {
        Gaussian {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * t.sin());
        r * t.cos()
    }
}

/// Dense GOE matrix: off-diagonal `N(0, 1)`, diagonal `N(0, 2)`, so the
/// spectrum is a semicircle of radius `2√n`.
pub fn goe_matrix(n: usize, seed: u64) -> Vec<f64> {
    let mut g = Gaussian::new(seed);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        a[i * n + i] = g.sample() * std::f64::consts::SQRT_2;
        for j in i + 1..n {
            let x = g.sample();
            a[i * n + j] = x;
            a[j * n + i] = x;
        }
    }
    a
}

/// Semicircle CDF for unit total weight and radius `a`, written out independently.
pub fn semicircle_fraction(a: f64, e: f64) -> f64 {
    if e <= -a {
        return 0.0;
    }
    if e >= a {
        return 1.0;
    }
    let t = e / a;
    0.5 + (t * (1.0 - t * t).sqrt() + t.asin()) / std::f64::consts::PI
}

/// Maximum gap between two empirical CDFs.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// `sup |F_n − F|` for a continuous reference CDF.
pub fn ks_to_cdf(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = cdf(x);
            (f - k as f64 / n).abs().max(((k + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// `χ` variate with `k` degrees of freedom as the norm of `k` normals.
fn chi(g: &mut Gaussian, k: usize) -> f64 {
    (0..k).map(|_| g.sample().powi(2)).sum::<f64>().sqrt()
}

/// Eigenvalues of an `n x n` GOE matrix with the scaling of [`goe_matrix`],
/// drawn through the tridiagonal β = 1 Hermite model (diagonal `N(0, 2)`,
/// subdiagonal `χ_{n-1}, ..., χ_1`). Ascending.
pub fn goe_levels(n: usize, seed: u64) -> Vec<f64> {
    let mut g = Gaussian::new(seed);
    let d: Vec<f64> = (0..n).map(|_| g.sample() * std::f64::consts::SQRT_2).collect();
    let e: Vec<f64> = (1..n).map(|k| chi(&mut g, n - k)).collect();
    let mut v = specfold::spectral::eigen::tridiagonal_eigenvalues(d, &e).expect("QL converges");
    v.sort_by(f64::total_cmp);
    v
}

/// Unfold GOE levels with the exact semicircle count (`a = 2√n`) and keep
/// the central `keep` fraction.
pub fn unfold_goe_bulk(levels: &[f64], keep: f64) -> Vec<f64> {
    let n = levels.len();
    let a = 2.0 * (n as f64).sqrt();
    let cut = ((1.0 - keep) / 2.0 * n as f64) as usize;
    levels[cut..n - cut].iter().map(|&e| n as f64 * semicircle_fraction(a, e)).collect()
}

/// Window starts uniform on `[lo, hi − L]` from a dedicated stream.
pub fn window_starts(lo: f64, hi: f64, length: f64, count: usize, seed: u64) -> Vec<f64> {
    let mut g = Gaussian::new(seed);
    (0..count).map(|_| lo + (hi - lo - length) * g.uniform()).collect()
}

/// Sample variance of the number of levels in `[α, α + L)` over the given starts.
pub fn count_variance(levels: &[f64], length: f64, starts: &[f64]) -> f64 {
    let counts: Vec<f64> = starts
        .iter()
        .map(|&a| (levels.partition_point(|&v| v < a + length) - levels.partition_point(|&v| v < a)) as f64)
        .collect();
    let m = counts.iter().sum::<f64>() / counts.len() as f64;
    counts.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (counts.len() - 1) as f64
}

/// `min_{A,B} (1/L) ∫_α^{α+L} (N(x) − A x − B)² dx` from the raw moments of the
/// staircase on `[0, L]`, solved as 2x2 normal equations.
pub fn staircase_rigidity(levels: &[f64], alpha: f64, length: f64) -> f64 {
    let lo = levels.partition_point(|&v| v <= alpha);
    let hi = levels.partition_point(|&v| v <= alpha + length);
    let mut xs: Vec<f64> = levels[lo..hi].iter().map(|&v| v - alpha).collect();
    xs.push(length);
    let (mut s_n, mut s_xn, mut s_nn) = (0.0, 0.0, 0.0);
    let mut prev = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        // N = k on [prev, x)
        let n = k as f64;
        s_n += n * (x - prev);
        s_xn += n * (x * x - prev * prev) / 2.0;
        s_nn += n * n * (x - prev);
        prev = x;
    }
    let (m0, m1, m2) = (length, length * length / 2.0, length.powi(3) / 3.0);
    let det = m0 * m2 - m1 * m1;
    let a = (m0 * s_xn - m1 * s_n) / det;
    let b = (m2 * s_n - m1 * s_xn) / det;
    // expand ∫ (N − a x − b)²
    let resid = s_nn - 2.0 * a * s_xn - 2.0 * b * s_n + a * a * m2 + 2.0 * a * b * m1 + b * b * m0;
    resid / length
}
