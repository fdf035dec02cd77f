mod common;

use common::{integrate, Gaussian};
use specfold::stats::delta3_via_integral;
use specfold::theory::{
    delta3_goe, poisson_delta3, poisson_nnsd, sigma2_goe, two_goe_cdf, two_goe_nnsd, wigner_cdf, wigner_gap,
    wigner_surmise, EULER_GAMMA,
};
use std::f64::consts::PI;

fn moments(p: impl Fn(f64) -> f64) -> (f64, f64) {
    let mass = integrate(&p, 0.0, 40.0, 1e-13, 0.5);
    let mean = integrate(|s| s * p(s), 0.0, 40.0, 1e-13, 0.5);
    (mass, mean)
}

#[test]
fn spacing_densities_are_normalized_with_unit_mean() {
    let curves: [(&str, Box<dyn Fn(f64) -> f64>); 3] = [
        ("wigner", Box::new(|s| wigner_surmise(s).unwrap())),
        ("poisson", Box::new(|s| poisson_nnsd(s).unwrap())),
        ("two_goe", Box::new(|s| two_goe_nnsd(s).unwrap())),
    ];
    for (name, p) in curves {
        let (mass, mean) = moments(p);
        assert!((mass - 1.0).abs() < 1e-10, "{name}: mass {mass}");
        assert!((mean - 1.0).abs() < 1e-10, "{name}: mean {mean}");
    }
}

#[test]
fn cdfs_integrate_their_densities() {
    for k in 0..=60 {
        let s = 0.1 * k as f64;
        let w = integrate(|t| wigner_surmise(t).unwrap(), 0.0, s, 1e-13, 0.5);
        let t2 = integrate(|t| two_goe_nnsd(t).unwrap(), 0.0, s, 1e-13, 0.5);
        assert!((wigner_cdf(s) - w).abs() < 1e-11, "wigner cdf at {s}");
        assert!((two_goe_cdf(s) - t2).abs() < 1e-11, "two_goe cdf at {s}");
    }
}

#[test]
fn two_goe_density_at_zero_is_one_half() {
    assert!((two_goe_nnsd(0.0f64).unwrap() - 0.5).abs() < 1e-15);
    assert_eq!(wigner_surmise(0.0f64).unwrap(), 0.0);
    assert!(wigner_surmise(-1.0f64).is_err());
}

#[test]
fn gap_function_boundary_values() {
    assert!((wigner_gap(0.0f64) - 1.0).abs() < 1e-15);
    // E'(0) = −1 for unit mean spacing
    let h: f64 = 1e-6;
    assert!(((wigner_gap(h) - wigner_gap(0.0f64)) / h + 1.0).abs() < 1e-5);
    assert!(wigner_gap(10.0f64) < 1e-30);
}

/// Wigner spacing with mean `mean` by inversion of the CDF.
fn wigner_draw(g: &mut Gaussian, mean: f64) -> f64 {
    mean * (-4.0 * (1.0 - g.uniform()).ln() / PI).sqrt()
}

#[test]
fn superposed_renewal_sequences_follow_two_goe() {
    // two independent half-density sequences, started well before the window
    let total = 1_000_000usize;
    let half = total / 2;
    let mut levels = Vec::with_capacity(total);
    let mut end = f64::INFINITY;
    for seed in [11u64, 12] {
        let mut g = Gaussian::new(seed);
        let mut x = -200.0;
        let mut kept = 0;
        while kept < half {
            x += wigner_draw(&mut g, 2.0);
            if x >= 0.0 {
                levels.push(x);
                kept += 1;
            }
        }
        end = end.min(x);
    }
    levels.sort_by(f64::total_cmp);
    // past the end of the shorter stream only one sequence is left
    levels.retain(|&x| x <= end);
    let spacings: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let ks = common::ks_to_cdf(&spacings, two_goe_cdf);
    assert!(ks <= 0.005, "KS {ks}");
    let ks_single = common::ks_to_cdf(&spacings, wigner_cdf);
    assert!(ks_single > 0.1, "superposition should not look like a single sequence: {ks_single}");
}

#[test]
fn poisson_rigidity_from_the_integral_identity() {
    let oracle = |l: f64| {
        let w = |r: f64| (l * l * l - 2.0 * l * l * r + r * r * r) * r;
        2.0 / l.powi(4) * integrate(w, 0.0, l, 1e-13, 1.0)
    };
    for l in [0.5, 1.0, 2.0, 5.0, 10.0, 30.0, 50.0] {
        let exact = poisson_delta3(l).unwrap();
        assert!((oracle(l) - exact).abs() < 1e-6, "quadrature at L={l}");
        let step = 0.01;
        let count = (l / step).round() as usize;
        let r: Vec<f64> = (1..=count).map(|k| k as f64 * step).collect();
        let via = delta3_via_integral(&r, &r, l).unwrap();
        assert!((via - exact).abs() < 1e-6, "grid integral at L={l}: {via} vs {exact}");
    }
}

#[test]
fn sigma2_goe_limits() {
    // small L: levels are almost uncorrelated at short range, Σ² ≈ L
    let l: f64 = 1e-3;
    assert!((sigma2_goe(l).unwrap() / l - 1.0).abs() < 1e-2);
    assert_eq!(sigma2_goe(0.0f64).unwrap(), 0.0);
    for l in [200.0, 1000.0] {
        let asym = 2.0 / (PI * PI) * ((2.0 * PI * l).ln() + EULER_GAMMA + 1.0 - PI * PI / 8.0);
        assert!((sigma2_goe(l).unwrap() - asym).abs() < 2e-3 / l.sqrt(), "L={l}");
    }
}

#[test]
fn delta3_goe_limits() {
    for l in [100.0, 200.0] {
        let asym = ((2.0 * PI * l).ln() + EULER_GAMMA - 1.25 - PI * PI / 8.0) / (PI * PI);
        let got = delta3_goe(l).unwrap();
        assert!((got - asym).abs() < 2e-3, "L={l}: {got} vs {asym}");
    }
    // small L: Δ₃ → L/15 like Poisson
    let l: f64 = 0.05;
    assert!((delta3_goe(l).unwrap() / (l / 15.0) - 1.0).abs() < 0.05);
    assert!(delta3_goe(0.0f64).is_err());
}
