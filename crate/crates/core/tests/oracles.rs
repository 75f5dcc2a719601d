//! Independent oracles for the closed forms and transforms.

use approx::assert_relative_eq;
use rand::Rng;

use kreg::datagen::{rng_from_seed, sample_in_sphere};
use kreg::geometry::{ln_gamma_half, IdealGeometry};
use kreg::preprocess::{dct2, idct2};

/// `ζ(s)` by direct summation with an Euler–Maclaurin tail.
fn zeta(s: f64) -> f64 {
    const N: usize = 10_000;
    let head: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    let n = N as f64;
    head + n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s / 12.0 * n.powf(-s - 1.0)
}

/// `B_{2n} = (-1)^{n+1} 2 (2n)! ζ(2n) / (2π)^{2n}`.
fn bernoulli_even(n: usize) -> f64 {
    let two_n = 2 * n;
    let mut ratio = 2.0 * zeta(two_n as f64);
    // (2n)! / (2π)^{2n}, accumulated factor by factor to stay in range
    for i in 1..=two_n {
        ratio *= i as f64 / std::f64::consts::TAU;
    }
    if n % 2 == 1 {
        ratio
    } else {
        -ratio
    }
}

/// Stirling series with 50 correction terms after shifting the argument to
/// at least 30.
fn ln_gamma_oracle(x: f64) -> f64 {
    let mut z = x;
    let mut shift = 0.0;
    while z < 30.0 {
        shift += z.ln();
        z += 1.0;
    }
    let mut series = (z - 0.5) * z.ln() - z + 0.5 * std::f64::consts::TAU.ln();
    for n in 1..=50usize {
        let k = 2 * n;
        series += bernoulli_even(n) / ((k * (k - 1)) as f64 * z.powi(k as i32 - 1));
    }
    series - shift
}

#[test]
fn ln_gamma_matches_stirling_oracle() {
    for two_x in 1..=400u32 {
        let x = f64::from(two_x) / 2.0;
        let got = ln_gamma_half::<f64>(two_x).unwrap();
        let want = ln_gamma_oracle(x);
        let scale = want.abs().max(1.0);
        assert!(
            (got - want).abs() <= 1e-12 * scale,
            "lnΓ({x}): {got} vs oracle {want}"
        );
    }
}

#[test]
fn volume_matches_hit_or_miss() {
    let mut rng = rng_from_seed(11);
    for d in 1..=5usize {
        let n = 1_000_000;
        let hits = (0..n)
            .filter(|_| (0..d).map(|_| rng.random_range(-1.0f64..1.0).powi(2)).sum::<f64>() <= 1.0)
            .count();
        let estimate = hits as f64 / n as f64 * 2f64.powi(d as i32);
        let g = IdealGeometry::<f64>::new(d, 1.0).unwrap();
        assert_relative_eq!(estimate, g.volume, max_relative = 0.01);
    }
}

#[test]
fn sphere_moments_match_closed_forms_at_other_radii() {
    let mut rng = rng_from_seed(12);
    for (d, r) in [(2usize, 0.5f64), (4, 3.0), (7, 1.7)] {
        let g = IdealGeometry::<f64>::new(d, r).unwrap();
        let n = 400_000;
        let mut sq = 0.0;
        let mut half = (0usize, 0.0f64);
        for _ in 0..n {
            let x = sample_in_sphere::<f64>(d, r, &mut rng);
            sq += x.iter().map(|v| v * v).sum::<f64>();
            if x[0] > 0.0 {
                half.0 += 1;
                half.1 += x[0];
            }
        }
        assert_relative_eq!(sq / n as f64, r * r * g.alpha, max_relative = 0.01);
        assert_relative_eq!(half.1 / half.0 as f64, g.rho, max_relative = 0.01);
    }
}

#[test]
fn alpha_over_two_beta_approaches_one() {
    let r = IdealGeometry::<f64>::new(200, 1.0).unwrap().alpha_over_two_beta();
    assert!(r > 1.0 && r < 1.02, "{r}");
    let values: Vec<f64> = (1..=200)
        .map(|d| IdealGeometry::<f64>::new(d, 1.0).unwrap().alpha_over_two_beta())
        .collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]), "α/2β decreases with d");
}

#[test]
fn f32_geometry_agrees_with_f64() {
    for d in [1usize, 2, 5, 30] {
        let a = IdealGeometry::<f32>::new(d, 1.0).unwrap();
        let b = IdealGeometry::<f64>::new(d, 1.0).unwrap();
        assert_relative_eq!(f64::from(a.gamma), b.gamma, max_relative = 1e-5);
        assert_relative_eq!(f64::from(a.beta), b.beta, max_relative = 1e-4);
    }
}

/// Orthonormal 2-D DCT-II straight from the definition.
fn dct_direct(block: &[f64], n: usize) -> Vec<f64> {
    let scale = |k: usize| if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
    let pi = std::f64::consts::PI;
    let mut out = vec![0.0; n * n];
    for u in 0..n {
        for v in 0..n {
            let mut acc = 0.0;
            for y in 0..n {
                for x in 0..n {
                    acc += block[y * n + x]
                        * (pi * (2 * y + 1) as f64 * u as f64 / (2 * n) as f64).cos()
                        * (pi * (2 * x + 1) as f64 * v as f64 / (2 * n) as f64).cos();
                }
            }
            out[u * n + v] = scale(u) * scale(v) * acc;
        }
    }
    out
}

#[test]
fn dct_matches_direct_definition() {
    let mut rng = rng_from_seed(13);
    for n in [1usize, 3, 8] {
        for _ in 0..20 {
            let block: Vec<f64> = (0..n * n).map(|_| rng.random_range(0.0..255.0)).collect();
            let fast = dct2(&block, n);
            let slow = dct_direct(&block, n);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{a} vs {b}");
            }
            let back = idct2(&fast, n);
            for (a, b) in back.iter().zip(&block) {
                assert!((a - b).abs() <= 1e-9);
            }
            let energy: f64 = block.iter().map(|x| x * x).sum();
            let coef: f64 = fast.iter().map(|x| x * x).sum();
            assert_relative_eq!(energy, coef, max_relative = 1e-9);
        }
    }
}
