use rand::Rng as _;

use super::image::GrayImage;
use crate::datagen::rng_from_seed;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_DCT_WINDOW: usize = 8;
pub const DEFAULT_DCT_COEFFS: usize = 9;

/// `basis[u * n + x] = a(u) cos(π (2x + 1) u / 2n)`, orthonormal.
fn basis(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut b = Vec::with_capacity(n * n);
    for u in 0..n {
        let a = if u == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        for x in 0..n {
            b.push(a * (std::f64::consts::PI * (2 * x + 1) as f64 * u as f64 / (2.0 * nf)).cos());
        }
    }
    b
}

/// Orthonormal 2-D type-II DCT of a row-major `n x n` block. Output index
/// `u * n + v` holds vertical frequency `u` and horizontal frequency `v`.
pub fn dct2(block: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(block.len(), n * n, "block must be n x n");
    let b = basis(n);
    // rows: tmp[y][v] = Σ_x block[y][x] b[v][x]
    let mut tmp = vec![0.0; n * n];
    for y in 0..n {
        for v in 0..n {
            tmp[y * n + v] = (0..n).map(|x| block[y * n + x] * b[v * n + x]).sum();
        }
    }
    let mut out = vec![0.0; n * n];
    for u in 0..n {
        for v in 0..n {
            out[u * n + v] = (0..n).map(|y| tmp[y * n + v] * b[u * n + y]).sum();
        }
    }
    out
}

/// Inverse of [`dct2`] (orthonormal type-III).
pub fn idct2(coeffs: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(coeffs.len(), n * n, "coefficients must be n x n");
    let b = basis(n);
    let mut tmp = vec![0.0; n * n];
    for u in 0..n {
        for x in 0..n {
            tmp[u * n + x] = (0..n).map(|v| coeffs[u * n + v] * b[v * n + x]).sum();
        }
    }
    let mut out = vec![0.0; n * n];
    for y in 0..n {
        for x in 0..n {
            out[y * n + x] = (0..n).map(|u| tmp[u * n + x] * b[u * n + y]).sum();
        }
    }
    out
}

/// JPEG zig-zag scan of an `n x n` grid as `(row, col)` pairs, from DC.
pub fn zigzag_order(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * n);
    for s in 0..(2 * n).saturating_sub(1) {
        let lo = s.saturating_sub(n - 1);
        let hi = s.min(n - 1);
        if s % 2 == 0 {
            for row in (lo..=hi).rev() {
                out.push((row, s - row));
            }
        } else {
            for row in lo..=hi {
                out.push((row, s - row));
            }
        }
    }
    out
}

/// First `n_coeffs` zig-zag DCT coefficients of `n_windows` random
/// `window x window` patches.
pub fn dct_features<T: Scalar>(
    img: &GrayImage,
    n_windows: usize,
    window: usize,
    n_coeffs: usize,
    seed: u64,
) -> Result<Dataset<T>> {
    if window == 0 || window > img.width() || window > img.height() {
        return Err(Error::Precondition(format!(
            "{window}x{window} window does not fit a {}x{} image",
            img.width(),
            img.height()
        )));
    }
    if n_coeffs == 0 || n_coeffs > window * window {
        return Err(Error::Precondition(format!(
            "cannot keep {n_coeffs} coefficients of a {window}x{window} transform"
        )));
    }
    if n_windows == 0 {
        return Err(Error::Precondition("at least one window is required".into()));
    }
    let order: Vec<usize> = zigzag_order(window)
        .into_iter()
        .take(n_coeffs)
        .map(|(u, v)| u * window + v)
        .collect();
    let mut rng = rng_from_seed(seed);
    let mut coords = Vec::with_capacity(n_windows * n_coeffs);
    for _ in 0..n_windows {
        let x = rng.random_range(0..=img.width() - window);
        let y = rng.random_range(0..=img.height() - window);
        let c = dct2(&img.window(x, y, window), window);
        coords.extend(order.iter().map(|&i| T::lit(c[i])));
    }
    Dataset::new(n_coeffs, coords)
}
