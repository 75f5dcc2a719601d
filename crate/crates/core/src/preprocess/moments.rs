use rand::Rng as _;

use super::image::GrayImage;
use crate::datagen::rng_from_seed;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_WINDOWS: usize = 2000;
pub const DEFAULT_MOMENT_WINDOW: usize = 9;

/// Mean, standard deviation and standardized central moments of orders 3
/// to 6. Higher moments are 0 when the deviation vanishes.
pub fn window_moments(values: &[f64]) -> [f64; 6] {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mut central = [0.0f64; 7];
    for &v in values {
        let d = v - mean;
        let mut p = d * d;
        for c in central.iter_mut().skip(2) {
            *c += p;
            p *= d;
        }
    }
    central.iter_mut().for_each(|c| *c /= n);
    let sd = central[2].sqrt();
    let mut out = [mean, sd, 0.0, 0.0, 0.0, 0.0];
    if sd > 0.0 {
        for r in 3..=6 {
            out[r - 1] = central[r] / sd.powi(r as i32);
        }
    }
    out
}

/// Six-moment features of `n_windows` randomly centered `window x window`
/// patches that lie fully inside the image.
pub fn moment_features<T: Scalar>(img: &GrayImage, n_windows: usize, window: usize, seed: u64) -> Result<Dataset<T>> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::Precondition(format!("moment window must be odd, got {window}")));
    }
    if window > img.width() || window > img.height() {
        return Err(Error::Precondition(format!(
            "{window}x{window} window does not fit a {}x{} image",
            img.width(),
            img.height()
        )));
    }
    if n_windows == 0 {
        return Err(Error::Precondition("at least one window is required".into()));
    }
    let half = window / 2;
    let mut rng = rng_from_seed(seed);
    let mut coords = Vec::with_capacity(n_windows * 6);
    for _ in 0..n_windows {
        let cx = rng.random_range(half..=img.width() - 1 - half);
        let cy = rng.random_range(half..=img.height() - 1 - half);
        let values = img.window(cx - half, cy - half, window);
        coords.extend(window_moments(&values).into_iter().map(T::lit));
    }
    Dataset::new(6, coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image() {
        let img = GrayImage::from_fn(20, 20, |_, _| 77).unwrap();
        let f = moment_features::<f64>(&img, 10, 9, 1).unwrap();
        assert!(f.points().all(|p| p == [77.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn known_moments() {
        // symmetric two-point distribution: skew 0, kurtosis 1
        let m = window_moments(&[0.0, 2.0, 0.0, 2.0]);
        assert_eq!(m, [1.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        let m = window_moments(&[0.0, 0.0, 0.0, 4.0]);
        // deviations -1, -1, -1, 3: μ2 = 3, μ3 = 6
        assert!((m[2] - 6.0 / 3.0f64.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn single_window_and_bad_sizes() {
        let img = GrayImage::from_fn(12, 10, |x, y| (x * y) as u8).unwrap();
        assert_eq!(moment_features::<f64>(&img, 1, 9, 3).unwrap().len(), 1);
        assert!(moment_features::<f64>(&img, 5, 8, 3).is_err());
        assert!(moment_features::<f64>(&img, 5, 11, 3).is_err());
        assert!(moment_features::<f64>(&img, 0, 9, 3).is_err());
    }

    #[test]
    fn brightness_shift_moves_only_the_mean() {
        let a = GrayImage::from_fn(30, 30, |x, y| ((x * 13 + y * 7) % 100) as u8).unwrap();
        let b = GrayImage::from_fn(30, 30, |x, y| ((x * 13 + y * 7) % 100 + 50) as u8).unwrap();
        let fa = moment_features::<f64>(&a, 50, 9, 4).unwrap();
        let fb = moment_features::<f64>(&b, 50, 9, 4).unwrap();
        for (pa, pb) in fa.points().zip(fb.points()) {
            assert!((pb[0] - pa[0] - 50.0).abs() < 1e-9);
            for j in 1..6 {
                assert!((pb[j] - pa[j]).abs() < 1e-9 * (1.0 + pa[j].abs()));
            }
        }
    }
}
