//! Outlier culling and image-to-feature extraction.

mod density;
mod dct;
mod image;
mod moments;

pub use density::{density_cull, density_scores, knn_distances, DEFAULT_CULL_NEIGHBORS, DEFAULT_CULL_QUANTILE};
pub use dct::{dct2, dct_features, idct2, zigzag_order, DEFAULT_DCT_COEFFS, DEFAULT_DCT_WINDOW};
pub use image::{two_texture_image, GrayImage};
pub use moments::{moment_features, window_moments, DEFAULT_MOMENT_WINDOW, DEFAULT_WINDOWS};
