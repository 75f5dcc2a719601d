//! Seeded synthesis of ideal-cluster datasets and their degradations.
//!
//! All randomness comes from [`Rng`], ChaCha with 8 rounds seeded through
//! `SeedableRng::seed_from_u64`. The stream is consumed in a fixed order
//! (all centers, then clusters one after another), so a spec and seed
//! determine the output bit for bit on every platform.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::{squared_distance, Scalar};

pub type Rng = ChaCha8Rng;

/// Identifier of the generator, recorded in dataset manifests.
pub const RNG_ID: &str = "chacha8/rand_chacha-0.9/seed_from_u64";

/// Center placement gives up after this many rejected candidates.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 1_000_000;

/// Side of the center box as a multiple of `min_distance · K^(1/d)`.
pub const BOX_SCALE: f64 = 2.0;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from the solid `d`-ball of radius `R` centered at the
/// origin: a normal direction scaled to radius `R u^(1/d)`.
pub fn sample_in_sphere<T: Scalar>(dim: usize, radius: T, rng: &mut Rng) -> Vec<T> {
    let mut dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    let u: f64 = rng.random();
    let r = radius.as_f64() * u.powf(1.0 / dim as f64);
    if norm > 0.0 {
        dir.iter_mut().for_each(|x| *x *= r / norm);
    }
    dir.into_iter().map(T::lit).collect()
}

/// Parameters of an ideal dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealSpec {
    pub dim: usize,
    pub clusters: usize,
    pub points_per_cluster: usize,
    pub radius: f64,
    /// Centers are at least `separation_factor · 2R` apart.
    pub separation_factor: f64,
    pub seed: u64,
}

impl IdealSpec {
    pub fn new(dim: usize, clusters: usize, points_per_cluster: usize, seed: u64) -> Self {
        Self {
            dim,
            clusters,
            points_per_cluster,
            radius: 1.0,
            separation_factor: 1.2,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.clusters == 0 || self.points_per_cluster == 0 {
            return Err(Error::Domain("dimension, cluster count and points per cluster must be >= 1".into()));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::Domain(format!("radius must be positive, got {}", self.radius)));
        }
        if !(self.separation_factor > 0.0) || !self.separation_factor.is_finite() {
            return Err(Error::Domain(format!(
                "separation factor must be positive, got {}",
                self.separation_factor
            )));
        }
        Ok(())
    }

    pub fn min_center_distance(&self) -> f64 {
        self.separation_factor * 2.0 * self.radius
    }
}

fn box_side(spec: &IdealSpec) -> f64 {
    BOX_SCALE * spec.min_center_distance() * (spec.clusters as f64).powf(1.0 / spec.dim as f64)
}

fn place_centers(spec: &IdealSpec, side: f64, rng: &mut Rng) -> Result<Vec<Vec<f64>>> {
    let min_d = spec.min_center_distance();
    let min_d2 = min_d * min_d;
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(spec.clusters);
    let mut attempts = 0usize;
    while centers.len() < spec.clusters {
        let candidate: Vec<f64> = (0..spec.dim).map(|_| rng.random::<f64>() * side).collect();
        if centers.iter().all(|c| squared_distance(c, &candidate) >= min_d2) {
            centers.push(candidate);
            continue;
        }
        attempts += 1;
        if attempts >= MAX_PLACEMENT_ATTEMPTS {
            return Err(Error::Infeasible(format!(
                "could not place {} centers {min_d} apart after {MAX_PLACEMENT_ATTEMPTS} attempts",
                spec.clusters
            )));
        }
    }
    Ok(centers)
}

/// Ideal dataset with ground-truth labels and sphere centers.
pub fn generate_ideal<T: Scalar>(spec: &IdealSpec) -> Result<Dataset<T>> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let centers = place_centers(spec, box_side(spec), &mut rng)?;
    let n = spec.clusters * spec.points_per_cluster;
    let mut coords = Vec::with_capacity(n * spec.dim);
    let mut labels = Vec::with_capacity(n);
    for (j, c) in centers.iter().enumerate() {
        for _ in 0..spec.points_per_cluster {
            let offset: Vec<f64> = sample_in_sphere(spec.dim, spec.radius, &mut rng);
            coords.extend(c.iter().zip(&offset).map(|(&a, &b)| T::lit(a + b)));
            labels.push(Some(j));
        }
    }
    let centroids = centers
        .into_iter()
        .map(|c| c.into_iter().map(T::lit).collect())
        .collect();
    Dataset::new(spec.dim, coords)?
        .with_labels(labels)?
        .with_centroids(centroids)
}

/// Contracts cluster centers toward the global mean `g` by `factor`,
/// translating each cluster rigidly: `x ↦ g + factor (m_j - g) + (x - m_j)`.
/// Points without a true label are left in place.
pub fn rescale_separation<T: Scalar>(data: &Dataset<T>, factor: T) -> Result<Dataset<T>> {
    if !(factor >= T::zero() && factor <= T::one()) {
        return Err(Error::Domain(format!("factor must lie in [0, 1], got {factor}")));
    }
    let (Some(labels), Some(centroids)) = (data.true_labels(), data.true_centroids()) else {
        return Err(Error::Precondition("rescaling needs true labels and centroids".into()));
    };
    let labels = labels.to_vec();
    let g = data.mean();
    let moved: Vec<Vec<T>> = centroids
        .iter()
        .map(|m| m.iter().zip(&g).map(|(&mi, &gi)| gi + factor * (mi - gi)).collect())
        .collect();
    let dim = data.dim();
    let mut out = data.clone();
    for (row, label) in out.coords_mut().chunks_exact_mut(dim).zip(&labels) {
        let Some(j) = *label else { continue };
        let m = centroids
            .get(j)
            .ok_or_else(|| Error::Shape(format!("label {j} has no true centroid")))?;
        for ((x, &mi), &ni) in row.iter_mut().zip(m).zip(&moved[j]) {
            *x = ni + (*x - mi);
        }
    }
    out.with_centroids(moved)
}

/// Appends `count` points uniform over the bounding box grown by 10% of its
/// extent (5% per side). Appended points are labelled as outliers.
pub fn add_outliers<T: Scalar>(data: &Dataset<T>, count: usize, seed: u64) -> Dataset<T> {
    let mut rng = rng_from_seed(seed);
    let bounds: Vec<(f64, f64)> = data
        .bounding_box()
        .into_iter()
        .map(|(lo, hi)| {
            let (lo, hi) = (lo.as_f64(), hi.as_f64());
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        })
        .collect();
    let mut coords = Vec::with_capacity(count * data.dim());
    for _ in 0..count {
        coords.extend(
            bounds
                .iter()
                .map(|&(lo, hi)| T::lit(lo + rng.random::<f64>() * (hi - lo))),
        );
    }
    let mut out = data.clone();
    out.extend(&coords, None);
    out
}

/// Sidecar written next to a generated dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub rng: String,
    pub spec: Option<IdealSpec>,
    pub true_centroids: Option<Vec<Vec<f64>>>,
    /// Ground-truth label per row, `-1` for outliers.
    pub labels: Option<Vec<i64>>,
}

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

impl Manifest {
    pub fn describe<T: Scalar>(data: &Dataset<T>, spec: Option<IdealSpec>) -> Self {
        Self {
            schema_version: MANIFEST_SCHEMA_VERSION,
            rng: RNG_ID.to_string(),
            spec,
            true_centroids: data
                .true_centroids()
                .map(|cs| cs.iter().map(|c| c.iter().map(|x| x.as_f64()).collect()).collect()),
            labels: data
                .true_labels()
                .map(|ls| ls.iter().map(|l| l.map_or(-1, |v| v as i64)).collect()),
        }
    }

    /// Re-attaches the manifest's ground truth to `data`.
    pub fn apply<T: Scalar>(&self, data: Dataset<T>) -> Result<Dataset<T>> {
        let mut data = data.without_truth();
        if let Some(labels) = &self.labels {
            let labels = labels
                .iter()
                .map(|&l| if l < 0 { None } else { Some(l as usize) })
                .collect();
            data = data.with_labels(labels)?;
        }
        if let Some(cs) = &self.true_centroids {
            data = data.with_centroids(cs.iter().map(|c| c.iter().map(|&x| T::lit(x)).collect()).collect())?;
        }
        Ok(data)
    }
}
