use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::{squared_distance, Scalar};

pub const DEFAULT_CULL_NEIGHBORS: usize = 10;
pub const DEFAULT_CULL_QUANTILE: f64 = 0.15;

/// Distance from each point to its `m`-th nearest other point.
pub fn knn_distances<T: Scalar>(data: &Dataset<T>, m: usize) -> Result<Vec<T>> {
    if m == 0 || m >= data.len() {
        return Err(Error::Precondition(format!(
            "neighbour count m = {m} must satisfy 1 <= m < N = {}",
            data.len()
        )));
    }
    Ok((0..data.len())
        .into_par_iter()
        .map(|i| {
            let p = data.point(i);
            let mut d: Vec<T> = data
                .points()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| squared_distance(p, q))
                .collect();
            let (_, nth, _) = d.select_nth_unstable_by(m - 1, |a, b| a.partial_cmp(b).expect("finite"));
            nth.sqrt()
        })
        .collect())
}

/// Local density `1 / r_m^d`, with `r_m` the `m`-th neighbour distance.
pub fn density_scores<T: Scalar>(data: &Dataset<T>, m: usize) -> Result<Vec<T>> {
    let d = T::from_count(data.dim());
    Ok(knn_distances(data, m)?
        .into_iter()
        .map(|r| T::one() / r.powf(d))
        .collect())
}

/// Removes the `⌊q N⌋` points of lowest density (ties: lower index first)
/// and returns the survivors in their original order.
///
/// Points are ranked by `m`-th neighbour distance, which orders densities
/// identically without overflowing `r^d` in high dimension.
pub fn density_cull<T: Scalar>(data: &Dataset<T>, m: usize, quantile: f64) -> Result<Dataset<T>> {
    if !(0.0..1.0).contains(&quantile) {
        return Err(Error::Domain(format!("quantile must lie in [0, 1), got {quantile}")));
    }
    let radii = knn_distances(data, m)?;
    let remove = (quantile * data.len() as f64).floor() as usize;
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| {
        radii[b]
            .partial_cmp(&radii[a])
            .expect("finite")
            .then(a.cmp(&b))
    });
    let mut keep = vec![true; data.len()];
    for &i in &order[..remove] {
        keep[i] = false;
    }
    let survivors: Vec<usize> = (0..data.len()).filter(|&i| keep[i]).collect();
    data.select(&survivors)
}
