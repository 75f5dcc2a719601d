//! Lloyd iteration and the two deterministic farthest-point sweeps.
//!
//! Both sweeps run Lloyd for every `k` in `1..=k_max`. They differ in what
//! the next seed is measured against:
//!
//! * [`sweep_algorithm1`] grows a chain of saved data points starting at the
//!   point closest to the origin; the seed added at step `M` is the point
//!   farthest (max-min distance) from the `M - 1` saved *initial* points.
//!   Every `k` restarts Lloyd from the first `k` saved points.
//! * [`sweep_algorithm2`] starts at the point closest to the global mean and
//!   seeds step `M` with the `M - 1` *converged* centroids of step `M - 1`
//!   plus the data point farthest from them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::{squared_distance, Scalar};

pub const DEFAULT_MAX_ITERATIONS: usize = 500;

/// Outcome of one Lloyd run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment<T> {
    pub k: usize,
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<T>>,
    pub counts: Vec<usize>,
    /// Within-cluster sum of squares `E_k`.
    pub error: T,
    /// Lloyd rounds, counting the initial assignment.
    pub iterations: usize,
    /// `false` when the iteration cap was hit before memberships settled.
    pub converged: bool,
    /// Dataset indices of the seed points chosen by the sweep, one per step.
    pub initial_centroid_indices: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAlgorithm {
    Alg1,
    Alg2,
}

impl SweepAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            SweepAlgorithm::Alg1 => "alg1",
            SweepAlgorithm::Alg2 => "alg2",
        }
    }
}

/// `Σ_j Σ_{x ∈ C_j} ‖x - c_j‖²`.
pub fn within_cluster_error<T: Scalar, C: AsRef<[T]>>(
    data: &Dataset<T>,
    labels: &[usize],
    centroids: &[C],
) -> Result<T> {
    if labels.len() != data.len() {
        return Err(Error::Shape(format!(
            "{} labels for {} points",
            labels.len(),
            data.len()
        )));
    }
    if let Some(c) = centroids.iter().find(|c| c.as_ref().len() != data.dim()) {
        return Err(Error::Shape(format!(
            "centroid of dimension {} for data of dimension {}",
            c.as_ref().len(),
            data.dim()
        )));
    }
    data.points()
        .zip(labels)
        .map(|(p, &l)| {
            centroids
                .get(l)
                .map(|c| squared_distance(p, c.as_ref()))
                .ok_or_else(|| Error::Shape(format!("label {l} has no centroid")))
        })
        .sum()
}

/// Index of the nearest centroid; ties go to the lowest index.
#[inline]
fn nearest<T: Scalar>(point: &[T], centroids: &[Vec<T>]) -> (usize, T) {
    let mut best = (0, squared_distance(point, &centroids[0]));
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = squared_distance(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

const PARALLEL_ASSIGN_WORK: usize = 1 << 16;

fn assign<T: Scalar>(data: &Dataset<T>, centroids: &[Vec<T>], labels: &mut [usize]) {
    let dim = data.dim();
    if data.len() * centroids.len() * dim >= PARALLEL_ASSIGN_WORK {
        labels
            .par_iter_mut()
            .zip(data.coords().par_chunks_exact(dim))
            .for_each(|(l, p)| *l = nearest(p, centroids).0);
    } else {
        for (l, p) in labels.iter_mut().zip(data.points()) {
            *l = nearest(p, centroids).0;
        }
    }
}

/// Gives every empty cluster the point farthest from its current centroid
/// among clusters that can spare one.
fn repair_empty<T: Scalar>(data: &Dataset<T>, centroids: &[Vec<T>], labels: &mut [usize]) {
    let k = centroids.len();
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    for j in 0..k {
        if counts[j] > 0 {
            continue;
        }
        let mut best: Option<(usize, T)> = None;
        for (i, p) in data.points().enumerate() {
            let l = labels[i];
            if counts[l] <= 1 {
                continue;
            }
            let d = squared_distance(p, &centroids[l]);
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        // k <= N guarantees some cluster holds two or more points
        let (i, _) = best.expect("k <= N");
        counts[labels[i]] -= 1;
        labels[i] = j;
        counts[j] = 1;
    }
}

fn means<T: Scalar>(data: &Dataset<T>, labels: &[usize], k: usize) -> (Vec<Vec<T>>, Vec<usize>) {
    let dim = data.dim();
    let mut sums = vec![vec![T::zero(); dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in data.points().zip(labels) {
        counts[l] += 1;
        for (s, &x) in sums[l].iter_mut().zip(p) {
            *s = *s + x;
        }
    }
    for (s, &n) in sums.iter_mut().zip(&counts) {
        let n = T::from_count(n.max(1));
        s.iter_mut().for_each(|x| *x = *x / n);
    }
    (sums, counts)
}

fn check_k<T: Scalar>(data: &Dataset<T>, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Precondition("k must be >= 1".into()));
    }
    if k > data.len() {
        return Err(Error::Infeasible(format!(
            "k = {k} exceeds the number of points N = {}",
            data.len()
        )));
    }
    Ok(())
}

fn lloyd_impl<T: Scalar>(
    data: &Dataset<T>,
    initial_centroids: Vec<Vec<T>>,
    max_iterations: usize,
    mut trace: Option<&mut Vec<T>>,
) -> Result<ClusterAssignment<T>> {
    let k = initial_centroids.len();
    check_k(data, k)?;
    if max_iterations == 0 {
        return Err(Error::Precondition("max_iterations must be >= 1".into()));
    }
    if initial_centroids.iter().any(|c| c.len() != data.dim()) {
        return Err(Error::Shape("initial centroid dimension does not match data".into()));
    }

    let n = data.len();
    let mut labels = vec![0usize; n];
    assign(data, &initial_centroids, &mut labels);
    repair_empty(data, &initial_centroids, &mut labels);
    let (mut centroids, mut counts) = means(data, &labels, k);
    let mut iterations = 1;
    if let Some(t) = trace.as_deref_mut() {
        t.push(within_cluster_error(data, &labels, &centroids)?);
    }

    let mut next = vec![0usize; n];
    let converged = loop {
        assign(data, &centroids, &mut next);
        repair_empty(data, &centroids, &mut next);
        if next == labels {
            break true;
        }
        if iterations >= max_iterations {
            break false;
        }
        std::mem::swap(&mut labels, &mut next);
        (centroids, counts) = means(data, &labels, k);
        iterations += 1;
        if let Some(t) = trace.as_deref_mut() {
            t.push(within_cluster_error(data, &labels, &centroids)?);
        }
    };

    let error = within_cluster_error(data, &labels, &centroids)?;
    Ok(ClusterAssignment {
        k,
        labels,
        centroids,
        counts,
        error,
        iterations,
        converged,
        initial_centroid_indices: Vec::new(),
    })
}

/// Hard-EM Lloyd iteration until memberships no longer change.
pub fn lloyd<T: Scalar>(
    data: &Dataset<T>,
    initial_centroids: Vec<Vec<T>>,
    max_iterations: usize,
) -> Result<ClusterAssignment<T>> {
    lloyd_impl(data, initial_centroids, max_iterations, None)
}

/// [`lloyd`], also returning the error after every centroid update.
pub fn lloyd_traced<T: Scalar>(
    data: &Dataset<T>,
    initial_centroids: Vec<Vec<T>>,
    max_iterations: usize,
) -> Result<(ClusterAssignment<T>, Vec<T>)> {
    let mut trace = Vec::new();
    let a = lloyd_impl(data, initial_centroids, max_iterations, Some(&mut trace))?;
    Ok((a, trace))
}

/// Index of the point nearest to `target`; ties go to the lowest index.
pub fn closest_point<T: Scalar>(data: &Dataset<T>, target: &[T]) -> usize {
    let mut best = (0, squared_distance(data.point(0), target));
    for (i, p) in data.points().enumerate().skip(1) {
        let d = squared_distance(p, target);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Index of the point maximizing its minimum distance to `references`;
/// ties go to the lowest index.
pub fn farthest_point<T: Scalar, R: AsRef<[T]>>(data: &Dataset<T>, references: &[R]) -> Result<usize> {
    if references.is_empty() {
        return Err(Error::Precondition("farthest point needs at least one reference".into()));
    }
    if references.iter().any(|r| r.as_ref().len() != data.dim()) {
        return Err(Error::Shape("reference dimension does not match data".into()));
    }
    let mut best = (0, T::neg_infinity());
    for (i, p) in data.points().enumerate() {
        let d = references
            .iter()
            .map(|r| squared_distance(p, r.as_ref()))
            .fold(T::infinity(), T::min);
        if d > best.1 {
            best = (i, d);
        }
    }
    Ok(best.0)
}

/// The saved-seed chain of Algorithm 1: the origin-closest point followed by
/// successive farthest points from all previously saved points.
pub fn farthest_point_chain<T: Scalar>(data: &Dataset<T>, len: usize) -> Result<Vec<usize>> {
    check_k(data, len)?;
    let origin = vec![T::zero(); data.dim()];
    let first = closest_point(data, &origin);
    let mut chain = vec![first];
    let mut min_d: Vec<T> = data
        .points()
        .map(|p| squared_distance(p, data.point(first)))
        .collect();
    while chain.len() < len {
        let mut best = (0, T::neg_infinity());
        for (i, &d) in min_d.iter().enumerate() {
            if d > best.1 {
                best = (i, d);
            }
        }
        let seed = best.0;
        chain.push(seed);
        let s = data.point(seed);
        for (m, p) in min_d.iter_mut().zip(data.points()) {
            *m = m.min(squared_distance(p, s));
        }
    }
    Ok(chain)
}

/// Algorithm 1: Lloyd for each `k = 1..=k_max` from the first `k` points of
/// the saved farthest-point chain. Runs for different `k` execute in
/// parallel; the output does not depend on scheduling.
pub fn sweep_algorithm1<T: Scalar>(
    data: &Dataset<T>,
    k_max: usize,
    max_iterations: usize,
) -> Result<Vec<ClusterAssignment<T>>> {
    let chain = farthest_point_chain(data, k_max)?;
    (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let seeds = &chain[..k];
            let init = seeds.iter().map(|&i| data.point(i).to_vec()).collect();
            let mut a = lloyd(data, init, max_iterations)?;
            a.initial_centroid_indices = seeds.to_vec();
            Ok(a)
        })
        .collect()
}

/// Algorithm 2: starts at the point closest to the global mean; step `M`
/// reuses the converged centroids of step `M - 1` and adds the point
/// farthest from them.
pub fn sweep_algorithm2<T: Scalar>(
    data: &Dataset<T>,
    k_max: usize,
    max_iterations: usize,
) -> Result<Vec<ClusterAssignment<T>>> {
    check_k(data, k_max)?;
    let first = closest_point(data, &data.mean());
    let mut seeds = vec![first];
    let mut out: Vec<ClusterAssignment<T>> = Vec::with_capacity(k_max);
    let mut a = lloyd(data, vec![data.point(first).to_vec()], max_iterations)?;
    a.initial_centroid_indices = seeds.clone();
    out.push(a);
    for _ in 2..=k_max {
        let prev = &out.last().expect("non-empty").centroids;
        let seed = farthest_point(data, prev)?;
        seeds.push(seed);
        let mut init = prev.clone();
        init.push(data.point(seed).to_vec());
        let mut a = lloyd(data, init, max_iterations)?;
        a.initial_centroid_indices = seeds.clone();
        out.push(a);
    }
    Ok(out)
}

pub fn sweep<T: Scalar>(
    data: &Dataset<T>,
    algorithm: SweepAlgorithm,
    k_max: usize,
    max_iterations: usize,
) -> Result<Vec<ClusterAssignment<T>>> {
    match algorithm {
        SweepAlgorithm::Alg1 => sweep_algorithm1(data, k_max, max_iterations),
        SweepAlgorithm::Alg2 => sweep_algorithm2(data, k_max, max_iterations),
    }
}

/// Smallest pairwise Euclidean distance between centroids.
pub fn min_intercentroid_distance<T: Scalar, C: AsRef<[T]>>(centroids: &[C]) -> Result<T> {
    if centroids.len() < 2 {
        return Err(Error::Precondition(format!(
            "need at least 2 centroids, got {}",
            centroids.len()
        )));
    }
    let mut best = T::infinity();
    for (i, a) in centroids.iter().enumerate() {
        for b in &centroids[i + 1..] {
            best = best.min(squared_distance(a.as_ref(), b.as_ref()));
        }
    }
    Ok(best.sqrt())
}

/// Fraction of labelled points whose cluster's majority true label matches
/// their own. Points with no true label are ignored.
pub fn purity(labels: &[usize], true_labels: &[Option<usize>]) -> f64 {
    use std::collections::HashMap;
    let mut table: HashMap<(usize, usize), usize> = HashMap::new();
    let mut total = 0usize;
    for (&l, t) in labels.iter().zip(true_labels) {
        if let Some(t) = *t {
            *table.entry((l, t)).or_default() += 1;
            total += 1;
        }
    }
    if total == 0 {
        return 1.0;
    }
    let mut best: HashMap<usize, usize> = HashMap::new();
    for (&(l, _), &c) in &table {
        let e = best.entry(l).or_default();
        *e = (*e).max(c);
    }
    best.values().sum::<usize>() as f64 / total as f64
}
