//! Penalized k-means errors and the cluster-count estimation procedure.
//!
//! The additive procedure assumes each `K = 2, 3, ...` in turn, derives λ
//! from the sweep's `k = K` partition, and asks whether the additive curve
//! attains its minimum at that same `K`. The multiplicative curve `f(k) E_k`
//! needs no coefficient; its interior local minima are candidates. The
//! consensus of the two candidate sets resolves ambiguous cases.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kmeans::{min_intercentroid_distance, sweep, ClusterAssignment, SweepAlgorithm, DEFAULT_MAX_ITERATIONS};
use crate::penalty::Penalty;
use crate::scalar::Scalar;

pub fn penalty_value<T: Scalar>(penalty: Penalty<T>, k: usize, dim: usize) -> T {
    penalty.value(k, dim)
}

/// `E_k + λ f(k)` for `k = k_min, k_min + 1, ...`.
pub fn additive_curve<T: Scalar>(errors: &[T], lambda: T, penalty: Penalty<T>, k_min: usize, dim: usize) -> Vec<T> {
    errors
        .iter()
        .enumerate()
        .map(|(i, &e)| e + lambda * penalty.value(k_min + i, dim))
        .collect()
}

/// `f(k) E_k` for `k = k_min, k_min + 1, ...`.
pub fn multiplicative_curve<T: Scalar>(errors: &[T], penalty: Penalty<T>, k_min: usize, dim: usize) -> Vec<T> {
    errors
        .iter()
        .enumerate()
        .map(|(i, &e)| penalty.value(k_min + i, dim) * e)
        .collect()
}

/// `k` of the smallest value; ties go to the smallest `k`.
pub fn argmin<T: Scalar>(curve: &[T], k_min: usize) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, &v) in curve.iter().enumerate() {
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| k_min + i)
}

/// Strict interior local minima. A run of equal values counts once, at its
/// left edge, when it is strictly below both neighbouring values.
pub fn local_minima<T: Scalar>(curve: &[T], k_min: usize) -> Result<BTreeSet<usize>> {
    if curve.len() < 3 {
        return Err(Error::Precondition(format!(
            "local minima need at least 3 values, got {}",
            curve.len()
        )));
    }
    let mut out = BTreeSet::new();
    let mut start = 0;
    while start < curve.len() {
        let mut end = start;
        while end + 1 < curve.len() && curve[end + 1] == curve[start] {
            end += 1;
        }
        if start > 0 && end + 1 < curve.len() && curve[start] < curve[start - 1] && curve[start] < curve[end + 1] {
            out.insert(k_min + start);
        }
        start = end + 1;
    }
    Ok(out)
}

/// How λ is chosen for each assumed `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum LambdaMode<T> {
    /// `N L² / (4 K (f(K) - f(K-1)))`: the interval midpoint without the `ρ²`
    /// term, which is `N L² / 4K` for the linear penalty.
    Midpoint,
    /// The same λ for every assumed `K`.
    Explicit(T),
}

impl<T> Default for LambdaMode<T> {
    fn default() -> Self {
        LambdaMode::Midpoint
    }
}

pub fn midpoint_lambda<T: Scalar>(penalty: Penalty<T>, n_points: usize, k: usize, separation: T, dim: usize) -> T {
    let inc = penalty.increment(k, dim);
    T::from_count(n_points) * separation * separation / (T::lit(4.0) * T::from_count(k) * inc)
}

/// One row of the "estimated vs. assumed" table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry<T> {
    pub assumed: usize,
    pub estimated: usize,
    pub lambda: T,
    /// Smallest inter-centroid distance of the assumed-`K` partition.
    pub separation: T,
    /// Additive curve over `k = 2..=k_max`.
    pub curve: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditiveEstimate<T> {
    pub candidates: BTreeSet<usize>,
    pub trace: Vec<TraceEntry<T>>,
}

/// Runs the assumed-vs-estimated loop over an existing sweep.
///
/// `assignments[i]` must hold the `k = i + 1` partition, `k_max =
/// assignments.len() >= 3`. Assumed `K` ranges over `2..k_max`; estimated
/// `k` over `2..=k_max`.
pub fn additive_trace<T: Scalar>(
    assignments: &[ClusterAssignment<T>],
    n_points: usize,
    dim: usize,
    penalty: Penalty<T>,
    lambda_mode: LambdaMode<T>,
) -> Result<AdditiveEstimate<T>> {
    let k_max = assignments.len();
    if k_max < 3 {
        return Err(Error::Precondition(format!("k_max must be >= 3, got {k_max}")));
    }
    if let Some((i, a)) = assignments.iter().enumerate().find(|(i, a)| a.k != i + 1) {
        return Err(Error::Shape(format!("assignment {i} has k = {}, expected {}", a.k, i + 1)));
    }
    let errors: Vec<T> = assignments[1..].iter().map(|a| a.error).collect();
    let mut trace = Vec::with_capacity(k_max - 2);
    let mut candidates = BTreeSet::new();
    for assumed in 2..k_max {
        let separation = min_intercentroid_distance(&assignments[assumed - 1].centroids)?;
        let lambda = match lambda_mode {
            LambdaMode::Midpoint => midpoint_lambda(penalty, n_points, assumed, separation, dim),
            LambdaMode::Explicit(l) => l,
        };
        let curve = additive_curve(&errors, lambda, penalty, 2, dim);
        let estimated = argmin(&curve, 2).expect("non-empty curve");
        if estimated == assumed {
            candidates.insert(assumed);
        }
        trace.push(TraceEntry {
            assumed,
            estimated,
            lambda,
            separation,
            curve,
        });
    }
    Ok(AdditiveEstimate { candidates, trace })
}

/// Sweeps `data` with `algorithm` and runs the linear additive procedure
/// with midpoint λ.
pub fn estimate_k_additive<T: Scalar>(
    data: &Dataset<T>,
    k_max: usize,
    algorithm: SweepAlgorithm,
) -> Result<AdditiveEstimate<T>> {
    if k_max < 3 {
        return Err(Error::Precondition(format!("k_max must be >= 3, got {k_max}")));
    }
    let assignments = sweep(data, algorithm, k_max, DEFAULT_MAX_ITERATIONS)?;
    additive_trace(&assignments, data.len(), data.dim(), Penalty::Linear, LambdaMode::Midpoint)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "k", rename_all = "snake_case")]
pub enum Verdict {
    Unique(usize),
    Ambiguous(BTreeSet<usize>),
    NoConsensus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub additive_candidates: BTreeSet<usize>,
    pub multiplicative_minima: BTreeSet<usize>,
    pub consensus: BTreeSet<usize>,
    pub verdict: Verdict,
}

pub fn consensus(additive: &BTreeSet<usize>, multiplicative: &BTreeSet<usize>) -> CandidateReport {
    let agreed: BTreeSet<usize> = additive.intersection(multiplicative).copied().collect();
    let verdict = match agreed.len() {
        0 => Verdict::NoConsensus,
        1 => Verdict::Unique(*agreed.first().expect("singleton")),
        _ => Verdict::Ambiguous(agreed.clone()),
    };
    CandidateReport {
        additive_candidates: additive.clone(),
        multiplicative_minima: multiplicative.clone(),
        consensus: agreed,
        verdict,
    }
}

/// Krzanowski–Lai choice: the interior `k` maximizing
/// `(M_{k-1} - M_k) / (M_k - M_{k+1})` with `M_k = k^(2/d) E_k`. A
/// non-positive denominator excludes `k`; ties go to the smallest `k`.
pub fn kl_best_k<T: Scalar>(errors: &[T], dim: usize, k_min: usize) -> Result<usize> {
    if errors.len() < 3 {
        return Err(Error::Precondition(format!(
            "Krzanowski–Lai needs at least 3 errors, got {}",
            errors.len()
        )));
    }
    let m = multiplicative_curve(errors, Penalty::KrzanowskiLai, k_min, dim);
    let mut best: Option<(usize, T)> = None;
    for i in 1..m.len() - 1 {
        let den = m[i] - m[i + 1];
        if !(den > T::zero()) {
            continue;
        }
        let ratio = (m[i - 1] - m[i]) / den;
        if best.is_none_or(|(_, b)| ratio > b) {
            best = Some((k_min + i, ratio));
        }
    }
    best.map(|(k, _)| k)
        .ok_or_else(|| Error::NoAnswer("every Krzanowski–Lai ratio has a non-positive denominator".into()))
}

/// A penalized curve over a contiguous `k` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltySweep<T> {
    pub k_min: usize,
    pub k_max: usize,
    pub errors: Vec<T>,
    pub penalized: Vec<T>,
    pub kind: SweepKind<T>,
    pub algorithm: SweepAlgorithm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepKind<T> {
    Additive { lambda: T, penalty: Penalty<T> },
    Multiplicative { penalty: Penalty<T> },
    KrzanowskiLai { dim: usize },
}

impl<T: Scalar> PenaltySweep<T> {
    /// Builds the penalized curve of `kind` over `errors` starting at `k_min`.
    pub fn new(errors: Vec<T>, k_min: usize, kind: SweepKind<T>, algorithm: SweepAlgorithm, dim: usize) -> Result<Self> {
        if errors.is_empty() {
            return Err(Error::Precondition("empty error sequence".into()));
        }
        if errors.iter().any(|e| !(*e >= T::zero())) {
            return Err(Error::Domain("clustering errors must be non-negative".into()));
        }
        let penalized = match kind {
            SweepKind::Additive { lambda, penalty } => additive_curve(&errors, lambda, penalty, k_min, dim),
            SweepKind::Multiplicative { penalty } => multiplicative_curve(&errors, penalty, k_min, dim),
            SweepKind::KrzanowskiLai { dim } => multiplicative_curve(&errors, Penalty::KrzanowskiLai, k_min, dim),
        };
        Ok(Self {
            k_min,
            k_max: k_min + errors.len() - 1,
            errors,
            penalized,
            kind,
            algorithm,
        })
    }
}

/// Settings of a full estimation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig<T> {
    pub k_max: usize,
    pub algorithm: SweepAlgorithm,
    pub penalty: Penalty<T>,
    pub lambda_mode: LambdaMode<T>,
    pub max_iterations: usize,
}

impl<T> EstimateConfig<T> {
    pub fn new(k_max: usize, algorithm: SweepAlgorithm) -> Self {
        Self {
            k_max,
            algorithm,
            penalty: Penalty::Linear,
            lambda_mode: LambdaMode::Midpoint,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

/// Everything one algorithm's run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimation<T> {
    pub config: EstimateConfig<T>,
    pub assignments: Vec<ClusterAssignment<T>>,
    /// `E_k` for `k = 1..=k_max`.
    pub errors: Vec<T>,
    /// Multiplicative curve for `k = 1..=k_max`.
    pub multiplicative: Vec<T>,
    pub additive: AdditiveEstimate<T>,
    pub report: CandidateReport,
    /// Present when the penalty is Krzanowski–Lai and the criterion has an answer.
    pub kl_best_k: Option<usize>,
}

impl<T: Scalar> Estimation<T> {
    /// `k = 1..=k_max` sweep of `kind`.
    pub fn penalty_sweep(&self, kind: SweepKind<T>, dim: usize) -> Result<PenaltySweep<T>> {
        PenaltySweep::new(self.errors.clone(), 1, kind, self.config.algorithm, dim)
    }
}

/// Sweep, additive procedure, multiplicative minima and their consensus.
pub fn estimate<T: Scalar>(data: &Dataset<T>, config: EstimateConfig<T>) -> Result<Estimation<T>> {
    if config.k_max < 3 {
        return Err(Error::Precondition(format!("k_max must be >= 3, got {}", config.k_max)));
    }
    config.penalty.validate()?;
    let assignments = sweep(data, config.algorithm, config.k_max, config.max_iterations)?;
    let dim = data.dim();
    let errors: Vec<T> = assignments.iter().map(|a| a.error).collect();
    let multiplicative = multiplicative_curve(&errors, config.penalty, 1, dim);
    let additive = additive_trace(&assignments, data.len(), dim, config.penalty, config.lambda_mode)?;
    let minima = local_minima(&multiplicative, 1)?;
    let report = consensus(&additive.candidates, &minima);
    let kl_best_k = match config.penalty {
        Penalty::KrzanowskiLai => kl_best_k(&errors, dim, 1).ok(),
        _ => None,
    };
    Ok(Estimation {
        config,
        assignments,
        errors,
        multiplicative,
        additive,
        report,
        kl_best_k,
    })
}
