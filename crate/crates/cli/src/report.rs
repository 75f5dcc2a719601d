//! The `estimate` report and its plot-ready curve table.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use kreg::kmeans::purity;
use kreg::regularization::{argmin, penalty_value};
use kreg::{Dataset64, Estimation64, LambdaMode, Penalty, Verdict};

use crate::CliError;

/// Bumped whenever a field is renamed, removed or changes meaning.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Deterministic record of one algorithm's estimation run. Everything
/// except [`RunReport::metadata`] depends only on inputs and flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub library_version: String,
    pub input: InputDescriptor,
    pub config: ConfigEcho,
    /// Inclusive `[1, k_max]`.
    pub k_range: [usize; 2],
    pub per_k: Vec<PerK>,
    pub additive_trace: Vec<TraceRow>,
    pub additive_candidates: BTreeSet<usize>,
    pub multiplicative_minima: BTreeSet<usize>,
    /// Global minimum of the multiplicative curve over `k = 2..=k_max`.
    pub multiplicative_argmin: Option<usize>,
    pub consensus: BTreeSet<usize>,
    pub verdict: Verdict,
    /// Only present for the `kl` penalty.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kl_best_k: Option<usize>,
    /// Timing and environment; omitted in reproducible mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDescriptor {
    /// `iris` or the path as given on the command line.
    pub source: String,
    pub header: bool,
    pub n_points: usize,
    pub dim: usize,
    pub has_ground_truth: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub algorithm: String,
    pub k_max: usize,
    pub penalty: Penalty<f64>,
    pub lambda_mode: LambdaMode<f64>,
    pub max_iterations: usize,
    pub tie_rule: String,
    pub plateau_rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerK {
    pub k: usize,
    /// `E_k`
    pub error: f64,
    /// `f(k) E_k`
    pub multiplicative: f64,
    /// `E_k + λ_K f(k)` for assumed `K = 2, 3, ..., k_max - 1`.
    pub additive: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub counts: Vec<usize>,
    /// Label purity against ground truth, when available.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub assumed: usize,
    pub estimated: usize,
    pub lambda: f64,
    pub separation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub elapsed_seconds: f64,
    pub threads: usize,
    pub unix_time_seconds: u64,
}

impl Metadata {
    pub fn capture(elapsed: Duration) -> Self {
        Self {
            elapsed_seconds: elapsed.as_secs_f64(),
            threads: rayon::current_num_threads(),
            unix_time_seconds: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }
}

/// `E_k + λ_K f(k)` for every assumed `K` (outer) and `k = 1..=k_max` (inner).
fn additive_columns(est: &Estimation64, dim: usize) -> Vec<Vec<f64>> {
    let penalty = est.config.penalty;
    est.additive
        .trace
        .iter()
        .map(|t| {
            est.errors
                .iter()
                .enumerate()
                .map(|(i, e)| e + t.lambda * penalty_value(penalty, i + 1, dim))
                .collect()
        })
        .collect()
}

impl RunReport {
    pub fn build(source: &str, header: bool, data: &Dataset64, est: &Estimation64) -> Result<Self, CliError> {
        let dim = data.dim();
        let columns = additive_columns(est, dim);
        let truth = data.true_labels();
        let per_k: Vec<PerK> = est
            .assignments
            .iter()
            .enumerate()
            .map(|(i, a)| PerK {
                k: a.k,
                error: a.error,
                multiplicative: est.multiplicative[i],
                additive: columns.iter().map(|c| c[i]).collect(),
                iterations: a.iterations,
                converged: a.converged,
                counts: a.counts.clone(),
                purity: truth.map(|t| purity(&a.labels, t)),
            })
            .collect();
        let all_finite = per_k
            .iter()
            .all(|r| r.error.is_finite() && r.multiplicative.is_finite() && r.additive.iter().all(|x| x.is_finite()));
        if !all_finite {
            return Err(CliError::Data(format!(
                "penalty `{}` overflows for k <= {}",
                est.config.penalty, est.config.k_max
            )));
        }
        let k_max = est.config.k_max;
        Ok(Self {
            schema_version: REPORT_SCHEMA_VERSION,
            library_version: kreg::VERSION.to_string(),
            input: InputDescriptor {
                source: source.to_string(),
                header,
                n_points: data.len(),
                dim,
                has_ground_truth: truth.is_some(),
            },
            config: ConfigEcho {
                algorithm: est.config.algorithm.name().to_string(),
                k_max,
                penalty: est.config.penalty,
                lambda_mode: est.config.lambda_mode,
                max_iterations: est.config.max_iterations,
                tie_rule: "smallest k".into(),
                plateau_rule: "left edge".into(),
            },
            k_range: [1, k_max],
            per_k,
            additive_trace: est
                .additive
                .trace
                .iter()
                .map(|t| TraceRow {
                    assumed: t.assumed,
                    estimated: t.estimated,
                    lambda: t.lambda,
                    separation: t.separation,
                })
                .collect(),
            additive_candidates: est.report.additive_candidates.clone(),
            multiplicative_minima: est.report.multiplicative_minima.clone(),
            multiplicative_argmin: argmin(&est.multiplicative[1..], 2),
            consensus: est.report.consensus.clone(),
            verdict: est.report.verdict.clone(),
            kl_best_k: est.kl_best_k,
            metadata: None,
        })
    }

    pub fn summary_line(&self) -> String {
        let verdict = match &self.verdict {
            Verdict::Unique(k) => format!("unique k = {k}"),
            Verdict::Ambiguous(ks) => format!("ambiguous {ks:?}"),
            Verdict::NoConsensus => "no consensus".to_string(),
        };
        let mut line = format!(
            "{}: additive candidates {:?}, multiplicative minima {:?}, consensus {verdict}",
            self.config.algorithm, self.additive_candidates, self.multiplicative_minima
        );
        if let Some(k) = self.kl_best_k {
            let _ = write!(line, ", Krzanowski-Lai k = {k}");
        }
        line
    }
}

/// CSV with columns `k,E,Em,Ea_K2,...,Ea_K{k_max-1}` and one row per
/// `k = 1..=k_max`.
pub fn curves_csv(est: &Estimation64, dim: usize) -> String {
    let columns = additive_columns(est, dim);
    let mut out = String::from("k,E,Em");
    for t in &est.additive.trace {
        let _ = write!(out, ",Ea_K{}", t.assumed);
    }
    out.push('\n');
    for (i, (e, m)) in est.errors.iter().zip(&est.multiplicative).enumerate() {
        let _ = write!(out, "{},{e},{m}", i + 1);
        for c in &columns {
            let _ = write!(out, ",{}", c[i]);
        }
        out.push('\n');
    }
    out
}
