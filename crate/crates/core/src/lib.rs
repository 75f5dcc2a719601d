//! Estimating the number of clusters in unlabeled data with regularized
//! k-means.
//!
//! The crate combines closed-form ideal-cluster geometry (spheres of equal
//! radius that do not overlap) with two deterministic farthest-point k-means
//! sweeps. From one sweep it derives an additive penalty `E_k + λ f(k)` with
//! λ chosen per assumed cluster count, and the coefficient-free
//! multiplicative penalty `k E_k`; their agreement is the estimate.
//!
//! Numerics are generic over [`Scalar`] (`f32` or `f64`). The `*64`
//! aliases below fix the scalar to `f64`.

/// Version of this library, echoed in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod datagen;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod kmeans;
pub mod penalty;
pub mod preprocess;
pub mod regularization;
pub mod scalar;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use geometry::{IdealGeometry, LambdaBounds, ShapeErrors, UpperBoundShape};
pub use kmeans::{ClusterAssignment, SweepAlgorithm};
pub use penalty::Penalty;
pub use regularization::{CandidateReport, EstimateConfig, Estimation, LambdaMode, PenaltySweep, Verdict};
pub use scalar::Scalar;

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type IdealGeometry64 = IdealGeometry<f64>;
pub type ShapeErrors64 = ShapeErrors<f64>;
pub type LambdaBounds64 = LambdaBounds<f64>;
pub type ClusterAssignment64 = ClusterAssignment<f64>;
pub type Penalty64 = Penalty<f64>;
pub type PenaltySweep64 = PenaltySweep<f64>;
pub type Estimation64 = Estimation<f64>;
pub type EstimateConfig64 = EstimateConfig<f64>;
