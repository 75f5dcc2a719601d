//! Closed-form constants of ideal clusters: solid `d`-spheres of equal
//! radius that do not overlap and are densely filled.
//!
//! Every quantity here treats the sphere volume `V` as the number of points
//! in a cluster, so errors carry units of `length² · volume`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::penalty::Penalty;
use crate::scalar::Scalar;

/// `ln Γ(x)` for `x = two_x / 2`, a positive integer or half-integer.
///
/// Uses the recurrence `Γ(z + 1) = z Γ(z)` from `Γ(1) = 1` or
/// `Γ(1/2) = √π`, summed in log space so that arguments in the hundreds do
/// not overflow.
pub fn ln_gamma_half<T: Scalar>(two_x: u32) -> Result<T> {
    if two_x == 0 {
        return Err(Error::Domain("Γ(x) requires x > 0".into()));
    }
    let half = T::lit(0.5);
    let ln = if two_x % 2 == 0 {
        // Γ(n) = (n-1)!
        (1..two_x / 2).map(|i| T::from_count(i as usize).ln()).sum()
    } else {
        // Γ(n + 1/2) = √π Π_{i<n} (i + 1/2)
        let n = (two_x - 1) / 2;
        let base = T::PI().sqrt().ln();
        base + (0..n)
            .map(|i| (T::from_count(i as usize) + half).ln())
            .sum::<T>()
    };
    Ok(ln)
}

/// `Γ(two_x / 2)`. Overflows to infinity for large arguments; use
/// [`ln_gamma_half`] when only ratios are needed.
pub fn gamma_function<T: Scalar>(two_x: u32) -> Result<T> {
    ln_gamma_half::<T>(two_x).map(T::exp)
}

/// Derived constants of a `d`-dimensional ideal cluster of radius `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealGeometry<T> {
    pub dimension: usize,
    pub radius: T,
    /// `π^(d/2) R^d / Γ((d+2)/2)`
    pub volume: T,
    /// `d / (d + 2)`
    pub alpha: T,
    /// `Γ((d+2)/2) / (√π Γ((d+3)/2))`
    pub gamma: T,
    /// `(α - γ²) / 2`
    pub beta: T,
    /// Offset of a half-sphere centroid from its equatorial plane, `R γ`.
    pub rho: T,
}

impl<T: Scalar> IdealGeometry<T> {
    pub fn new(dimension: usize, radius: T) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Domain("dimension must be >= 1".into()));
        }
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::Domain(format!("radius must be positive, got {radius}")));
        }
        let two_x = u32::try_from(dimension + 2)
            .map_err(|_| Error::Domain(format!("dimension {dimension} too large")))?;
        let d = T::from_count(dimension);
        let half = T::lit(0.5);
        let ln_g2 = ln_gamma_half::<T>(two_x)?;
        let ln_g3 = ln_gamma_half::<T>(two_x + 1)?;

        let volume = (d * half * T::PI().ln() + d * radius.ln() - ln_g2).exp();
        let alpha = d / (d + T::lit(2.0));
        let gamma = (ln_g2 - ln_g3).exp() / T::PI().sqrt();
        let beta = (alpha - gamma * gamma) * half;
        Ok(Self {
            dimension,
            radius,
            volume,
            alpha,
            gamma,
            beta,
            rho: radius * gamma,
        })
    }

    /// `α / 2β`: 4 on a line, tending to 1 as the dimension grows.
    pub fn alpha_over_two_beta(&self) -> T {
        self.alpha / (T::lit(2.0) * self.beta)
    }

    /// Errors of a sphere, half-sphere and perfect dumbbell whose two
    /// spheres have centers `separation` apart.
    pub fn shape_errors(&self, separation: T) -> ShapeErrors<T> {
        let vr2 = self.volume * self.radius * self.radius;
        let e_sphere = vr2 * self.alpha;
        ShapeErrors {
            e_sphere,
            e_half: vr2 * self.beta,
            e_dumbbell: T::lit(2.0) * e_sphere + self.volume * separation * separation * T::lit(0.5),
            separation,
        }
    }

    /// Error of the uneven dumbbell, `E_s + E_h + V/3 [(L - ρ cos θ)² + (L - ρ sin θ)²]`.
    pub fn uneven_dumbbell_error(&self, separation: T, theta: T) -> Result<T> {
        if !(theta >= T::zero() && theta <= T::FRAC_PI_2()) {
            return Err(Error::Domain(format!("θ must lie in [0, π/2], got {theta}")));
        }
        let shapes = self.shape_errors(separation);
        let a = separation - self.rho * theta.cos();
        let b = separation - self.rho * theta.sin();
        Ok(shapes.e_sphere + shapes.e_half + self.volume / T::lit(3.0) * (a * a + b * b))
    }

    /// The stated minimum form `E_s + E_h + V/3 (L - ρ)²`.
    ///
    /// This is *not* [`Self::uneven_dumbbell_error`] at θ = 0, which keeps
    /// an extra `V L² / 3`; both forms are exposed unreconciled.
    pub fn uneven_dumbbell_min_error(&self, separation: T) -> T {
        let shapes = self.shape_errors(separation);
        let a = separation - self.rho;
        shapes.e_sphere + shapes.e_half + self.volume / T::lit(3.0) * a * a
    }

    /// Upper bound on λ from a perfect dumbbell at `k = K - 1`: `V L² / 2`.
    pub fn perfect_dumbbell_upper(&self, separation: T) -> T {
        self.volume * separation * separation * T::lit(0.5)
    }

    /// Upper bound on λ from two uneven dumbbells:
    /// `V (2L² - 4LRγ - R²γ²) / 3`.
    pub fn uneven_dumbbell_upper(&self, separation: T) -> T {
        let l = separation;
        let rg = self.rho;
        self.volume * (T::lit(2.0) * l * l - T::lit(4.0) * l * rg - rg * rg) / T::lit(3.0)
    }
}

/// Free-function form of [`IdealGeometry::new`].
pub fn ideal_geometry<T: Scalar>(dimension: usize, radius: T) -> Result<IdealGeometry<T>> {
    IdealGeometry::new(dimension, radius)
}

/// Clustering errors of the three ideal shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeErrors<T> {
    pub e_sphere: T,
    pub e_half: T,
    pub e_dumbbell: T,
    /// Center-to-center distance `L` of the dumbbell.
    pub separation: T,
}

/// Interval of penalty coefficients for which the additive regularizer has a
/// local minimum at the assumed cluster count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaBounds<T> {
    pub lower: T,
    pub upper: T,
    pub midpoint: T,
    pub penalty: Penalty<T>,
    /// Set when `L < 2R`; the bounds are still computed but the spheres
    /// overlap and the derivation no longer holds.
    pub overlapping: bool,
}

/// Exact bounds `(V ρ² / (f(K+1) - f(K)), V L² / (2 (f(K) - f(K-1))))` with
/// `V` replaced by the mean cluster population `N / K`.
pub fn lambda_bounds<T: Scalar>(
    penalty: Penalty<T>,
    geom: &IdealGeometry<T>,
    n_points: usize,
    k: usize,
    separation: T,
) -> Result<LambdaBounds<T>> {
    penalty.validate()?;
    if k < 2 {
        return Err(Error::Precondition(format!("lambda bounds need K >= 2, got {k}")));
    }
    if n_points < k {
        return Err(Error::Precondition(format!("N = {n_points} is smaller than K = {k}")));
    }
    let dim = geom.dimension;
    let up = penalty.increment(k + 1, dim);
    if !(up > T::zero()) {
        return Err(Error::DegeneratePenalty(k + 1));
    }
    let down = penalty.increment(k, dim);
    if !(down > T::zero()) {
        return Err(Error::DegeneratePenalty(k));
    }
    let per_cluster = T::from_count(n_points) / T::from_count(k);
    let lower = per_cluster * geom.rho * geom.rho / up;
    let upper = per_cluster * separation * separation / (T::lit(2.0) * down);
    Ok(LambdaBounds {
        lower,
        upper,
        midpoint: (lower + upper) * T::lit(0.5),
        penalty,
        overlapping: separation < T::lit(2.0) * geom.radius,
    })
}

/// Working choice of λ for the linear penalty: `N L² / (4K)`, the midpoint
/// of the linear bounds with the `ρ²` term dropped.
pub fn lambda_choice<T: Scalar>(n_points: usize, k: usize, separation: T) -> T {
    T::from_count(n_points) * separation * separation / (T::lit(4.0) * T::from_count(k))
}

/// Which `k = K - 1` configuration gives the smaller λ upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperBoundShape {
    PerfectDumbbell,
    UnevenDumbbell,
}

/// `UnevenDumbbell` iff `2γ² + 8(L/R)γ - (L/R)² > 0`.
pub fn tighter_upper_bound<T: Scalar>(dimension: usize, l_over_r: T) -> Result<UpperBoundShape> {
    if !(l_over_r >= T::lit(2.0)) {
        return Err(Error::Precondition(format!("L/R must be >= 2, got {l_over_r}")));
    }
    let g = IdealGeometry::new(dimension, T::one())?.gamma;
    let lhs = T::lit(2.0) * g * g + T::lit(8.0) * l_over_r * g - l_over_r * l_over_r;
    Ok(if lhs > T::zero() {
        UpperBoundShape::UnevenDumbbell
    } else {
        UpperBoundShape::PerfectDumbbell
    })
}

/// Regularized error for which the K-centered error differences are
/// evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Regularizer<T> {
    Additive { lambda: T, penalty: Penalty<T> },
    /// `k E_k`
    Multiplicative,
}

impl<T> Regularizer<T> {
    pub fn linear_additive(lambda: T) -> Self {
        Regularizer::Additive {
            lambda,
            penalty: Penalty::Linear,
        }
    }
}

/// Differences `E_{K-1} - E_K` (`down`) and `E_K - E_{K+1}` (`up`) of a
/// penalized error on ideal clusters. The pattern `down > 0, up < 0`
/// certifies a local minimum at `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deltas<T> {
    pub down: T,
    pub up: T,
}

impl<T: Scalar> Deltas<T> {
    pub fn certifies_minimum(&self) -> bool {
        self.down > T::zero() && self.up < T::zero()
    }
}

/// Unpenalized differences: `(V L² / 2, V R² (α - 2β))`, both positive.
pub fn error_deltas<T: Scalar>(geom: &IdealGeometry<T>, separation: T) -> Deltas<T> {
    Deltas {
        down: geom.perfect_dumbbell_upper(separation),
        up: geom.volume * geom.radius * geom.radius * (geom.alpha - T::lit(2.0) * geom.beta),
    }
}

pub fn regularized_deltas<T: Scalar>(
    regularizer: Regularizer<T>,
    geom: &IdealGeometry<T>,
    k: usize,
    separation: T,
) -> Result<Deltas<T>> {
    if k < 2 {
        return Err(Error::Precondition(format!("K must be >= 2, got {k}")));
    }
    let v = geom.volume;
    let vr2 = v * geom.radius * geom.radius;
    let kf = T::from_count(k);
    let half_vl2 = v * separation * separation * T::lit(0.5);
    Ok(match regularizer {
        Regularizer::Additive { lambda, penalty } => {
            let dim = geom.dimension;
            Deltas {
                down: half_vl2 - lambda * penalty.increment(k, dim),
                up: v * geom.rho * geom.rho - lambda * penalty.increment(k + 1, dim),
            }
        }
        Regularizer::Multiplicative => Deltas {
            down: (kf - T::one()) * half_vl2 - kf * vr2 * geom.alpha,
            up: vr2 * (geom.alpha - T::lit(2.0) * (kf + T::one()) * geom.beta),
        },
    })
}
