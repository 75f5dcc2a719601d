//! Monotone penalty functions `f(k)` used by the additive and
//! multiplicative regularizers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default exponent for [`Penalty::Poly`] when none is given.
pub const DEFAULT_POLY_EXPONENT: f64 = 2.0;

/// Functional form of the penalty `f(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "exponent", rename_all = "snake_case")]
pub enum Penalty<T> {
    /// `f(k) = k`
    Linear,
    /// `f(k) = ln k`
    Log,
    /// `f(k) = k^p`, `p >= 1`
    Poly(T),
    /// `f(k) = e^k`
    Exp,
    /// `f(k) = k^(2/d)`, the Krzanowski–Lai scaling.
    KrzanowskiLai,
}

impl<T> Default for Penalty<T> {
    fn default() -> Self {
        Penalty::Linear
    }
}

impl<T: Scalar> Penalty<T> {
    /// Evaluates `f(k)` for data of dimension `dim` (only the
    /// Krzanowski–Lai form depends on `dim`).
    pub fn value(&self, k: usize, dim: usize) -> T {
        let kf = T::from_count(k);
        match *self {
            Penalty::Linear => kf,
            Penalty::Log => kf.ln(),
            Penalty::Poly(p) => kf.powf(p),
            Penalty::Exp => kf.exp(),
            Penalty::KrzanowskiLai => kf.powf(T::lit(2.0) / T::from_count(dim.max(1))),
        }
    }

    /// `f(k) - f(k - 1)`, evaluated in the exact form.
    pub fn increment(&self, k: usize, dim: usize) -> T {
        debug_assert!(k >= 1);
        match *self {
            Penalty::Linear => T::one(),
            // ln k - ln(k-1) = ln(k/(k-1)); avoids cancellation at large k
            Penalty::Log if k >= 2 => (T::from_count(k) / T::from_count(k - 1)).ln(),
            _ => self.value(k, dim) - self.value(k - 1, dim),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Penalty::Poly(p) if !(p >= T::one()) => Err(Error::Domain(format!(
                "polynomial penalty exponent must be >= 1, got {p}"
            ))),
            _ => Ok(()),
        }
    }
}

impl<T: fmt::Display> fmt::Display for Penalty<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Penalty::Linear => write!(f, "linear"),
            Penalty::Log => write!(f, "log"),
            Penalty::Poly(p) => write!(f, "poly:{p}"),
            Penalty::Exp => write!(f, "exp"),
            Penalty::KrzanowskiLai => write!(f, "kl"),
        }
    }
}

/// Parses `linear`, `log`, `poly`, `poly:P`, `exp` or `kl`.
impl<T: Scalar + FromStr> FromStr for Penalty<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let penalty = match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Penalty::Linear,
            "log" | "ln" => Penalty::Log,
            "exp" => Penalty::Exp,
            "kl" => Penalty::KrzanowskiLai,
            "poly" => Penalty::Poly(T::lit(DEFAULT_POLY_EXPONENT)),
            other => match other.strip_prefix("poly:") {
                Some(exp) => Penalty::Poly(
                    exp.parse::<T>()
                        .map_err(|_| Error::Parse(format!("invalid polynomial exponent `{exp}`")))?,
                ),
                None => return Err(Error::Parse(format!("unknown penalty `{s}`"))),
            },
        };
        penalty.validate()?;
        Ok(penalty)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(Penalty::<f64>::Linear.value(7, 3), 7.0);
        assert_eq!(Penalty::<f64>::Log.value(1, 3), 0.0);
        assert_eq!(Penalty::<f64>::KrzanowskiLai.value(8, 2), 8.0);
        assert_eq!(Penalty::<f64>::Poly(2.0).value(3, 1), 9.0);
        assert!((Penalty::<f64>::Exp.value(2, 1) - 2f64.exp().powi(1)).abs() < 1e-12);
    }

    #[test]
    fn log_increment_matches_difference() {
        let p = Penalty::<f64>::Log;
        for k in 2..50 {
            let direct = p.value(k, 1) - p.value(k - 1, 1);
            assert!((p.increment(k, 1) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn parse() {
        assert_eq!("linear".parse::<Penalty<f64>>().unwrap(), Penalty::Linear);
        assert_eq!("poly".parse::<Penalty<f64>>().unwrap(), Penalty::Poly(2.0));
        assert_eq!("poly:3.5".parse::<Penalty<f64>>().unwrap(), Penalty::Poly(3.5));
        assert_eq!("KL".parse::<Penalty<f64>>().unwrap(), Penalty::KrzanowskiLai);
        assert!("poly:0.5".parse::<Penalty<f64>>().is_err());
        assert!("cubic".parse::<Penalty<f64>>().is_err());
        let p: Penalty<f64> = Penalty::Poly(3.0);
        assert_eq!(p.to_string().parse::<Penalty<f64>>().unwrap(), p);
    }
}
