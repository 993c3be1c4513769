//! Estimating `q` from a labelled tree through the collision count `Z_n`.
//!
//! `E[Z_n] = 2q(1−q) H_{n−1} ≈ 2q(1−q) ln n`, so `q̂ = φ(Z_n / (2 ln n))` with
//! `φ(x) = ½(1 − √((1 − 4x)₊))`, the inverse of `q ↦ q(1−q)` on `[0, ½]`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::observe::ObservedTree;
use crate::special::harmonic;
use crate::statistics::collision_count;
use crate::tree::TimeLabelled;

/// `φ(x) = ½(1 − √((1 − 4x)₊))`.
pub fn phi(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::param("x", format!("phi needs x >= 0, got {x}")));
    }
    let inner = (1.0 - 4.0 * x).max(0.0);
    Ok(0.5 * (1.0 - inner.sqrt()))
}

/// Normaliser of `Z_n`: `2 ln n` (default) or `2 H_{n−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    Log,
    Harmonic,
}

impl Normalization {
    pub fn denominator(self, n: usize) -> f64 {
        match self {
            Normalization::Log => 2.0 * (n as f64).ln(),
            Normalization::Harmonic => 2.0 * harmonic(n as u64 - 1),
        }
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(Normalization::Log),
            "harmonic" => Ok(Normalization::Harmonic),
            other => Err(Error::param("normalization", format!("unknown `{other}` (log|harmonic)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Interior,
    BoundaryZero,
    BoundaryHalf,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Interior => "interior",
            Regime::BoundaryZero => "boundary_zero",
            Regime::BoundaryHalf => "boundary_half",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateReport {
    pub q_hat: f64,
    pub z: u64,
    /// Asymptotic standard deviation `√(q̂(1−q̂)/(2 ln n))/(1−2q̂)`; infinite
    /// in the boundary-half regime, where the fluctuations are not Gaussian.
    pub scale: f64,
    pub regime: Regime,
}

/// Estimate from a collision count observed at size `n`.
pub fn estimate_from_count(n: usize, z: u64, norm: Normalization) -> Result<EstimateReport> {
    if n < 2 {
        return Err(Error::TooSmall("estimation needs n >= 2".into()));
    }
    let x = z as f64 / norm.denominator(n);
    let q_hat = phi(x)?;
    let regime = if x >= 0.25 {
        Regime::BoundaryHalf
    } else if z == 0 {
        Regime::BoundaryZero
    } else {
        Regime::Interior
    };
    let scale = match regime {
        Regime::BoundaryHalf => f64::INFINITY,
        _ => (q_hat * (1.0 - q_hat) / (2.0 * (n as f64).ln())).sqrt() / (1.0 - 2.0 * q_hat),
    };
    Ok(EstimateReport {
        q_hat,
        z,
        scale,
        regime,
    })
}

/// `q̂_n` with the default `2 ln n` normaliser.
pub fn estimate_q<T: TimeLabelled + ?Sized>(tree: &T) -> Result<EstimateReport> {
    estimate_q_with(tree, Normalization::Log)
}

pub fn estimate_q_with<T: TimeLabelled + ?Sized>(tree: &T, norm: Normalization) -> Result<EstimateReport> {
    estimate_from_count(tree.steps(), collision_count(tree), norm)
}

impl ObservedTree {
    pub fn estimate_q(&self) -> Result<EstimateReport> {
        estimate_q(self.labelled()?)
    }
}
