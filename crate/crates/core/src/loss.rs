//! Loss functions: a non-decreasing transform `D` applied to a base metric
//! distance, together with the constants governing its growth.
//!
//! Each loss carries a growth exponent `r` with `D(z*x) <= z^r * D(x)` for
//! every dilation `z >= 1` (pure-power transforms satisfy it for all `z > 0`),
//! and a weak triangle constant `rho = max(2^(r-1), 1)` with
//! `D(p,q) <= rho * (D(p,c) + D(c,q))` for all points p, q, c.

use crate::error::{Error, Result};
use crate::family::Point;

/// Transform of base distances, selecting the clustering objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loss {
    /// D(x) = x over the Euclidean metric (sum of distances).
    Median,
    /// D(x) = x^2 over the Euclidean metric (sum of squared distances).
    Means,
    /// D(x) = x^2/2 for x <= delta, delta*(x - delta/2) beyond; Euclidean
    /// metric. Quadratic near zero, linear in the tails.
    Huber { delta: f64 },
    /// D(x) = x over the l_psi metric ((sum |dx_i|^psi)^(1/psi)).
    LPsi { psi: f64 },
}

impl Loss {
    pub fn median() -> Self {
        Loss::Median
    }

    pub fn means() -> Self {
        Loss::Means
    }

    /// Huber loss with threshold `delta > 0`.
    pub fn huber(delta: f64) -> Result<Self> {
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "huber delta must be positive and finite, got {delta}"
            )));
        }
        Ok(Loss::Huber { delta })
    }

    /// l_psi loss for a true norm, `psi >= 1`.
    pub fn lpsi(psi: f64) -> Result<Self> {
        if !psi.is_finite() || psi < 1.0 {
            return Err(Error::InvalidInput(format!(
                "psi must be >= 1, got {psi}; use lpsi_quasi for psi in (0,1)"
            )));
        }
        Ok(Loss::LPsi { psi })
    }

    /// l_psi loss allowing the quasi-norm range `0 < psi < 1`; the weak
    /// triangle constant 2^(1/psi) still covers it.
    pub fn lpsi_quasi(psi: f64) -> Result<Self> {
        if !psi.is_finite() || psi <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "psi must be positive and finite, got {psi}"
            )));
        }
        Ok(Loss::LPsi { psi })
    }

    /// Growth exponent r.
    pub fn r(&self) -> f64 {
        match self {
            Loss::Median | Loss::LPsi { .. } => 1.0,
            Loss::Means | Loss::Huber { .. } => 2.0,
        }
    }

    /// Weak triangle constant rho = max(2^(r-1), 1), with the l_psi metric
    /// contributing 2^(1/psi).
    pub fn rho(&self) -> f64 {
        match self {
            Loss::Median => 1.0,
            Loss::Means | Loss::Huber { .. } => 2.0,
            Loss::LPsi { psi } => 2f64.powf(1.0 / psi).max(1.0),
        }
    }

    /// The transform D applied to a base distance `x >= 0`.
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Loss::Median | Loss::LPsi { .. } => x,
            Loss::Means => x * x,
            Loss::Huber { delta } => {
                if x <= *delta {
                    0.5 * x * x
                } else {
                    delta * (x - 0.5 * delta)
                }
            }
        }
    }

    /// Base metric distance between two points of equal dimension.
    pub fn base_distance(&self, a: &Point, b: &Point) -> f64 {
        match self {
            Loss::LPsi { psi } => psi_distance(a.coords(), b.coords(), *psi),
            _ => euclidean(a.coords(), b.coords()),
        }
    }
}

/// Euclidean distance between coordinate slices of equal length.
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn psi_distance(a: &[f64], b: &[f64], psi: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs().powf(psi))
        .sum::<f64>()
        .powf(1.0 / psi)
}
