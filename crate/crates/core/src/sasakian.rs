//! Closed-form scalar data of the weighted Sasakian sphere `S³_a`.
//!
//! Everything is written in the torus coordinate `t = |z₁|² ∈ [0, 1]`, so
//! `|z₂|² = 1 − t` and `|z₁|² − |z₂|² = 2t − 1`. The Reeb foliation of
//! `S³_a` is minimal of codimension two and its basic functions (for an
//! irrational weight ratio) are exactly the functions of `t`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};

/// The weight pair `(a1, a2)` of the weighted Sasakian structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    a1: f64,
    a2: f64,
}

impl Weights {
    pub fn new(a1: f64, a2: f64) -> Result<Self> {
        if !(a1.is_finite() && a2.is_finite() && a1 > 0.0 && a2 > 0.0) {
            return Err(Error::Config(format!(
                "weights must be positive and finite, got ({a1}, {a2})"
            )));
        }
        Ok(Self { a1, a2 })
    }

    /// The standard Sasakian structure, i.e. the round 3-sphere.
    pub fn round() -> Self {
        Self { a1: 1.0, a2: 1.0 }
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    /// The pair with the two weights exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            a1: self.a2,
            a2: self.a1,
        }
    }

    /// Both weights multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(s * self.a1, s * self.a2)
    }

    /// `dσ/dt = a1 − a2`.
    pub fn sigma_slope(&self) -> f64 {
        self.a1 - self.a2
    }

    /// `σ(t) = a1·t + a2·(1 − t)`, without the domain check.
    #[inline]
    pub(crate) fn sigma_at(&self, t: f64) -> f64 {
        self.a2 + (self.a1 - self.a2) * t
    }
}

/// `σ = a1|z1|² + a2|z2|²` on the unit sphere.
pub fn sigma(w: &Weights, t: f64) -> Result<f64> {
    check_unit(t)?;
    Ok(w.sigma_at(t))
}

/// Length-squared of the transverse frame `Z₁, Z₂`: `λ(t) = σ⁻³ t(1 − t)`.
pub fn lambda_base(w: &Weights, t: f64) -> Result<f64> {
    check_unit(t)?;
    Ok(lambda_at(w, t))
}

#[inline]
pub(crate) fn lambda_at(w: &Weights, t: f64) -> f64 {
    let s = w.sigma_at(t);
    t * (1.0 - t) / (s * s * s)
}

/// Transverse scalar curvature of `g_a`.
pub fn transverse_scalar_closed(w: &Weights, t: f64) -> Result<f64> {
    check_unit(t)?;
    Ok(scalar_at(w, t))
}

#[inline]
pub(crate) fn scalar_at(w: &Weights, t: f64) -> f64 {
    let d = w.sigma_slope();
    let s = w.sigma_at(t);
    -24.0 * d * d * t * (1.0 - t) / s - 16.0 * d * (2.0 * t - 1.0) + 8.0 * s
}

/// `Z₂(R^T) = −48 (a1 − a2) a1 a2 σ⁻³ t(1 − t)`.
pub fn z2_scalar_closed(w: &Weights, t: f64) -> Result<f64> {
    check_unit(t)?;
    let s = w.sigma_at(t);
    Ok(-48.0 * w.sigma_slope() * w.a1 * w.a2 * t * (1.0 - t) / (s * s * s))
}

/// Conformal factor `f_{Z₂} = ½ Z₂ log λ`, in the form that stays finite at
/// the poles `t ∈ {0, 1}`.
pub fn conformal_factor_closed(w: &Weights, t: f64) -> Result<f64> {
    check_unit(t)?;
    let s = w.sigma_at(t);
    Ok((1.0 - 2.0 * t) / s - 3.0 * w.sigma_slope() * t * (1.0 - t) / (s * s))
}

/// The conformal integral invariant `I_{Z₂} = −8π²(a1² − a2²)/(a1² a2²)`.
pub fn invariant_closed(w: &Weights) -> f64 {
    let (a1, a2) = (w.a1, w.a2);
    8.0 * PI * PI * (a2 * a2 - a1 * a1) / (a1 * a1 * a2 * a2)
}

/// Total transverse curvature `∫ R^T dμ = 8π²(a1 + a2)/(a1 a2)`.
///
/// Obtained by integrating the curvature against the coarea weight
/// `2π² σ⁻² dt`; the value is the same for every metric in the basic
/// conformal class.
pub fn total_curvature_closed(w: &Weights) -> f64 {
    8.0 * PI * PI * (w.a1 + w.a2) / (w.a1 * w.a2)
}

/// Volume of `(S³, g_a)`: `∫₀¹ 2π² σ⁻² dt = 2π²/(a1 a2)`.
pub fn volume_closed(w: &Weights) -> f64 {
    2.0 * PI * PI / (w.a1 * w.a2)
}
