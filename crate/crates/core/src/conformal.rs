//! Conformal change of transverse metrics inside a basic conformal class.
//!
//! For `g^T = e^u g₀^T` on a minimal foliation of codimension `q`,
//!
//! ```text
//! R^T = e^{−u} [ −(q−1) Δ_B⁰ u − (q−1)(q−2)/4 · |∇u|²₀ + R₀^T ],   dμ = e^{qu/2} dμ₀.
//! ```
//!
//! Minimality is preserved under basic conformal change, so no mean-curvature
//! term appears anywhere in this crate.

use std::sync::Arc;

use crate::calculus::{dot, same_grid, BasicFunction, CollocationGrid, SasakianOperators};
use crate::error::{Error, Result};
use crate::sasakian::Weights;

/// Operators of a background transverse metric, as needed by [`conformal_scalar`].
pub trait TransverseModel {
    fn grid(&self) -> &Arc<CollocationGrid>;
    fn laplacian(&self, f: &BasicFunction) -> Result<BasicFunction>;
    fn grad_sq(&self, f: &BasicFunction) -> Result<BasicFunction>;
}

impl TransverseModel for SasakianOperators {
    fn grid(&self) -> &Arc<CollocationGrid> {
        SasakianOperators::grid(self)
    }

    fn laplacian(&self, f: &BasicFunction) -> Result<BasicFunction> {
        SasakianOperators::laplacian(self, f)
    }

    fn grad_sq(&self, f: &BasicFunction) -> Result<BasicFunction> {
        SasakianOperators::grad_sq(self, f)
    }
}

/// Transverse scalar curvature of `e^u g₀^T` in codimension `q ≥ 2`.
pub fn conformal_scalar<M: TransverseModel + ?Sized>(
    q: usize,
    r0: &BasicFunction,
    u: &BasicFunction,
    model: &M,
) -> Result<BasicFunction> {
    if q < 2 {
        return Err(Error::Parameter(format!(
            "codimension must be at least 2, got {q}"
        )));
    }
    same_grid(model.grid(), r0.grid())?;
    same_grid(model.grid(), u.grid())?;
    let q = q as f64;
    let lap = model.laplacian(u)?;
    let grad_coeff = (q - 1.0) * (q - 2.0) / 4.0;
    let mut inner: Vec<f64> = lap
        .values()
        .iter()
        .zip(r0.values())
        .map(|(l, r)| -(q - 1.0) * l + r)
        .collect();
    if grad_coeff != 0.0 {
        let g = model.grad_sq(u)?;
        for (v, gs) in inner.iter_mut().zip(g.values()) {
            *v -= grad_coeff * gs;
        }
    }
    let values = inner
        .iter()
        .zip(u.values())
        .map(|(v, u)| (-u).exp() * v)
        .collect();
    BasicFunction::new(Arc::clone(model.grid()), values)
}

/// A metric `e^u g_a` in the basic conformal class of the weighted Sasakian
/// sphere, with its curvature and measure precomputed.
#[derive(Debug, Clone)]
pub struct TransverseGeometry {
    ops: SasakianOperators,
    u: BasicFunction,
    exp_neg_u: Vec<f64>,
    base_scalar: BasicFunction,
    scalar: BasicFunction,
    density: BasicFunction,
    measure: Vec<f64>,
}

impl TransverseGeometry {
    /// Codimension of the Reeb foliation of `S³_a`.
    pub const CODIMENSION: usize = 2;

    pub fn new(weights: Weights, u: BasicFunction) -> Result<Self> {
        let ops = SasakianOperators::new(weights, u.grid())?;
        Self::with_operators(ops, u)
    }

    /// The Sasakian metric `g_a` itself (`u = 0`).
    pub fn base(weights: Weights, grid: &Arc<CollocationGrid>) -> Result<Self> {
        Self::new(weights, BasicFunction::zero(grid))
    }

    pub(crate) fn with_operators(ops: SasakianOperators, u: BasicFunction) -> Result<Self> {
        same_grid(ops.grid(), u.grid())?;
        let base_scalar = ops.frame_scalar_curvature();
        Self::assemble(ops, u, base_scalar)
    }

    /// Builds the geometry reusing an already computed base curvature profile.
    pub(crate) fn assemble(
        ops: SasakianOperators,
        u: BasicFunction,
        base_scalar: BasicFunction,
    ) -> Result<Self> {
        let scalar = conformal_scalar(Self::CODIMENSION, &base_scalar, &u, &ops)?;
        let exp_neg_u = u.values().iter().map(|v| (-v).exp()).collect();
        let density = BasicFunction::new(
            Arc::clone(ops.grid()),
            ops.density()
                .iter()
                .zip(u.values())
                .map(|(d, u)| d * u.exp())
                .collect(),
        )?;
        let measure = ops.measure_values(Some(u.values()));
        Ok(Self {
            ops,
            u,
            exp_neg_u,
            base_scalar,
            scalar,
            density,
            measure,
        })
    }

    pub fn weights(&self) -> &Weights {
        self.ops.weights()
    }

    pub fn grid(&self) -> &Arc<CollocationGrid> {
        self.ops.grid()
    }

    pub fn operators(&self) -> &SasakianOperators {
        &self.ops
    }

    /// The conformal exponent `u`.
    pub fn conformal_exponent(&self) -> &BasicFunction {
        &self.u
    }

    pub fn sigma(&self) -> BasicFunction {
        self.ops.sigma()
    }

    /// Transverse scalar curvature of `g_a`.
    pub fn base_scalar(&self) -> &BasicFunction {
        &self.base_scalar
    }

    /// Transverse scalar curvature of `e^u g_a`.
    pub fn scalar_curvature(&self) -> &BasicFunction {
        &self.scalar
    }

    /// Measure density `2π² e^u σ⁻²` with respect to `dt`.
    pub fn measure_density(&self) -> &BasicFunction {
        &self.density
    }

    /// `∫ f dμ_u`.
    pub fn integrate(&self, f: &BasicFunction) -> Result<f64> {
        same_grid(self.grid(), f.grid())?;
        Ok(dot(&self.measure, f.values()))
    }

    pub(crate) fn integrate_values(&self, f: &[f64]) -> f64 {
        dot(&self.measure, f)
    }

    pub fn volume(&self) -> f64 {
        self.measure.iter().sum()
    }

    pub fn total_curvature(&self) -> f64 {
        self.integrate_values(self.scalar.values())
    }

    /// `Y(R^T)` for `Y = Z₂`.
    pub fn z2_of_scalar(&self) -> BasicFunction {
        BasicFunction::from_raw(self.grid(), self.ops.z2_values(self.scalar.values()))
    }

    /// Transverse divergence of `Z₂` in `e^u g_a`: `Z₂ log λ + Z₂ u`.
    pub fn divergence_z2(&self) -> BasicFunction {
        let base = self.ops.z2_log_lambda();
        let du = self.ops.z2_values(self.u.values());
        BasicFunction::from_raw(
            self.grid(),
            base.values().iter().zip(du).map(|(a, b)| a + b).collect(),
        )
    }

    /// Basic Laplacian of `e^u g_a`, i.e. `e^{−u} Δ_B`.
    pub fn conformal_laplacian(&self, f: &BasicFunction) -> Result<BasicFunction> {
        same_grid(self.grid(), f.grid())?;
        Ok(BasicFunction::from_raw(
            self.grid(),
            self.conformal_laplacian_values(f.values()),
        ))
    }

    pub(crate) fn conformal_laplacian_values(&self, f: &[f64]) -> Vec<f64> {
        self.ops
            .laplacian_values(f)
            .into_iter()
            .zip(&self.exp_neg_u)
            .map(|(l, e)| e * l)
            .collect()
    }
}

impl TransverseModel for TransverseGeometry {
    fn grid(&self) -> &Arc<CollocationGrid> {
        self.ops.grid()
    }

    fn laplacian(&self, f: &BasicFunction) -> Result<BasicFunction> {
        self.conformal_laplacian(f)
    }

    fn grad_sq(&self, f: &BasicFunction) -> Result<BasicFunction> {
        let g = self.ops.grad_sq(f)?;
        Ok(BasicFunction::from_raw(
            self.grid(),
            g.values()
                .iter()
                .zip(&self.exp_neg_u)
                .map(|(g, e)| e * g)
                .collect(),
        ))
    }
}
