//! Spectral collocation for basic functions.
//!
//! A basic function on `S³_a` is a function of `t = |z₁|²` only. It is
//! stored as its samples at Chebyshev–Gauss–Lobatto nodes; derivatives come
//! from the dense collocation matrix and integrals from Clenshaw–Curtis
//! weights. The transverse operators below are written in a form that is
//! regular at the poles `t ∈ {0, 1}`, where the frame length `λ` vanishes.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sasakian::Weights;

/// Smallest grid accepted by [`CollocationGrid::new`].
pub const MIN_NODES: usize = 8;

/// Largest polynomial degree produced by [`random_basic`].
pub const MAX_RANDOM_DEGREE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Interval {
    /// `t ∈ [0, 1]`, the torus coordinate of `S³_a`.
    Unit,
    /// `x ∈ [−1, 1]`, the height coordinate on a round sphere.
    Symmetric,
}

impl Interval {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            Interval::Unit => (0.0, 1.0),
            Interval::Symmetric => (-1.0, 1.0),
        }
    }

    pub fn length(self) -> f64 {
        let (lo, hi) = self.bounds();
        hi - lo
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.bounds();
        write!(f, "[{lo}, {hi}]")
    }
}

/// Chebyshev–Gauss–Lobatto nodes (ascending) with the first-derivative
/// matrix and Clenshaw–Curtis weights for the flat measure.
#[derive(Debug, Clone)]
pub struct CollocationGrid {
    interval: Interval,
    nodes: Vec<f64>,
    angles: Vec<f64>,
    diff: DMatrix<f64>,
    quad: Vec<f64>,
}

impl PartialEq for CollocationGrid {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.interval == other.interval
    }
}

impl CollocationGrid {
    /// Builds an `n`-node grid. Construction is deterministic in `(n, interval)`.
    pub fn new(n: usize, interval: Interval) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::Config(format!(
                "collocation grid needs at least {MIN_NODES} nodes, got {n}"
            )));
        }
        let m = (n - 1) as f64;
        // θ_j = jπ/(n−1); x_j = −cos θ_j ascends from −1 to 1.
        let angles: Vec<f64> = (0..n).map(|j| PI * j as f64 / m).collect();
        // sin form keeps the nodes exactly antisymmetric about the midpoint
        let x: Vec<f64> = (0..n)
            .map(|j| (PI * (2.0 * j as f64 - m) / (2.0 * m)).sin())
            .collect();

        let c = |j: usize| -> f64 {
            let s = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
            if j == 0 || j == n - 1 {
                2.0 * s
            } else {
                s
            }
        };
        let mut diff = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                // x_i − x_j via the product formula avoids cancellation.
                let dx = 2.0
                    * (0.5 * (angles[i] + angles[j])).sin()
                    * (0.5 * (angles[i] - angles[j])).sin();
                let v = c(i) / c(j) / dx;
                diff[(i, j)] = v;
                row_sum += v;
            }
            diff[(i, i)] = -row_sum;
        }

        let quad = clenshaw_curtis(n);

        let (nodes, diff, quad) = match interval {
            Interval::Symmetric => (x, diff, quad),
            Interval::Unit => {
                // t = (1 + x)/2 = sin²(θ/2)
                let t = angles.iter().map(|a| (0.5 * a).sin().powi(2)).collect();
                (t, diff * 2.0, quad.iter().map(|w| 0.5 * w).collect())
            }
        };

        Ok(Self {
            interval,
            nodes,
            angles,
            diff,
            quad,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Chebyshev angles `θ_j` with `x_j = −cos θ_j`.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn diff_matrix(&self) -> &DMatrix<f64> {
        &self.diff
    }

    /// Clenshaw–Curtis weights for `∫ f dx` over the grid interval.
    pub fn quad_weights(&self) -> &[f64] {
        &self.quad
    }

    /// Indices of the nodes strictly inside the interval.
    pub fn interior(&self) -> std::ops::Range<usize> {
        1..self.len() - 1
    }

    pub fn differentiate(&self, values: &[f64]) -> Vec<f64> {
        debug_assert_eq!(values.len(), self.len());
        let v = DVector::from_column_slice(values);
        (&self.diff * v).data.into()
    }

    pub fn quadrature(&self, values: &[f64]) -> f64 {
        dot(&self.quad, values)
    }

    fn describe(&self) -> String {
        format!("{} nodes on {}", self.len(), self.interval)
    }
}

/// `make_grid` under the name used by callers that hold grids in `Arc`s.
pub fn make_grid(n: usize, interval: Interval) -> Result<Arc<CollocationGrid>> {
    CollocationGrid::new(n, interval).map(Arc::new)
}

/// Clenshaw–Curtis weights on `[−1, 1]` at the nodes `−cos(jπ/(n−1))`.
fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let m = n - 1;
    let mf = m as f64;
    let mut w = vec![0.0; n];
    let mut v = vec![1.0; m.saturating_sub(1)];
    let theta = |j: usize| PI * j as f64 / mf;
    if m.is_multiple_of(2) {
        w[0] = 1.0 / (mf * mf - 1.0);
        w[m] = w[0];
        for k in 1..m / 2 {
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * k as f64 * theta(i + 1)).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
        }
        for (i, vi) in v.iter_mut().enumerate() {
            *vi -= (mf * theta(i + 1)).cos() / (mf * mf - 1.0);
        }
    } else {
        w[0] = 1.0 / (mf * mf);
        w[m] = w[0];
        for k in 1..=(m - 1) / 2 {
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * k as f64 * theta(i + 1)).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
        }
    }
    for (i, vi) in v.iter().enumerate() {
        w[i + 1] = 2.0 * vi / mf;
    }
    w
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A torus-invariant (basic) function sampled at the grid nodes.
#[derive(Debug, Clone)]
pub struct BasicFunction {
    grid: Arc<CollocationGrid>,
    values: Vec<f64>,
}

impl BasicFunction {
    pub fn new(grid: Arc<CollocationGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "{} samples supplied for {}",
                values.len(),
                grid.describe()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite sample {bad}")));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at the nodes.
    pub fn from_fn(grid: &Arc<CollocationGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn constant(grid: &Arc<CollocationGrid>, c: f64) -> Self {
        Self::from_fn(grid, |_| c)
    }

    pub fn zero(grid: &Arc<CollocationGrid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub(crate) fn from_raw(grid: &Arc<CollocationGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<CollocationGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Nodewise combination of two functions on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        Ok(Self::from_raw(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn derivative(&self) -> Self {
        Self::from_raw(&self.grid, self.grid.differentiate(&self.values))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|self − other|` over the interior nodes.
    pub fn max_interior_diff(&self, other: &Self) -> Result<f64> {
        same_grid(&self.grid, &other.grid)?;
        Ok(self
            .grid
            .interior()
            .fold(0.0, |m, i| m.max((self.values[i] - other.values[i]).abs())))
    }
}

pub(crate) fn same_grid(a: &CollocationGrid, b: &CollocationGrid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch {
            left: a.describe(),
            right: b.describe(),
        })
    }
}

fn require_unit(grid: &CollocationGrid) -> Result<()> {
    if grid.interval() == Interval::Unit {
        Ok(())
    } else {
        Err(Error::GridMismatch {
            left: grid.describe(),
            right: "a grid on [0, 1]".into(),
        })
    }
}

/// Node-level coefficient profiles of the transverse operators of `S³_a`.
///
/// * `Z₂ f = 2σ⁻¹t(1−t) f′`
/// * `Δ_B f = λ⁻¹ Z₂Z₂ f = 4σt(1−t) f″ + [4σ(1−2t) − 4σ′t(1−t)] f′`
/// * `|∇f|² = λ⁻¹ (Z₂f)² = 4σt(1−t) (f′)²`
/// * `dμ = 2π² σ⁻² dt` after the coarea reduction over the tori `|z₁|² = t`.
#[derive(Debug, Clone)]
pub struct SasakianOperators {
    weights: Weights,
    grid: Arc<CollocationGrid>,
    sigma: Vec<f64>,
    z2_coeff: Vec<f64>,
    second_coeff: Vec<f64>,
    first_coeff: Vec<f64>,
    density: Vec<f64>,
}

impl SasakianOperators {
    pub fn new(weights: Weights, grid: &Arc<CollocationGrid>) -> Result<Self> {
        require_unit(grid)?;
        let slope = weights.sigma_slope();
        let t = grid.nodes();
        let sigma: Vec<f64> = t.iter().map(|&t| weights.sigma_at(t)).collect();
        let z2_coeff = t
            .iter()
            .zip(&sigma)
            .map(|(&t, s)| 2.0 * t * (1.0 - t) / s)
            .collect();
        let second_coeff = t
            .iter()
            .zip(&sigma)
            .map(|(&t, s)| 4.0 * s * t * (1.0 - t))
            .collect();
        let first_coeff = t
            .iter()
            .zip(&sigma)
            .map(|(&t, s)| 4.0 * s * (1.0 - 2.0 * t) - 4.0 * slope * t * (1.0 - t))
            .collect();
        let density = sigma.iter().map(|s| 2.0 * PI * PI / (s * s)).collect();
        Ok(Self {
            weights,
            grid: Arc::clone(grid),
            sigma,
            z2_coeff,
            second_coeff,
            first_coeff,
            density,
        })
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn grid(&self) -> &Arc<CollocationGrid> {
        &self.grid
    }

    pub fn sigma(&self) -> BasicFunction {
        BasicFunction::from_raw(&self.grid, self.sigma.clone())
    }

    /// Base measure density `2π² σ⁻²` (with respect to `dt`).
    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub(crate) fn z2_values(&self, f: &[f64]) -> Vec<f64> {
        let df = self.grid.differentiate(f);
        self.z2_coeff.iter().zip(df).map(|(c, d)| c * d).collect()
    }

    pub(crate) fn laplacian_values(&self, f: &[f64]) -> Vec<f64> {
        let df = self.grid.differentiate(f);
        let ddf = self.grid.differentiate(&df);
        (0..f.len())
            .map(|i| self.second_coeff[i] * ddf[i] + self.first_coeff[i] * df[i])
            .collect()
    }

    pub(crate) fn grad_sq_values(&self, f: &[f64]) -> Vec<f64> {
        let df = self.grid.differentiate(f);
        self.second_coeff
            .iter()
            .zip(df)
            .map(|(c, d)| c * d * d)
            .collect()
    }

    /// Measure weights (quadrature × density × `e^u`) so that integrals in the
    /// metric `e^u g_a` are plain dot products.
    pub(crate) fn measure_values(&self, u: Option<&[f64]>) -> Vec<f64> {
        let q = self.grid.quad_weights();
        match u {
            None => q.iter().zip(&self.density).map(|(a, b)| a * b).collect(),
            Some(u) => (0..q.len())
                .map(|i| q[i] * self.density[i] * u[i].exp())
                .collect(),
        }
    }

    pub fn z2_apply(&self, f: &BasicFunction) -> Result<BasicFunction> {
        same_grid(&self.grid, f.grid())?;
        Ok(BasicFunction::from_raw(
            &self.grid,
            self.z2_values(f.values()),
        ))
    }

    pub fn laplacian(&self, f: &BasicFunction) -> Result<BasicFunction> {
        same_grid(&self.grid, f.grid())?;
        Ok(BasicFunction::from_raw(
            &self.grid,
            self.laplacian_values(f.values()),
        ))
    }

    pub fn grad_sq(&self, f: &BasicFunction) -> Result<BasicFunction> {
        same_grid(&self.grid, f.grid())?;
        Ok(BasicFunction::from_raw(
            &self.grid,
            self.grad_sq_values(f.values()),
        ))
    }

    pub fn integrate(&self, u: Option<&BasicFunction>, f: &BasicFunction) -> Result<f64> {
        same_grid(&self.grid, f.grid())?;
        if let Some(u) = u {
            same_grid(&self.grid, u.grid())?;
        }
        let m = self.measure_values(u.map(|u| u.values()));
        Ok(dot(&m, f.values()))
    }

    /// Assembled matrix of the discrete `Δ_B`.
    pub fn laplacian_matrix(&self) -> DMatrix<f64> {
        let d = self.grid.diff_matrix();
        let dd = d * d;
        let n = self.grid.len();
        DMatrix::from_fn(n, n, |i, j| {
            self.second_coeff[i] * dd[(i, j)] + self.first_coeff[i] * d[(i, j)]
        })
    }

    /// `Z₂ log λ`, split as the exact round part `2σ⁻¹(1 − 2t)` (from
    /// `log t(1−t)`) plus `−3 Z₂ log σ` evaluated spectrally.
    pub fn z2_log_lambda(&self) -> BasicFunction {
        let log_sigma: Vec<f64> = self.sigma.iter().map(|s| s.ln()).collect();
        let smooth = self.z2_values(&log_sigma);
        let values = self
            .grid
            .nodes()
            .iter()
            .zip(&self.sigma)
            .zip(smooth)
            .map(|((&t, s), z)| 2.0 * (1.0 - 2.0 * t) / s - 3.0 * z)
            .collect();
        BasicFunction::from_raw(&self.grid, values)
    }

    /// Transverse scalar curvature from the frame,
    /// `R^T = −λ⁻¹ Z₂(Z₂ log λ) = −2σ² d/dt(Z₂ log λ)`.
    pub fn frame_scalar_curvature(&self) -> BasicFunction {
        let g = self.z2_log_lambda();
        let dg = self.grid.differentiate(g.values());
        let values = self
            .sigma
            .iter()
            .zip(dg)
            .map(|(s, d)| -2.0 * s * s * d)
            .collect();
        BasicFunction::from_raw(&self.grid, values)
    }
}

/// `Z₂ f` for a basic function on a `[0, 1]` grid.
pub fn z2_apply(w: &Weights, f: &BasicFunction) -> Result<BasicFunction> {
    SasakianOperators::new(*w, f.grid())?.z2_apply(f)
}

/// Basic Laplacian of `g_a` (the foliation is minimal, so no mean-curvature term).
pub fn basic_laplacian(w: &Weights, f: &BasicFunction) -> Result<BasicFunction> {
    SasakianOperators::new(*w, f.grid())?.laplacian(f)
}

/// `∫_{S³} f dμ_{e^u g_a} = ∫₀¹ f · 2π² e^u σ⁻² dt`; `u = None` is the base metric.
pub fn integrate(w: &Weights, u: Option<&BasicFunction>, f: &BasicFunction) -> Result<f64> {
    SasakianOperators::new(*w, f.grid())?.integrate(u, f)
}

/// A polynomial in the grid coordinate, monomial basis, lowest degree first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial(vec![0.0])
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.0
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn sample(&self, grid: &Arc<CollocationGrid>) -> BasicFunction {
        BasicFunction::from_fn(grid, |x| self.eval(x))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Polynomial(self.0.iter().map(|v| c * v).collect())
    }

    pub fn abs_coefficient_sum(&self) -> f64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    /// Coefficients uniform in `[−amplitude, amplitude]`.
    pub fn random<R: Rng>(rng: &mut R, degree: usize, amplitude: f64) -> Result<Self> {
        if degree > MAX_RANDOM_DEGREE {
            return Err(Error::Config(format!(
                "random polynomial degree {degree} exceeds {MAX_RANDOM_DEGREE}"
            )));
        }
        if !(amplitude.is_finite() && (0.0..=1.0).contains(&amplitude)) {
            return Err(Error::Config(format!(
                "random polynomial amplitude {amplitude} outside [0, 1]"
            )));
        }
        Ok(Polynomial(
            (0..=degree)
                .map(|_| amplitude * (2.0 * rng.random::<f64>() - 1.0))
                .collect(),
        ))
    }
}

/// Per-trial generator: trial `k` of a run seeded with `seed` draws from
/// stream `k` of one ChaCha key, so trials can run in any order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Seeded random polynomial test function on `grid`.
pub fn random_basic(
    grid: &Arc<CollocationGrid>,
    seed: u64,
    degree: usize,
    amplitude: f64,
) -> Result<BasicFunction> {
    let p = Polynomial::random(&mut trial_rng(seed, 0), degree, amplitude)?;
    Ok(p.sample(grid))
}
