//! Axisymmetric conformal metrics `e^u g_round` on `S²` and `S³`.
//!
//! A round sphere carries the foliation by points, which is minimal of
//! codimension `n`, so the conformal-change engine applies with `q = n`. The
//! coordinate is the height `x = x_{n+1} ∈ [−1, 1]`, and the conformal field
//! is `Y = ∇x`, acting on axisymmetric functions by `Y(f) = (1 − x²) f′`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{
    dot, make_grid, same_grid, BasicFunction, CollocationGrid, Interval, Polynomial,
};
use crate::conformal::{conformal_scalar, TransverseModel};
use crate::error::{Error, Result};
use crate::invariants::sweep_exponent;

fn check_dim(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "sphere dimension must be 2 or 3, got {n}"
        )))
    }
}

fn require_symmetric(grid: &CollocationGrid) -> Result<()> {
    if grid.interval() == Interval::Symmetric {
        Ok(())
    } else {
        Err(Error::GridMismatch {
            left: format!("{} nodes on {}", grid.len(), grid.interval()),
            right: "a grid on [-1, 1]".into(),
        })
    }
}

/// Volume of the unit `n`-sphere.
pub fn round_volume(n: usize) -> f64 {
    match n {
        2 => 4.0 * PI,
        _ => 2.0 * PI * PI,
    }
}

/// Quadrature weights for `∫ f dμ_round` on an axisymmetric function.
///
/// `n = 2`: `2π dx`, Clenshaw–Curtis. `n = 3`: `4π √(1−x²) dx`; with
/// `x = −cos θ` this is `4π ∫ f sin²θ dθ`, whose integrand is smooth and
/// periodic in `θ`, so the trapezoid rule on the Lobatto angles is spectrally
/// accurate where Clenshaw–Curtis would only converge algebraically.
pub fn round_measure_weights(n: usize, grid: &CollocationGrid) -> Result<Vec<f64>> {
    check_dim(n)?;
    require_symmetric(grid)?;
    Ok(match n {
        2 => grid.quad_weights().iter().map(|w| 2.0 * PI * w).collect(),
        _ => {
            let h = PI / (grid.len() - 1) as f64;
            grid.angles()
                .iter()
                .map(|a| 4.0 * PI * h * a.sin().powi(2))
                .collect()
        }
    })
}

/// Axisymmetric operators of the round `Sⁿ`.
#[derive(Debug, Clone)]
pub struct RoundSphere {
    dim: usize,
    grid: Arc<CollocationGrid>,
    one_minus_x2: Vec<f64>,
    weights: Vec<f64>,
}

impl RoundSphere {
    pub fn new(dim: usize, grid: &Arc<CollocationGrid>) -> Result<Self> {
        check_dim(dim)?;
        require_symmetric(grid)?;
        Ok(Self {
            dim,
            grid: Arc::clone(grid),
            one_minus_x2: grid.nodes().iter().map(|x| 1.0 - x * x).collect(),
            weights: round_measure_weights(dim, grid)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Constant curvature `n(n−1)` of the unit sphere.
    pub fn round_scalar(&self) -> f64 {
        (self.dim * (self.dim - 1)) as f64
    }

    /// `Y(f) = g(∇x, ∇f) = (1 − x²) f′`.
    pub fn conformal_field(&self, f: &BasicFunction) -> Result<BasicFunction> {
        same_grid(&self.grid, f.grid())?;
        let df = self.grid.differentiate(f.values());
        BasicFunction::new(
            Arc::clone(&self.grid),
            self.one_minus_x2
                .iter()
                .zip(df)
                .map(|(a, d)| a * d)
                .collect(),
        )
    }

    /// Measure weights of `e^u g_round`: the round weights times `e^{nu/2}`.
    pub fn measure(&self, u: &BasicFunction) -> Result<Vec<f64>> {
        same_grid(&self.grid, u.grid())?;
        let p = self.dim as f64 / 2.0;
        Ok(self
            .weights
            .iter()
            .zip(u.values())
            .map(|(w, u)| w * (p * u).exp())
            .collect())
    }
}

impl TransverseModel for RoundSphere {
    fn grid(&self) -> &Arc<CollocationGrid> {
        &self.grid
    }

    /// `Δf = (1 − x²) f″ − n x f′`.
    fn laplacian(&self, f: &BasicFunction) -> Result<BasicFunction> {
        same_grid(&self.grid, f.grid())?;
        let df = self.grid.differentiate(f.values());
        let ddf = self.grid.differentiate(&df);
        let n = self.dim as f64;
        let values = (0..df.len())
            .map(|i| self.one_minus_x2[i] * ddf[i] - n * self.grid.nodes()[i] * df[i])
            .collect();
        BasicFunction::new(Arc::clone(&self.grid), values)
    }

    /// `|∇f|² = (1 − x²)(f′)²`.
    fn grad_sq(&self, f: &BasicFunction) -> Result<BasicFunction> {
        same_grid(&self.grid, f.grid())?;
        let df = self.grid.differentiate(f.values());
        BasicFunction::new(
            Arc::clone(&self.grid),
            self.one_minus_x2
                .iter()
                .zip(df)
                .map(|(a, d)| a * d * d)
                .collect(),
        )
    }
}

/// The metric `e^u g_round` on `Sⁿ` with its curvature and measure.
#[derive(Debug, Clone)]
pub struct SphereGeometry {
    model: RoundSphere,
    u: BasicFunction,
    scalar: BasicFunction,
    measure: Vec<f64>,
}

impl SphereGeometry {
    pub fn new(dim: usize, u: BasicFunction) -> Result<Self> {
        let model = RoundSphere::new(dim, u.grid())?;
        let r0 = BasicFunction::constant(u.grid(), model.round_scalar());
        let scalar = conformal_scalar(dim, &r0, &u, &model)?;
        let measure = model.measure(&u)?;
        Ok(Self {
            model,
            u,
            scalar,
            measure,
        })
    }

    pub fn dim(&self) -> usize {
        self.model.dim
    }

    pub fn model(&self) -> &RoundSphere {
        &self.model
    }

    pub fn conformal_exponent(&self) -> &BasicFunction {
        &self.u
    }

    pub fn scalar_curvature(&self) -> &BasicFunction {
        &self.scalar
    }

    pub fn integrate(&self, f: &BasicFunction) -> Result<f64> {
        same_grid(self.model.grid(), f.grid())?;
        Ok(dot(&self.measure, f.values()))
    }

    pub fn volume(&self) -> f64 {
        self.measure.iter().sum()
    }

    pub fn total_curvature(&self) -> f64 {
        dot(&self.measure, self.scalar.values())
    }

    /// `∫ Y(R) dμ` with `Y = ∇x`.
    pub fn bourguignon_ezin(&self) -> f64 {
        let yr = self
            .model
            .conformal_field(&self.scalar)
            .expect("curvature lives on the model grid");
        dot(&self.measure, yr.values())
    }

    /// `max|R| · vol`, the size against which the integral identities are judged.
    pub fn identity_scale(&self) -> f64 {
        self.scalar.max_abs() * self.volume()
    }
}

/// `Δ_round f` for axisymmetric `f` on `Sⁿ`.
pub fn sphere_laplacian(n: usize, f: &BasicFunction) -> Result<BasicFunction> {
    RoundSphere::new(n, f.grid())?.laplacian(f)
}

/// Scalar curvature of `e^u g_round`.
pub fn sphere_scalar(n: usize, u: &BasicFunction) -> Result<BasicFunction> {
    Ok(SphereGeometry::new(n, u.clone())?.scalar)
}

/// `∫ Y(R_g) dμ_g` for `g = e^u g_round` and `Y = ∇x`.
pub fn bourguignon_ezin_integral(n: usize, u: &BasicFunction) -> Result<f64> {
    Ok(SphereGeometry::new(n, u.clone())?.bourguignon_ezin())
}

/// `h = e^{φ}(2 + Δφ)`: the curvature that makes `φ` a solution of
/// `Δφ + 2 − h e^{−φ} = 0` on `S²`.
pub fn prescribed_curvature(phi: &BasicFunction) -> Result<BasicFunction> {
    let lap = sphere_laplacian(2, phi)?;
    lap.zip_with(phi, |l, p| p.exp() * (2.0 + l))
}

/// `∫ g(∇F, ∇h) e^{−φ} dμ_{S²}` with `F = x` and `h` the scalar curvature of
/// `e^{−φ} g_{S²}`.
pub fn kazdan_warner_integral(phi: &BasicFunction) -> Result<f64> {
    let model = RoundSphere::new(2, phi.grid())?;
    let h = sphere_scalar(2, &phi.scale(-1.0))?;
    let grad = model.conformal_field(&h)?;
    let integrand = grad.zip_with(phi, |g, p| g * (-p).exp())?;
    Ok(dot(&model.weights, integrand.values()))
}

/// `J = ∫ R dμ / vol^{(n−2)/n}`, the Yamabe quotient for `n ≥ 3`.
pub fn yamabe_quotient(n: usize, u: &BasicFunction) -> Result<f64> {
    if n < 3 {
        return Err(Error::Parameter(
            "the Yamabe quotient needs dimension at least 3; use J₂ on surfaces".into(),
        ));
    }
    let geom = SphereGeometry::new(n, u.clone())?;
    let nf = n as f64;
    Ok(geom.total_curvature() / geom.volume().powf((nf - 2.0) / nf))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SphereCheck {
    BourguignonEzin,
    KazdanWarner,
    GaussBonnet,
}

#[derive(Debug, Clone, Serialize)]
pub struct SphereSample {
    pub trial: u64,
    pub coefficients: Vec<f64>,
    pub value: f64,
    /// `|value − expected| / scale`.
    pub relative: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SphereReport {
    pub check: SphereCheck,
    pub dimension: usize,
    pub trials: usize,
    pub seed: u64,
    pub nodes: usize,
    pub expected: f64,
    pub samples: Vec<SphereSample>,
    pub max_abs_deviation: f64,
    pub max_rel_deviation: f64,
}

fn collect_report(
    check: SphereCheck,
    dimension: usize,
    trials: usize,
    seed: u64,
    nodes: usize,
    expected: f64,
    samples: Vec<SphereSample>,
) -> SphereReport {
    let max_abs_deviation = samples
        .iter()
        .map(|s| (s.value - expected).abs())
        .fold(0.0, f64::max);
    let max_rel_deviation = samples.iter().map(|s| s.relative).fold(0.0, f64::max);
    SphereReport {
        check,
        dimension,
        trials,
        seed,
        nodes,
        expected,
        samples,
        max_abs_deviation,
        max_rel_deviation,
    }
}

fn trials_on<F>(trials: usize, seed: u64, f: F) -> Result<Vec<SphereSample>>
where
    F: Fn(u64, Polynomial) -> Result<SphereSample> + Sync,
{
    (0..trials as u64)
        .into_par_iter()
        .map(|k| f(k, sweep_exponent(seed, k)))
        .collect()
}

/// `∫ Y(R) dμ` over random axisymmetric metrics on `Sⁿ`, relative to `max|R|·vol`.
pub fn bourguignon_ezin_suite(
    dim: usize,
    trials: usize,
    seed: u64,
    nodes: usize,
) -> Result<SphereReport> {
    check_dim(dim)?;
    let grid = make_grid(nodes, Interval::Symmetric)?;
    let samples = trials_on(trials, seed, |k, p| {
        let geom = SphereGeometry::new(dim, p.sample(&grid))?;
        let value = geom.bourguignon_ezin();
        Ok(SphereSample {
            trial: k,
            coefficients: p.0,
            value,
            relative: value.abs() / geom.identity_scale(),
        })
    })?;
    Ok(collect_report(
        SphereCheck::BourguignonEzin,
        dim,
        trials,
        seed,
        nodes,
        0.0,
        samples,
    ))
}

/// Kazdan–Warner integral over random axisymmetric `φ` on `S²`.
pub fn kazdan_warner_suite(trials: usize, seed: u64, nodes: usize) -> Result<SphereReport> {
    let grid = make_grid(nodes, Interval::Symmetric)?;
    let samples = trials_on(trials, seed, |k, p| {
        let phi = p.sample(&grid);
        let value = kazdan_warner_integral(&phi)?;
        let geom = SphereGeometry::new(2, phi.scale(-1.0))?;
        Ok(SphereSample {
            trial: k,
            coefficients: p.0,
            value,
            relative: value.abs() / geom.identity_scale(),
        })
    })?;
    Ok(collect_report(
        SphereCheck::KazdanWarner,
        2,
        trials,
        seed,
        nodes,
        0.0,
        samples,
    ))
}

/// `∫ R dμ = 8π` on `S²` over random conformal metrics.
pub fn gauss_bonnet_suite(trials: usize, seed: u64, nodes: usize) -> Result<SphereReport> {
    let grid = make_grid(nodes, Interval::Symmetric)?;
    let expected = 8.0 * PI;
    let samples = trials_on(trials, seed, |k, p| {
        let geom = SphereGeometry::new(2, p.sample(&grid))?;
        let value = geom.total_curvature();
        Ok(SphereSample {
            trial: k,
            coefficients: p.0,
            value,
            relative: (value - expected).abs() / expected,
        })
    })?;
    Ok(collect_report(
        SphereCheck::GaussBonnet,
        2,
        trials,
        seed,
        nodes,
        expected,
        samples,
    ))
}
