//! The conformal integral invariant `I_{Z₂}(g) = ∫ Z₂(R^T_g) dμ_g` and the
//! identities behind its invariance.
//!
//! `Z₁` is tangent to the level tori of `t`, so it annihilates every basic
//! function here and `I_{Z₁} ≡ 0`; only `Y = Z₂` carries information.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{trial_rng, BasicFunction, CollocationGrid, Polynomial, SasakianOperators};
use crate::conformal::TransverseGeometry;
use crate::error::{Error, Result};
use crate::sasakian::{invariant_closed, z2_scalar_closed, Weights};

/// Degree of the random conformal exponents used by the sweeps.
pub const SWEEP_DEGREE: usize = 8;
/// Coefficient amplitude of the random conformal exponents.
pub const SWEEP_AMPLITUDE: f64 = 0.5;

/// `I_{Z₂}` of the metric `e^u g_a`, by 1-D quadrature in `t`.
pub fn compute_invariant(geom: &TransverseGeometry) -> f64 {
    geom.integrate_values(geom.z2_of_scalar().values())
}

/// `I_{Z₂}(g_a)` integrating the closed form of `Z₂(R^T)` on the grid.
pub fn invariant_from_closed_integrand(w: &Weights, grid: &Arc<CollocationGrid>) -> Result<f64> {
    let ops = SasakianOperators::new(*w, grid)?;
    let f = BasicFunction::from_fn(grid, |t| {
        z2_scalar_closed(w, t).expect("grid nodes lie in [0, 1]")
    });
    ops.integrate(None, &f)
}

/// Residual of the Lichnerowicz-type identity for `Y = Z₂` in codimension 2:
/// `Y(R^T) + Δ_B div(Y) + R^T div(Y)`, all in the metric `e^u g_a`.
#[derive(Debug, Clone)]
pub struct LichnerowiczResidual {
    pub profile: BasicFunction,
    /// `max_j |residual_j|`.
    pub max_node: f64,
    /// `(∫ residual² dμ_u)^{1/2}`.
    pub l2: f64,
    /// `max_j |R^T · div(Y)|_j`, the natural size of the cancelling terms.
    pub scale: f64,
}

impl LichnerowiczResidual {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.max_node / self.scale
        } else {
            self.max_node
        }
    }
}

pub fn lichnerowicz_residual(geom: &TransverseGeometry) -> LichnerowiczResidual {
    let yr = geom.z2_of_scalar();
    let div = geom.divergence_z2();
    let lap_div = geom.conformal_laplacian_values(div.values());
    let r = geom.scalar_curvature().values();
    let r_div: Vec<f64> = r.iter().zip(div.values()).map(|(a, b)| a * b).collect();
    let values: Vec<f64> = (0..r.len())
        .map(|i| yr.values()[i] + lap_div[i] + r_div[i])
        .collect();
    let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    let profile = BasicFunction::new(Arc::clone(geom.grid()), values)
        .expect("residual built from finite profiles");
    LichnerowiczResidual {
        max_node: profile.max_abs(),
        l2: geom.integrate_values(&sq).max(0.0).sqrt(),
        scale: r_div.iter().fold(0.0, |m, v| m.max(v.abs())),
        profile,
    }
}

/// Integrated form of the identity:
/// `∫ (Δ_B div Y + R^T div Y) dμ + I`, which must vanish.
///
/// With `q = 2` the factor `(q/2 − 1)` in front of `I` is zero, so this is a
/// consistency check between two computations of `I` rather than a vanishing
/// statement; the genuine `q ≥ 3` vanishing lives in [`crate::sphere`].
pub fn q3_vanishing_check(geom: &TransverseGeometry) -> f64 {
    let div = geom.divergence_z2();
    let lap_div = geom.conformal_laplacian_values(div.values());
    let terms: Vec<f64> = lap_div
        .iter()
        .zip(geom.scalar_curvature().values())
        .zip(div.values())
        .map(|((l, r), d)| l + r * d)
        .collect();
    geom.integrate_values(&terms) + compute_invariant(geom)
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantSample {
    /// `None` for the base metric `u = 0`, else the trial index.
    pub trial: Option<u64>,
    /// Monomial coefficients of `u(t)`, lowest degree first.
    pub coefficients: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub weights: Weights,
    pub trials: usize,
    pub seed: u64,
    pub nodes: usize,
    pub closed_form: f64,
    pub samples: Vec<InvariantSample>,
    pub max_abs_deviation: f64,
    /// `max_abs_deviation / |closed_form|`; absent when the closed form is zero.
    pub max_rel_deviation: Option<f64>,
}

impl InvariantReport {
    fn from_samples(
        weights: Weights,
        trials: usize,
        seed: u64,
        nodes: usize,
        samples: Vec<InvariantSample>,
    ) -> Self {
        let closed_form = invariant_closed(&weights);
        let max_abs_deviation = samples
            .iter()
            .map(|s| (s.value - closed_form).abs())
            .fold(0.0, f64::max);
        let max_rel_deviation = (closed_form != 0.0).then(|| max_abs_deviation / closed_form.abs());
        Self {
            weights,
            trials,
            seed,
            nodes,
            closed_form,
            samples,
            max_abs_deviation,
            max_rel_deviation,
        }
    }
}

/// Random conformal exponent of trial `trial` in a run seeded by `seed`.
pub fn sweep_exponent(seed: u64, trial: u64) -> Polynomial {
    Polynomial::random(&mut trial_rng(seed, trial), SWEEP_DEGREE, SWEEP_AMPLITUDE)
        .expect("sweep degree and amplitude are in range")
}

/// Evaluates `I_{Z₂}` at the base metric and at `trials` random metrics of the
/// basic conformal class.
pub fn invariance_sweep(
    w: &Weights,
    trials: usize,
    seed: u64,
    n: usize,
) -> Result<InvariantReport> {
    if trials == 0 {
        return Err(Error::Config(
            "an invariance sweep needs at least one trial".into(),
        ));
    }
    let grid = crate::calculus::make_grid(n, crate::calculus::Interval::Unit)?;
    let ops = SasakianOperators::new(*w, &grid)?;
    let base_scalar = ops.frame_scalar_curvature();

    let evaluate = |trial: Option<u64>, p: Polynomial| -> Result<InvariantSample> {
        let u = p.sample(&grid);
        let geom = TransverseGeometry::assemble(ops.clone(), u, base_scalar.clone())?;
        Ok(InvariantSample {
            trial,
            coefficients: p.0,
            value: compute_invariant(&geom),
        })
    };

    let mut samples = vec![evaluate(None, Polynomial::zero())?];
    let random: Result<Vec<_>> = (0..trials as u64)
        .into_par_iter()
        .map(|k| evaluate(Some(k), sweep_exponent(seed, k)))
        .collect();
    samples.extend(random?);
    Ok(InvariantReport::from_samples(*w, trials, seed, n, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{make_grid, random_basic, Interval};
    use std::f64::consts::PI;

    fn w(a1: f64, a2: f64) -> Weights {
        Weights::new(a1, a2).unwrap()
    }

    fn unit(n: usize) -> Arc<CollocationGrid> {
        make_grid(n, Interval::Unit).unwrap()
    }

    #[test]
    fn base_invariant_is_minus_six_pi_squared() {
        let geom = TransverseGeometry::base(w(2.0, 1.0), &unit(64)).unwrap();
        let i = compute_invariant(&geom);
        assert!((i + 6.0 * PI * PI).abs() <= 1e-10 * 6.0 * PI * PI, "{i}");
    }

    #[test]
    fn round_invariant_vanishes_for_any_exponent() {
        let g = unit(64);
        for seed in 0..5 {
            let u = random_basic(&g, seed, 8, 0.5).unwrap();
            let geom = TransverseGeometry::new(Weights::round(), u).unwrap();
            assert!(compute_invariant(&geom).abs() <= 1e-8);
        }
    }

    #[test]
    fn cubic_exponent_keeps_invariant() {
        let g = unit(64);
        let u = BasicFunction::from_fn(&g, |t| 0.3 * t * t * (1.0 - t));
        let geom = TransverseGeometry::new(w(2.0, 1.0), u).unwrap();
        let i = compute_invariant(&geom);
        assert!((i + 6.0 * PI * PI).abs() <= 1e-8 * 6.0 * PI * PI);
    }

    #[test]
    fn operator_chain_agrees_with_closed_integrand() {
        for a in [w(2.0, 1.0), w(3.0, 2.0), w(1.0, 5.0)] {
            let g = unit(64);
            let chain = compute_invariant(&TransverseGeometry::base(a, &g).unwrap());
            let shortcut = invariant_from_closed_integrand(&a, &g).unwrap();
            assert!((chain - shortcut).abs() <= 1e-9 * shortcut.abs(), "{a:?}");
        }
    }

    #[test]
    fn invariant_scales_inverse_square() {
        let g = unit(64);
        let i1 = compute_invariant(&TransverseGeometry::base(w(2.0, 1.0), &g).unwrap());
        let i2 = compute_invariant(&TransverseGeometry::base(w(4.0, 2.0), &g).unwrap());
        assert!((i2 - i1 / 4.0).abs() <= 1e-8 * (i1 / 4.0).abs());
    }

    #[test]
    fn round_residual_cancels_exactly() {
        let geom = TransverseGeometry::base(Weights::round(), &unit(32)).unwrap();
        let res = lichnerowicz_residual(&geom);
        assert!(res.max_node <= 1e-10, "{}", res.max_node);
        assert!(res.scale > 10.0);
    }

    #[test]
    fn weighted_residual_small() {
        let g = unit(64);
        let base = TransverseGeometry::base(w(2.0, 1.0), &g).unwrap();
        assert!(lichnerowicz_residual(&base).relative() <= 1e-7);
        for seed in 0..3 {
            let u = random_basic(&g, seed, 8, 0.5).unwrap();
            let geom = TransverseGeometry::new(w(2.0, 1.0), u).unwrap();
            let res = lichnerowicz_residual(&geom);
            assert!(res.relative() <= 1e-7, "seed {seed}: {}", res.relative());
            assert!(res.l2.is_finite());
        }
    }

    #[test]
    fn integrated_identity_consistent() {
        let g = unit(64);
        assert!(
            q3_vanishing_check(&TransverseGeometry::base(w(2.0, 1.0), &g).unwrap()).abs() <= 1e-7
        );
        for seed in 0..3 {
            let u = random_basic(&g, seed, 8, 0.5).unwrap();
            let round = TransverseGeometry::new(Weights::round(), u.clone()).unwrap();
            assert!(q3_vanishing_check(&round).abs() <= 1e-8);
            let geom = TransverseGeometry::new(w(3.0, 2.0), u).unwrap();
            assert!(q3_vanishing_check(&geom).abs() <= 1e-7);
        }
    }

    #[test]
    fn sweep_is_deterministic_and_tight() {
        let a = invariance_sweep(&w(2.0, 1.0), 4, 9, 64).unwrap();
        let b = invariance_sweep(&w(2.0, 1.0), 4, 9, 64).unwrap();
        assert_eq!(a.samples.len(), 5);
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.value.to_bits(), y.value.to_bits());
        }
        assert!(a.max_rel_deviation.unwrap() <= 1e-8);
        assert_eq!(a.closed_form, invariant_closed(&w(2.0, 1.0)));
        let worst = a
            .samples
            .iter()
            .map(|s| (s.value - a.closed_form).abs())
            .fold(0.0, f64::max);
        assert_eq!(worst, a.max_abs_deviation);
    }

    #[test]
    fn single_trial_sweep_base_sample() {
        let r = invariance_sweep(&w(2.0, 1.0), 1, 0, 64).unwrap();
        assert_eq!(r.samples[0].trial, None);
        assert!((r.samples[0].value - r.closed_form).abs() <= 1e-12 * r.closed_form.abs());
        let round = invariance_sweep(&Weights::round(), 1, 0, 64).unwrap();
        assert_eq!(round.max_rel_deviation, None);
        assert!(invariance_sweep(&Weights::round(), 0, 0, 64).is_err());
    }
}
