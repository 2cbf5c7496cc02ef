//! The `verify` command: every property suite of the library, each reduced to
//! one deviation and compared with its bound.

use std::sync::Arc;

use serde::Serialize;

use sasaki_core::invariants::sweep_exponent;
use sasaki_core::sphere::{bourguignon_ezin_suite, gauss_bonnet_suite, kazdan_warner_suite};
use sasaki_core::{
    compute_invariant, invariance_sweep, invariant_closed, lichnerowicz_residual, make_grid,
    q3_vanishing_check, total_curvature_closed, transverse_scalar_closed, BasicFunction,
    CollocationGrid, Interval, Result, TransverseGeometry, Weights,
};

use crate::config::RunConfig;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub deviation: f64,
    pub bound: f64,
    pub pass: bool,
}

fn check(name: &'static str, deviation: f64, bound: f64) -> Check {
    Check {
        name,
        deviation,
        bound,
        // NaN deviations fail
        pass: deviation <= bound,
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| {
        if v.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(v)
        }
    })
}

/// Random metric of trial `k`; functions paired with it come from the next seed.
fn exponent(cfg: &RunConfig, grid: &Arc<CollocationGrid>, k: u64) -> BasicFunction {
    sweep_exponent(cfg.seed, k).sample(grid)
}

fn curvature_recovery(w: &Weights, grid: &Arc<CollocationGrid>) -> Result<f64> {
    let geom = TransverseGeometry::base(*w, grid)?;
    let closed: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&t| transverse_scalar_closed(w, t))
        .collect::<Result<_>>()?;
    let scale = max_of(closed.iter().map(|v| v.abs()));
    let r = geom.scalar_curvature().values();
    Ok(max_of(
        grid.interior().map(|i| (r[i] - closed[i]).abs() / scale),
    ))
}

pub fn run_all(cfg: &RunConfig) -> Result<Vec<Check>> {
    let w = cfg.weights;
    let grid = make_grid(cfg.nodes, Interval::Unit)?;
    let trials = cfg.trials as u64;
    let mut checks = Vec::new();

    let closed = invariant_closed(&w);
    let base = TransverseGeometry::base(w, &grid)?;
    checks.push(check(
        "invariant-closed-form",
        (compute_invariant(&base) - closed).abs() / closed.abs().max(1.0),
        1e-10,
    ));

    let sweep = invariance_sweep(&w, cfg.trials, cfg.seed, cfg.nodes)?;
    checks.push(check(
        "conformal-invariance",
        sweep.max_rel_deviation.unwrap_or(sweep.max_abs_deviation),
        1e-8,
    ));
    let round = invariance_sweep(&Weights::round(), cfg.trials, cfg.seed, cfg.nodes)?;
    checks.push(check(
        "conformal-invariance-round",
        round.max_abs_deviation,
        1e-8,
    ));

    checks.push(check(
        "curvature-recovery",
        curvature_recovery(&w, &grid)?,
        1e-9,
    ));

    let mut lich = Vec::new();
    let mut divergence = Vec::new();
    let mut total = Vec::new();
    let mut integrated = Vec::new();
    let expected_total = total_curvature_closed(&w);
    for k in 0..trials {
        let geom = TransverseGeometry::new(w, exponent(cfg, &grid, k))?;
        lich.push(lichnerowicz_residual(&geom).relative());

        let f = sweep_exponent(cfg.seed.wrapping_add(1), k).sample(&grid);
        let lap = geom.conformal_laplacian(&f)?;
        let size = 1.0 + geom.integrate(&f.map(f64::abs))?;
        divergence.push(geom.integrate(&lap)?.abs() / size);

        total.push((geom.total_curvature() - expected_total).abs() / expected_total.abs());

        let r_div = geom
            .scalar_curvature()
            .zip_with(&geom.divergence_z2(), |r, d| (r * d).abs())?;
        let size = geom.integrate(&r_div)? + compute_invariant(&geom).abs();
        integrated.push(q3_vanishing_check(&geom).abs() / size.max(f64::MIN_POSITIVE));
    }
    checks.push(check("lichnerowicz-identity", max_of(lich), 1e-7));
    checks.push(check("divergence-theorem", max_of(divergence), 1e-10));
    checks.push(check("total-curvature", max_of(total), 1e-8));
    checks.push(check("integrated-identity", max_of(integrated), 1e-8));

    let kw = kazdan_warner_suite(cfg.trials, cfg.seed, cfg.nodes)?;
    checks.push(check("kazdan-warner-s2", kw.max_rel_deviation, 1e-8));
    let be2 = bourguignon_ezin_suite(2, cfg.trials, cfg.seed, cfg.nodes)?;
    checks.push(check("bourguignon-ezin-s2", be2.max_rel_deviation, 1e-8));
    let be3 = bourguignon_ezin_suite(3, cfg.trials, cfg.seed, cfg.nodes)?;
    checks.push(check("bourguignon-ezin-s3", be3.max_rel_deviation, 1e-8));
    let gb = gauss_bonnet_suite(cfg.trials, cfg.seed, cfg.nodes)?;
    checks.push(check("gauss-bonnet-s2", gb.max_rel_deviation, 1e-9));

    Ok(checks)
}
