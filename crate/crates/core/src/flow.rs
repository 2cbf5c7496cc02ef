//! The codimension-two transverse Yamabe functional and its normalized
//! gradient flow `∂u/∂s = r − R^T_u`, with `r` the average curvature.
//!
//! Along the flow `dJ₂/ds = −∫ (R^T_u − r)² dμ_u`, the total curvature is
//! fixed and so is the invariant `I_{Z₂}`. When `I_{Z₂} ≠ 0` no stationary
//! point with constant curvature exists and the residual cannot reach zero.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::calculus::{
    dot, make_grid, trial_rng, BasicFunction, CollocationGrid, Interval, Polynomial,
    SasakianOperators,
};
use crate::conformal::TransverseGeometry;
use crate::error::{Error, Result};
use crate::report;
use crate::sasakian::Weights;

/// A run is declared diverged once `sup|u|` exceeds this.
pub const DIVERGENCE_BOUND: f64 = 50.0;
/// Step halvings allowed per step before the run is declared diverged.
pub const MAX_HALVINGS: u32 = 10;
/// Fraction of the explicit-Euler stability limit a step may use.
pub const STABILITY_SAFETY: f64 = 0.9;
/// Relative slack when comparing successive `J₂` values; covers rounding in
/// the quadrature once the decrease per step drops below machine precision.
pub const J2_ROUNDING_SLACK: f64 = 1e-12;

/// Degree of the random initial exponent.
pub const INITIAL_DEGREE: usize = 8;

/// `J₂(u) = ∫(−½ u Δ_B⁰u + u R₀) dμ₀ − (∫R₀ dμ₀) log ∫e^u dμ₀`.
pub fn functional_j2(w: &Weights, u: &BasicFunction) -> Result<f64> {
    let ops = SasakianOperators::new(*w, u.grid())?;
    let r0 = ops.frame_scalar_curvature();
    let lap = ops.laplacian_values(u.values());
    Ok(j2_from_parts(
        &ops.measure_values(None),
        r0.values(),
        u.values(),
        &lap,
    ))
}

fn j2_from_parts(m0: &[f64], r0: &[f64], u: &[f64], lap_u: &[f64]) -> f64 {
    let mut energy = 0.0;
    let mut total = 0.0;
    let mut vol = 0.0;
    for i in 0..u.len() {
        energy += m0[i] * (-0.5 * u[i] * lap_u[i] + u[i] * r0[i]);
        total += m0[i] * r0[i];
        vol += m0[i] * u[i].exp();
    }
    energy - total * vol.ln()
}

/// `−Δ_B⁰u + R₀ − c e^u`; vanishes exactly when `e^u g_a` has constant
/// transverse curvature `c`.
pub fn yamabe_residual(geom: &TransverseGeometry, c: f64) -> BasicFunction {
    let u = geom.conformal_exponent().values();
    let lap = geom.operators().laplacian_values(u);
    let values = (0..u.len())
        .map(|i| -lap[i] + geom.base_scalar().values()[i] - c * u[i].exp())
        .collect();
    BasicFunction::new(Arc::clone(geom.grid()), values).expect("finite residual")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowConfig {
    pub weights: Weights,
    pub nodes: usize,
    /// Largest step attempted, in flow-time units.
    pub dt: f64,
    pub max_steps: usize,
    pub residual_target: f64,
    pub seed: u64,
    /// Coefficient amplitude of the random initial exponent.
    pub amplitude: f64,
    /// Explicit initial exponent; overrides the random one when set.
    pub initial: Option<Polynomial>,
    pub record_every: usize,
}

impl FlowConfig {
    pub fn new(weights: Weights) -> Self {
        Self {
            weights,
            nodes: 32,
            dt: 2e-4,
            max_steps: 20_000,
            residual_target: 1e-6,
            seed: 1,
            amplitude: 0.2,
            initial: None,
            record_every: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.max_steps < 1 {
            return bad("max_steps must be at least 1".into());
        }
        if !(self.residual_target.is_finite() && self.residual_target > 0.0) {
            return bad(format!(
                "residual_target must be positive, got {}",
                self.residual_target
            ));
        }
        if self.record_every < 1 {
            return bad("record_every must be at least 1".into());
        }
        Ok(())
    }

    /// The initial exponent before volume normalization.
    pub fn initial_exponent(&self) -> Result<Polynomial> {
        match &self.initial {
            Some(p) => Ok(p.clone()),
            None if self.amplitude == 0.0 => Ok(Polynomial::zero()),
            None => {
                Polynomial::random(&mut trial_rng(self.seed, 0), INITIAL_DEGREE, self.amplitude)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    StepLimit,
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowRecord {
    pub step: usize,
    pub time: f64,
    pub j2: f64,
    pub sup_residual: f64,
    pub r: f64,
    pub invariant: f64,
    pub total_curvature: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowTrace {
    pub config: FlowConfig,
    pub records: Vec<FlowRecord>,
    pub termination: Termination,
    pub steps: usize,
    pub halvings: u64,
    /// Final exponent `u` at the grid nodes.
    #[serde(skip)]
    pub final_exponent: Vec<f64>,
}

impl FlowTrace {
    pub fn last(&self) -> &FlowRecord {
        self.records.last().expect("a trace always has a record")
    }

    /// CSV with columns `step, J2, sup_residual, r, invariant`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "J2", "sup_residual", "r", "invariant"])?;
        for rec in &self.records {
            w.write_record([
                rec.step.to_string(),
                report::format_f64(rec.j2),
                report::format_f64(rec.sup_residual),
                report::format_f64(rec.r),
                report::format_f64(rec.invariant),
            ])?;
        }
        w.flush()
    }

    pub fn summary(&self) -> FlowSummary {
        let last = self.last();
        let (lo, hi) = self
            .records
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r.invariant), hi.max(r.invariant))
            });
        FlowSummary {
            config: self.config.clone(),
            termination: self.termination,
            steps: self.steps,
            flow_time: last.time,
            final_residual: last.sup_residual,
            final_r: last.r,
            final_j2: last.j2,
            invariant_min: lo,
            invariant_max: hi,
            records: self.records.len(),
            halvings: self.halvings,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowSummary {
    pub config: FlowConfig,
    pub termination: Termination,
    pub steps: usize,
    pub flow_time: f64,
    pub final_residual: f64,
    pub final_r: f64,
    pub final_j2: f64,
    pub invariant_min: f64,
    pub invariant_max: f64,
    pub records: usize,
    pub halvings: u64,
}

/// Precomputed data shared by every step of one run.
struct FlowSystem {
    grid: Arc<CollocationGrid>,
    ops: SasakianOperators,
    laplacian: DMatrix<f64>,
    base_scalar: Vec<f64>,
    base_measure: Vec<f64>,
    base_volume: f64,
    spectral_radius: f64,
}

/// Curvature data of the current iterate.
struct Evaluation {
    scalar: Vec<f64>,
    measure: Vec<f64>,
    r: f64,
    volume: f64,
    sup_residual: f64,
}

impl FlowSystem {
    fn new(cfg: &FlowConfig) -> Result<Self> {
        let grid = make_grid(cfg.nodes, Interval::Unit)?;
        let ops = SasakianOperators::new(cfg.weights, &grid)?;
        let laplacian = ops.laplacian_matrix();
        let spectral_radius = laplacian
            .clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let base_scalar = ops.frame_scalar_curvature().into_values();
        let base_measure = ops.measure_values(None);
        let base_volume = base_measure.iter().sum();
        Ok(Self {
            grid,
            ops,
            laplacian,
            base_scalar,
            base_measure,
            base_volume,
            spectral_radius,
        })
    }

    fn lap(&self, u: &[f64]) -> Vec<f64> {
        (&self.laplacian * DVector::from_column_slice(u))
            .data
            .into()
    }

    fn j2(&self, u: &[f64]) -> f64 {
        j2_from_parts(&self.base_measure, &self.base_scalar, u, &self.lap(u))
    }

    /// Shifts `u` by a constant so that `∫ e^u dμ₀` equals the base volume.
    fn normalize(&self, u: &mut [f64]) {
        let vol = dot(
            &self.base_measure,
            &u.iter().map(|v| v.exp()).collect::<Vec<_>>(),
        );
        let shift = (vol / self.base_volume).ln();
        for v in u.iter_mut() {
            *v -= shift;
        }
    }

    fn evaluate(&self, u: &[f64]) -> Evaluation {
        let lap = self.lap(u);
        let scalar: Vec<f64> = (0..u.len())
            .map(|i| (-u[i]).exp() * (-lap[i] + self.base_scalar[i]))
            .collect();
        let measure: Vec<f64> = self
            .base_measure
            .iter()
            .zip(u)
            .map(|(m, u)| m * u.exp())
            .collect();
        let volume: f64 = measure.iter().sum();
        let r = dot(&measure, &scalar) / volume;
        let sup_residual = scalar.iter().fold(0.0_f64, |m, s| m.max((s - r).abs()));
        Evaluation {
            scalar,
            measure,
            r,
            volume,
            sup_residual,
        }
    }

    fn record(&self, step: usize, time: f64, j2: f64, e: &Evaluation) -> FlowRecord {
        let z2r = self.ops.z2_values(&e.scalar);
        FlowRecord {
            step,
            time,
            j2,
            sup_residual: e.sup_residual,
            r: e.r,
            invariant: dot(&e.measure, &z2r),
            total_curvature: dot(&e.measure, &e.scalar),
            volume: e.volume,
        }
    }

    /// Largest explicit-Euler step that keeps the linearized flow stable.
    fn stable_step(&self, u: &[f64], e: &Evaluation) -> f64 {
        let max_exp = u.iter().fold(0.0_f64, |m, v| m.max((-v).exp()));
        let max_r = e.scalar.iter().fold(0.0_f64, |m, s| m.max(s.abs()));
        2.0 * STABILITY_SAFETY / (self.spectral_radius * max_exp + max_r)
    }
}

/// Runs the normalized flow from the configured initial exponent.
pub fn run_flow(cfg: &FlowConfig) -> Result<FlowTrace> {
    cfg.validate()?;
    let sys = FlowSystem::new(cfg)?;
    let mut u = cfg.initial_exponent()?.sample(&sys.grid).into_values();
    sys.normalize(&mut u);

    let mut j = sys.j2(&u);
    let mut time = 0.0;
    let mut halvings = 0u64;
    let mut records = Vec::new();
    let mut step = 0usize;

    let termination = loop {
        let e = sys.evaluate(&u);
        let due = step.is_multiple_of(cfg.record_every);
        if e.sup_residual <= cfg.residual_target {
            records.push(sys.record(step, time, j, &e));
            break Termination::Converged;
        }
        if step >= cfg.max_steps {
            records.push(sys.record(step, time, j, &e));
            break Termination::StepLimit;
        }
        if due {
            records.push(sys.record(step, time, j, &e));
        }

        let limit = sys.stable_step(&u, &e);
        let slack = J2_ROUNDING_SLACK * (1.0 + j.abs());
        let mut h = cfg.dt;
        let mut accepted = None;
        for attempt in 0..=MAX_HALVINGS {
            if attempt > 0 {
                halvings += 1;
            }
            if h <= limit {
                let mut trial: Vec<f64> = u
                    .iter()
                    .zip(&e.scalar)
                    .map(|(u, s)| u + h * (e.r - s))
                    .collect();
                sys.normalize(&mut trial);
                if trial
                    .iter()
                    .all(|v| v.is_finite() && v.abs() <= DIVERGENCE_BOUND)
                {
                    let jt = sys.j2(&trial);
                    if jt <= j + slack {
                        accepted = Some((trial, jt));
                        break;
                    }
                }
            }
            h *= 0.5;
        }
        match accepted {
            Some((next, jn)) => {
                u = next;
                j = jn;
                time += h;
                step += 1;
            }
            None => {
                if !due {
                    records.push(sys.record(step, time, j, &e));
                }
                break Termination::Diverged;
            }
        }
    };

    Ok(FlowTrace {
        config: cfg.clone(),
        records,
        termination,
        steps: step,
        halvings,
        final_exponent: u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sasakian::{scalar_at, total_curvature_closed, volume_closed};
    use std::f64::consts::PI;

    fn w(a1: f64, a2: f64) -> Weights {
        Weights::new(a1, a2).unwrap()
    }

    fn unit(n: usize) -> Arc<CollocationGrid> {
        make_grid(n, Interval::Unit).unwrap()
    }

    #[test]
    fn j2_at_zero_on_round_sphere() {
        let g = unit(32);
        let j = functional_j2(&Weights::round(), &BasicFunction::zero(&g)).unwrap();
        let expected = -16.0 * PI * PI * (2.0 * PI * PI).ln();
        assert!((j - expected).abs() <= 1e-12 * expected.abs());
    }

    #[test]
    fn j2_shift_invariant() {
        let g = unit(48);
        let a = w(2.0, 1.0);
        let u = crate::calculus::random_basic(&g, 4, 8, 0.5).unwrap();
        let j = functional_j2(&a, &u).unwrap();
        let js = functional_j2(&a, &u.map(|v| v + 1.3)).unwrap();
        assert!((j - js).abs() <= 1e-10 * j.abs());
        let jc = functional_j2(&Weights::round(), &BasicFunction::constant(&g, 0.8)).unwrap();
        let j0 = functional_j2(&Weights::round(), &BasicFunction::zero(&g)).unwrap();
        assert!((jc - j0).abs() <= 1e-10 * j0.abs());
    }

    /// Gauss–Legendre on [0, 1] with 5 points per panel.
    fn gl(f: impl Fn(f64) -> f64) -> f64 {
        let x = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        let wt = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let panels = 200;
        let h = 1.0 / panels as f64;
        (0..panels)
            .map(|p| {
                let mid = (p as f64 + 0.5) * h;
                (0..5).map(|k| wt[k] * f(mid + 0.5 * h * x[k])).sum::<f64>() * 0.5 * h
            })
            .sum()
    }

    #[test]
    fn j2_matches_quadrature_oracle_for_linear_exponent() {
        let a = w(2.0, 1.0);
        let g = unit(64);
        let u = BasicFunction::from_fn(&g, |t| 0.1 * t);
        let got = functional_j2(&a, &u).unwrap();
        // u = 0.1t, so Δu = 0.1·[4σ(1−2t) − 4σ′t(1−t)] with σ = 1 + t, σ′ = 1.
        let sigma = |t: f64| 1.0 + t;
        let m = |t: f64| 2.0 * PI * PI / sigma(t).powi(2);
        let lap = |t: f64| 0.1 * (4.0 * sigma(t) * (1.0 - 2.0 * t) - 4.0 * t * (1.0 - t));
        let energy = gl(|t| (-0.5 * 0.1 * t * lap(t) + 0.1 * t * scalar_at(&a, t)) * m(t));
        let total = gl(|t| scalar_at(&a, t) * m(t));
        let vol = gl(|t| (0.1 * t).exp() * m(t));
        let oracle = energy - total * vol.ln();
        assert!(got.is_finite());
        assert!(
            (got - oracle).abs() <= 1e-10 * oracle.abs(),
            "{got} vs {oracle}"
        );
    }

    #[test]
    fn residual_examples() {
        let g = unit(32);
        let round = TransverseGeometry::base(Weights::round(), &g).unwrap();
        assert!(yamabe_residual(&round, 8.0).max_abs() <= 1e-9);
        let weighted = TransverseGeometry::base(w(2.0, 1.0), &g).unwrap();
        assert!(yamabe_residual(&weighted, 12.0).max_abs() > 1.0);
    }

    #[test]
    fn residual_consistent_with_conformal_curvature() {
        let g = unit(64);
        let u = crate::calculus::random_basic(&g, 21, 8, 0.5).unwrap();
        let geom = TransverseGeometry::new(w(3.0, 2.0), u.clone()).unwrap();
        let lhs = yamabe_residual(&geom, 0.0);
        let rhs = geom
            .scalar_curvature()
            .zip_with(&u, |r, u| u.exp() * r)
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-9 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn config_validation() {
        let mut c = FlowConfig::new(Weights::round());
        assert!(c.validate().is_ok());
        c.dt = 0.0;
        assert!(run_flow(&c).is_err());
        let mut c = FlowConfig::new(Weights::round());
        c.max_steps = 0;
        assert!(c.validate().is_err());
        let mut c = FlowConfig::new(Weights::round());
        c.residual_target = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn round_start_converges_immediately() {
        let mut c = FlowConfig::new(Weights::round());
        c.amplitude = 0.0;
        let t = run_flow(&c).unwrap();
        assert_eq!(t.termination, Termination::Converged);
        assert_eq!(t.steps, 0);
        assert_eq!(t.records.len(), 1);
    }

    #[test]
    fn round_flow_converges_to_eight() {
        let c = FlowConfig::new(Weights::round());
        let t = run_flow(&c).unwrap();
        assert_eq!(t.termination, Termination::Converged, "{:?}", t.summary());
        let last = t.last();
        assert!((last.r - 8.0).abs() <= 1e-9);
        assert!(last.sup_residual <= 1e-6);
        for pair in t.records.windows(2) {
            assert!(pair[1].j2 <= pair[0].j2 + J2_ROUNDING_SLACK * (1.0 + pair[0].j2.abs()));
        }
    }

    #[test]
    fn weighted_flow_conserves_invariants() {
        let mut c = FlowConfig::new(w(2.0, 1.0));
        c.max_steps = 2_000;
        let t = run_flow(&c).unwrap();
        assert_eq!(t.termination, Termination::StepLimit);
        let inv = -6.0 * PI * PI;
        let tot = total_curvature_closed(&c.weights);
        for rec in &t.records {
            assert!((rec.invariant - inv).abs() <= 1e-6 * inv.abs());
            assert!((rec.total_curvature - tot).abs() <= 1e-8 * tot);
            assert!((rec.r - tot / rec.volume).abs() <= 1e-12 * rec.r);
            assert!((rec.volume - volume_closed(&c.weights)).abs() <= 1e-10 * rec.volume);
            assert!(rec.sup_residual > 0.1);
        }
    }

    #[test]
    fn huge_step_reports_divergence() {
        for a in [Weights::round(), w(2.0, 1.0)] {
            let mut c = FlowConfig::new(a);
            c.dt = 10.0;
            let t = run_flow(&c).unwrap();
            assert_eq!(t.termination, Termination::Diverged);
            assert!(!t.records.is_empty());
        }
    }

    #[test]
    fn csv_has_fixed_columns() {
        let mut c = FlowConfig::new(Weights::round());
        c.max_steps = 3;
        c.record_every = 1;
        let t = run_flow(&c).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "step,J2,sup_residual,r,invariant");
        assert_eq!(lines.count(), t.records.len());
    }
}
