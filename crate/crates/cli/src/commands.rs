use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use sasaki_core::report::{format_f64, to_json, Document};
use sasaki_core::sphere::{
    bourguignon_ezin_suite, gauss_bonnet_suite, kazdan_warner_suite, SphereGeometry,
};
use sasaki_core::{
    compute_invariant, invariance_sweep, invariant_closed, make_grid, run_flow, FlowConfig,
    FlowSummary, Interval, InvariantReport, SphereReport, TransverseGeometry,
};

use crate::config::{Command, RunConfig};
use crate::verify::{self, Check};
use crate::{Failure, Outcome};

/// Human-readable lines go to stderr when stdout carries a report.
macro_rules! say {
    ($cfg:expr, $($arg:tt)*) => {
        if $cfg.stdout_reserved() {
            eprintln!($($arg)*)
        } else {
            println!($($arg)*)
        }
    };
}

/// Tolerance of `invariant` and `sweep`, relative to `max(1, |closed form|)`.
const INVARIANT_BOUND: f64 = 1e-8;

pub fn run(cfg: &RunConfig) -> Outcome {
    match cfg.command {
        Command::Verify => cmd_verify(cfg),
        Command::Invariant => cmd_invariant(cfg),
        Command::Sweep => cmd_sweep(cfg),
        Command::Flow => cmd_flow(cfg),
        Command::Sphere => cmd_sphere(cfg),
    }
}

fn open(path: &Path) -> io::Result<Box<dyn Write>> {
    if path.as_os_str() == "-" {
        Ok(Box::new(io::stdout().lock()))
    } else {
        Ok(Box::new(BufWriter::new(File::create(path)?)))
    }
}

fn write_json<T: Serialize>(cfg: &RunConfig, kind: &str, body: T) -> Result<(), Failure> {
    let Some(path) = &cfg.json else {
        return Ok(());
    };
    let text = to_json(&Document::new(kind, body)).map_err(|e| Failure::Output(e.to_string()))?;
    let mut out = open(path)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn write_csv<F>(cfg: &RunConfig, fill: F) -> Result<(), Failure>
where
    F: FnOnce(&mut csv::Writer<Box<dyn Write>>) -> csv::Result<()>,
{
    let Some(path) = &cfg.csv else {
        return Ok(());
    };
    let mut w = csv::Writer::from_writer(open(path)?);
    fill(&mut w).map_err(|e| Failure::Output(e.to_string()))?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct VerifyBody<'a> {
    config: &'a RunConfig,
    pass: bool,
    checks: &'a [Check],
}

fn cmd_verify(cfg: &RunConfig) -> Outcome {
    let checks = verify::run_all(cfg)?;
    let pass = checks.iter().all(|c| c.pass);
    for c in &checks {
        say!(
            cfg,
            "{} {:<28} deviation {:.3e}  bound {:.0e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.deviation,
            c.bound
        );
    }
    say!(
        cfg,
        "{} of {} checks passed",
        checks.iter().filter(|c| c.pass).count(),
        checks.len()
    );
    write_json(
        cfg,
        "verify",
        VerifyBody {
            config: cfg,
            pass,
            checks: &checks,
        },
    )?;
    write_csv(cfg, |w| {
        w.write_record(["name", "deviation", "bound", "pass"])?;
        for c in &checks {
            w.write_record([
                c.name.to_string(),
                format_f64(c.deviation),
                format_f64(c.bound),
                c.pass.to_string(),
            ])?;
        }
        Ok(())
    })?;
    Ok(pass)
}

#[derive(Serialize)]
struct InvariantBody<'a> {
    config: &'a RunConfig,
    numeric: f64,
    closed_form: f64,
    difference: f64,
    bound: f64,
    pass: bool,
}

fn cmd_invariant(cfg: &RunConfig) -> Outcome {
    let grid = make_grid(cfg.nodes, Interval::Unit)?;
    let geom = TransverseGeometry::new(cfg.weights, cfg.exponent().sample(&grid))?;
    let numeric = compute_invariant(&geom);
    let closed_form = invariant_closed(&cfg.weights);
    let difference = numeric - closed_form;
    let bound = INVARIANT_BOUND * closed_form.abs().max(1.0);
    let pass = difference.abs() <= bound;
    say!(cfg, "numeric     {numeric:.15e}");
    say!(cfg, "closed form {closed_form:.15e}");
    say!(cfg, "difference  {difference:.3e}");
    write_json(
        cfg,
        "invariant",
        InvariantBody {
            config: cfg,
            numeric,
            closed_form,
            difference,
            bound,
            pass,
        },
    )?;
    write_csv(cfg, |w| {
        // the integrand Z₂(R) against dt, i.e. including the measure density
        w.write_record(["t", "z2_scalar", "density"])?;
        let yr = geom.z2_of_scalar();
        let density = geom.measure_density();
        for ((t, y), d) in grid.nodes().iter().zip(yr.values()).zip(density.values()) {
            w.write_record([format_f64(*t), format_f64(*y), format_f64(*d)])?;
        }
        Ok(())
    })?;
    Ok(pass)
}

#[derive(Serialize)]
struct SweepBody<'a> {
    config: &'a RunConfig,
    bound: f64,
    pass: bool,
    report: &'a InvariantReport,
}

fn cmd_sweep(cfg: &RunConfig) -> Outcome {
    let report = invariance_sweep(&cfg.weights, cfg.trials, cfg.seed, cfg.nodes)?;
    let bound = INVARIANT_BOUND;
    let deviation = report.max_rel_deviation.unwrap_or(report.max_abs_deviation);
    let pass = deviation <= bound;
    say!(cfg, "closed form        {:.15e}", report.closed_form);
    say!(cfg, "samples            {}", report.samples.len());
    say!(cfg, "max abs deviation  {:.3e}", report.max_abs_deviation);
    match report.max_rel_deviation {
        Some(r) => say!(cfg, "max rel deviation  {r:.3e}"),
        None => say!(cfg, "max rel deviation  n/a (closed form is zero)"),
    }
    write_json(
        cfg,
        "sweep",
        SweepBody {
            config: cfg,
            bound,
            pass,
            report: &report,
        },
    )?;
    write_csv(cfg, |w| {
        w.write_record(["trial", "value"])?;
        for s in &report.samples {
            let trial = s
                .trial
                .map_or_else(|| "base".to_string(), |k| k.to_string());
            w.write_record([trial, format_f64(s.value)])?;
        }
        Ok(())
    })?;
    Ok(pass)
}

#[derive(Serialize)]
struct FlowBody<'a> {
    config: &'a RunConfig,
    summary: &'a FlowSummary,
}

fn cmd_flow(cfg: &RunConfig) -> Outcome {
    let mut flow = FlowConfig::new(cfg.weights);
    flow.nodes = cfg.nodes;
    flow.dt = cfg.dt;
    flow.max_steps = cfg.max_steps;
    flow.seed = cfg.seed;
    flow.initial = cfg.u_coeffs.clone().map(sasaki_core::Polynomial);
    let trace = run_flow(&flow)?;
    let summary = trace.summary();
    say!(cfg, "termination     {:?}", summary.termination);
    say!(cfg, "steps           {}", summary.steps);
    say!(cfg, "final residual  {:.6e}", summary.final_residual);
    say!(cfg, "final r         {:.12}", summary.final_r);
    say!(
        cfg,
        "invariant range [{:.12e}, {:.12e}]",
        summary.invariant_min,
        summary.invariant_max
    );
    write_json(
        cfg,
        "flow",
        FlowBody {
            config: cfg,
            summary: &summary,
        },
    )?;
    if let Some(path) = &cfg.csv {
        trace.write_csv(open(path)?)?;
    }
    Ok(true)
}

#[derive(Serialize)]
struct SingleMetric {
    bourguignon_ezin_s2: f64,
    bourguignon_ezin_s3: f64,
    total_curvature_s2: f64,
}

#[derive(Serialize)]
struct Suite {
    bound: f64,
    pass: bool,
    report: SphereReport,
}

impl Suite {
    fn new(report: SphereReport, bound: f64) -> Self {
        Self {
            bound,
            pass: report.max_rel_deviation <= bound,
            report,
        }
    }
}

#[derive(Serialize)]
struct SphereBody<'a> {
    config: &'a RunConfig,
    pass: bool,
    suites: &'a [Suite],
    #[serde(skip_serializing_if = "Option::is_none")]
    metric: Option<SingleMetric>,
}

fn cmd_sphere(cfg: &RunConfig) -> Outcome {
    let suites = [
        Suite::new(kazdan_warner_suite(cfg.trials, cfg.seed, cfg.nodes)?, 1e-8),
        Suite::new(
            bourguignon_ezin_suite(2, cfg.trials, cfg.seed, cfg.nodes)?,
            1e-8,
        ),
        Suite::new(
            bourguignon_ezin_suite(3, cfg.trials, cfg.seed, cfg.nodes)?,
            1e-8,
        ),
        Suite::new(gauss_bonnet_suite(cfg.trials, cfg.seed, cfg.nodes)?, 1e-9),
    ];
    let pass = suites.iter().all(|s| s.pass);
    for s in &suites {
        say!(
            cfg,
            "{} {:<18} S{}  max rel {:.3e}  bound {:.0e}",
            if s.pass { "PASS" } else { "FAIL" },
            format!("{:?}", s.report.check),
            s.report.dimension,
            s.report.max_rel_deviation,
            s.bound
        );
    }
    let metric = match &cfg.u_coeffs {
        Some(_) => {
            let grid = make_grid(cfg.nodes, Interval::Symmetric)?;
            let u = cfg.exponent().sample(&grid);
            let s2 = SphereGeometry::new(2, u.clone())?;
            let s3 = SphereGeometry::new(3, u)?;
            Some(SingleMetric {
                bourguignon_ezin_s2: s2.bourguignon_ezin(),
                bourguignon_ezin_s3: s3.bourguignon_ezin(),
                total_curvature_s2: s2.total_curvature(),
            })
        }
        None => None,
    };
    write_json(
        cfg,
        "sphere",
        SphereBody {
            config: cfg,
            pass,
            suites: &suites,
            metric,
        },
    )?;
    write_csv(cfg, |w| {
        w.write_record(["check", "dimension", "trial", "value", "relative"])?;
        for Suite { report: r, .. } in &suites {
            let name = format!("{:?}", r.check);
            for s in &r.samples {
                w.write_record([
                    name.clone(),
                    r.dimension.to_string(),
                    s.trial.to_string(),
                    format_f64(s.value),
                    format_f64(s.relative),
                ])?;
            }
        }
        Ok(())
    })?;
    Ok(pass)
}
