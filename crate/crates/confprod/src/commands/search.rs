use std::time::Instant;

use confprod_core::search::{minimize_with, Objective, SearchResult, Termination, TraceRecord};
use serde_json::json;

use crate::error::CliResult;
use crate::report::{Accumulator, Report};
use crate::search_config::SearchSetup;

/// Report plus the JSON-lines trace, one object per iteration.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub report: Report,
    pub trace: String,
    pub result: SearchResult,
}

fn trace_line(r: &TraceRecord) -> String {
    let v = json!({
        "iter": r.iter,
        "objective": r.objective,
        "grad_norm": r.grad_norm,
        "step": r.step,
        "split_diag": r.split_diag,
    });
    let mut s = v.to_string();
    s.push('\n');
    s
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::ObjectiveBelowTolerance => "objective_below_tolerance",
        Termination::GradientBelowTolerance => "gradient_below_tolerance",
        Termination::MaxIterations => "max_iterations",
        Termination::LineSearchStalled => "line_search_stalled",
    }
}

pub fn cmd_search(setup: &SearchSetup) -> CliResult<SearchOutcome> {
    let started = Instant::now();
    let cfg = &setup.config;
    let mut trace = String::new();
    let result = minimize_with(cfg, &setup.start, |r| trace.push_str(&trace_line(r)))?;
    let obj = Objective::new(cfg)?;
    let diag = obj.split_diagnostic(&result.param);
    let (f1, f2) = result.param.to_exprs();

    let mut report = Report::new("search", setup.digest.clone());
    report.tolerances = [
        ("objective".to_string(), cfg.tolerance),
        ("gradient".to_string(), cfg.grad_tolerance),
    ]
    .into_iter()
    .collect();
    let nodes = obj.nodes().len();
    let mut o = Accumulator::new("objective");
    o.push(result.objective);
    let mut row = o.asserted(cfg.tolerance);
    row.points = nodes;
    // gradient-norm termination counts as convergence as well
    row.pass = result.converged();
    report.checks.push(row);
    let mut m = Accumulator::new("monotone_violation");
    let worst = result
        .trace
        .windows(2)
        .fold(0.0f64, |w, p| w.max(p[1].objective - p[0].objective));
    m.push(worst);
    let mut row = m.asserted(0.0);
    row.points = result.trace.len();
    report.checks.push(row);
    let mut s = Accumulator::new("split_diagnostic");
    s.push(diag.max);
    let mut row = s.informational(None);
    row.points = nodes;
    report.checks.push(row);

    report.details = json!({
        "termination": termination_name(result.termination),
        "iterations": result.iterations(),
        "objective": result.objective,
        "lambda": result.lambda,
        "split_diagnostic": {
            "max": diag.max,
            "grid_rms": diag.grid_rms,
            "coefficient_rms": diag.coefficient_rms,
        },
        "perturbed_mode": setup.perturbed_mode.map(|(m, sine)| json!({
            "frequency": setup.start.f2_modes()[m],
            "kind": if sine { "sin" } else { "cos" },
        })),
        "coefficients": { "f1": result.param.f1_coeffs(), "f2": result.param.f2_coeffs() },
        "f1": f1.to_string(),
        "f2": f2.to_string(),
    });
    report.finish(started);
    Ok(SearchOutcome {
        report,
        trace,
        result,
    })
}
