use std::time::Instant;

use confprod_core::conformal::{hypothesis_check, theorem_split, SampleGrid, SplitResult};
use confprod_core::oracle::MetricField;
use confprod_core::{CoordSplit, Error as CoreError, ProductPoint};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::report::{Accumulator, PreconditionFailure, Report};
use crate::scene::Scene;

#[derive(Debug, Clone, PartialEq)]
pub struct SplitOptions {
    /// Samples per factor.
    pub grid: usize,
    /// Defaults to the domain midpoint.
    pub basepoint: Option<ProductPoint>,
}

/// Parses `"x₁,…;y₁,…"`.
pub fn parse_basepoint(s: &str, split: CoordSplit) -> CliResult<ProductPoint> {
    let bad = |m: String| CliError::invalid("--basepoint", m);
    let (x, y) = s
        .split_once(';')
        .ok_or_else(|| bad("expected `x1,...;y1,...`".into()))?;
    let nums = |part: &str| -> CliResult<Vec<f64>> {
        part.split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| bad(format!("`{v}`: {e}")))
            })
            .collect()
    };
    let (x, y) = (nums(x)?, nums(y)?);
    ProductPoint::new(split, &x, &y).map_err(|e| bad(e.to_string()))
}

/// Coefficients of a factor metric sampled on that factor's samples.
fn sample_metric(m: &MetricField, points: &[ProductPoint]) -> CliResult<Value> {
    let d = m.dim();
    let mut values = Vec::with_capacity(points.len());
    for p in points {
        let v = m.value(p)?;
        let rows: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| v.metric().get(i, j)).collect())
            .collect();
        values.push(rows);
    }
    let exprs: Vec<Vec<String>> = (0..d)
        .map(|i| (0..d).map(|j| m.coeff(i, j).to_string()).collect())
        .collect();
    Ok(json!({ "expressions": exprs, "samples": values }))
}

fn serialize(scene: &Scene, grid: &SampleGrid, r: &SplitResult) -> CliResult<Value> {
    let split = scene.split();
    let base = scene.center();
    // h₁ lives on the first factor, h₂ on the second: sample along each slice
    let slice =
        |x: &[f64], y: &[f64]| ProductPoint::new(split, x, y).expect("grid samples fit the split");
    let xs: Vec<ProductPoint> = grid.xs().iter().map(|x| slice(x, base.y())).collect();
    let ys: Vec<ProductPoint> = grid.ys().iter().map(|y| slice(base.x(), y)).collect();
    let mut sigma = Vec::with_capacity(grid.len());
    for p in grid.points() {
        sigma.push(json!({ "point": p.coords(), "sigma": r.sigma.eval(&p)? }));
    }
    // which factor σ varies along, both syntactically and on the slices
    let s0 = r.sigma.eval(&base)?;
    let spread = |pts: &[ProductPoint]| -> CliResult<f64> {
        pts.iter()
            .try_fold(0.0f64, |m, p| Ok(m.max((r.sigma.eval(p)? - s0).abs())))
    };
    let (on1, on2) = r.sigma_dependence();
    let dependence = json!({
        "first": { "syntactic": on1, "spread": spread(&xs)? },
        "second": { "syntactic": on2, "spread": spread(&ys)? },
    });
    Ok(json!({
        "h1": { "x_samples": xs.iter().map(|p| p.x().to_vec()).collect::<Vec<_>>(), "metric": sample_metric(&r.h1, &xs)? },
        "h2": { "y_samples": ys.iter().map(|p| p.y().to_vec()).collect::<Vec<_>>(), "metric": sample_metric(&r.h2, &ys)? },
        "sigma": { "expression": r.sigma.to_string(), "dependence": dependence, "samples": sigma },
        "a1": r.a1.to_string(),
        "a2": r.a2.to_string(),
        "regauge": r.regauge.as_ref().map(|g| json!({
            "performed": true,
            "b1": g.b1.to_string(),
            "b2": g.b2.to_string(),
            "f1": g.config.f1().to_string(),
            "g1": (0..split.n1()).map(|i| (0..split.n1()).map(|j| g.config.g1().coeff(i, j).to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })).unwrap_or(json!({ "performed": false })),
        "conformality_residual": r.conformality_residual,
        "decomposition_residual": r.decomposition_residual,
    }))
}

/// Hypothesis check followed by the explicit splitting `g = e^{2σ}(h₁ + h₂)`.
pub fn cmd_split(scene: &Scene, opts: &SplitOptions) -> CliResult<Report> {
    let started = Instant::now();
    let split = scene.split();
    let tol = &scene.tolerances;
    let mixed_tol = tol.get("mixed");
    let grid = SampleGrid::in_box(split, &scene.domain, opts.grid)?;
    let points: Vec<ProductPoint> = grid.points().collect();
    let basepoint = opts.basepoint.clone().unwrap_or_else(|| scene.center());

    let mut report = Report::new("split", scene.digest.clone());
    report.tolerances = tol.as_map();
    let hyp = hypothesis_check(&scene.config, &points, mixed_tol)?;
    let mut d1f1 = Accumulator::new("d1f1");
    d1f1.push(hyp.d1f1_max);
    let mut d1d2f1 = Accumulator::new("d1d2f1");
    d1d2f1.push(hyp.d1d2f1_max);
    for row in [d1f1.informational(None), d1d2f1.asserted(mixed_tol)] {
        report.checks.push(with_points(row, points.len()));
    }

    match theorem_split(&scene.config, &basepoint, &grid, mixed_tol) {
        Ok(r) => {
            let mut c = Accumulator::new("conformality");
            c.push(r.conformality_residual);
            let mut d = Accumulator::new("decomposition");
            d.push(r.decomposition_residual);
            report.checks.push(with_points(
                c.asserted(tol.get("conformality")),
                points.len(),
            ));
            report
                .checks
                .push(with_points(d.informational(None), points.len()));
            report.details = serialize(scene, &grid, &r)?;
        }
        Err(CoreError::Precondition {
            check,
            value,
            tolerance,
        }) => {
            report.preconditions.push(PreconditionFailure {
                check: check.into(),
                value,
                tolerance,
                message: format!("{check} nonzero"),
            });
            report.details = json!({ "grid_points": points.len() });
        }
        Err(e) => return Err(e.into()),
    }
    report.finish(started);
    Ok(report)
}

fn with_points(mut row: crate::report::CheckRow, points: usize) -> crate::report::CheckRow {
    row.points = points;
    row
}
