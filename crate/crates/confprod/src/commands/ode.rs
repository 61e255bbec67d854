use std::time::Instant;

use confprod_core::ode::{
    case3_residuals, homogeneity_check, kderiv_family_residual, Case3Config, Entry,
    RationalDegreeTerm,
};
use confprod_core::Error as CoreError;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::report::{Accumulator, Report};
use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub points: usize,
    pub seed: u64,
}

/// Residual table of the one-dimensional-base reduction at sampled points.
///
/// The residuals are reported, not asserted: a generic scene is expected to
/// violate them. Entries that are undefined at a point (vanishing `f₂′`, or a
/// failed family gate for the homogeneity terms) are counted separately.
pub fn cmd_ode(scene: &Scene, opts: OdeOptions) -> CliResult<Report> {
    let started = Instant::now();
    let split = scene.split();
    if split.n1() != 1 {
        return Err(CliError::invalid(
            "$.split.n1",
            format!(
                "the ODE analysis needs a one-dimensional first factor, found n1 = {}",
                split.n1()
            ),
        ));
    }
    let tol = &scene.tolerances;
    let lambda = scene.lambda().unwrap_or(0.0);
    let max_order = tol.get("max_order") as usize;
    let cfg = Case3Config::new(scene.config.clone(), lambda)
        .and_then(|c| c.with_max_order(max_order))
        .map_err(|e| CliError::at("$", e))?;

    let names = ["deriv22f2", "ric11sp", "f2deriv", "eqlambda", "f12"];
    let mut base: Vec<Accumulator> = names.iter().map(|n| Accumulator::new(*n)).collect();
    let ks: Vec<usize> = (1..=4.min(max_order)).collect();
    let mut kd: Vec<Accumulator> = ks
        .iter()
        .map(|k| Accumulator::new(format!("kderiv_{k}")))
        .collect();
    let terms: Vec<RationalDegreeTerm> = RationalDegreeTerm::ALL
        .into_iter()
        .filter(|t| t.t_order() <= max_order)
        .collect();
    let mut hom: Vec<Accumulator> = terms
        .iter()
        .map(|t| Accumulator::new(format!("homogeneity_{}", t.label())))
        .collect();

    for p in scene.sample(opts.points, opts.seed) {
        let r = case3_residuals(&cfg, &p)?;
        base[0].push(r.deriv22f2.abs());
        base[1].push(r.ric11sp.abs());
        base[2].push(r.f2deriv.abs());
        match r.eqlambda {
            Entry::Value(v) => base[3].push(v.abs()),
            Entry::NotApplicable => base[3].skip(),
        }
        base[4].push(r.f12.abs());
        for (acc, &k) in kd.iter_mut().zip(&ks) {
            acc.push(kderiv_family_residual(&cfg, &p, k)?);
        }
        for (acc, &t) in hom.iter_mut().zip(&terms) {
            match homogeneity_check(&cfg, &p, t) {
                Ok(v) => acc.push(v),
                Err(CoreError::Precondition { .. }) => acc.skip(),
                Err(e) => return Err(e.into()),
            }
        }
    }
    let mut report = Report::new("ode", scene.digest.clone());
    report.seed = Some(opts.seed);
    report.tolerances = tol.as_map();
    report
        .checks
        .extend(base.iter().map(|a| a.informational(None)));
    report
        .checks
        .extend(kd.iter().map(|a| a.informational(Some(tol.get("kderiv")))));
    report.checks.extend(
        hom.iter()
            .map(|a| a.informational(Some(tol.get("homogeneity")))),
    );
    report.details = json!({
        "lambda": lambda,
        "max_order": max_order,
        "points": opts.points,
    });
    report.finish(started);
    Ok(report)
}
