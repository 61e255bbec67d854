//! Einstein relations and the rigidity hypotheses.

use alloc::vec::Vec;

use super::{assemble_metric, ricci_cp, ConformalProductConfig};
use crate::error::{Error, Result};
use crate::expr::ProductPoint;
use crate::oracle;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaMode {
    Given(f64),
    /// `λ = scal / n` at the first point.
    TraceEstimated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EinsteinConstant {
    pub lambda: f64,
    pub estimated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EinsteinResidual {
    /// `max_p ‖Ric − λg‖_∞ / ‖g‖_∞`.
    pub residual: f64,
    pub lambda: EinsteinConstant,
    /// Index of the point attaining the maximum.
    pub worst: usize,
}

pub fn einstein_residual(
    cfg: &ConformalProductConfig,
    points: &[ProductPoint],
    mode: LambdaMode,
) -> Result<EinsteinResidual> {
    let first = points
        .first()
        .ok_or_else(|| Error::Invalid("Einstein residual needs at least one point".into()))?;
    let metric = assemble_metric(cfg);
    let n = cfg.split().n() as f64;
    let lambda = match mode {
        LambdaMode::Given(l) => EinsteinConstant {
            lambda: l,
            estimated: false,
        },
        LambdaMode::TraceEstimated => {
            let g = metric.value(first)?;
            let ric = ricci_cp(cfg, first)?;
            EinsteinConstant {
                lambda: oracle::trace(&ric, &g) / n,
                estimated: true,
            }
        }
    };
    let mut out = EinsteinResidual {
        residual: 0.0,
        lambda,
        worst: 0,
    };
    for (k, p) in points.iter().enumerate() {
        let g = metric.value(p)?;
        let ric = ricci_cp(cfg, p)?;
        let r = ric.sub(&g.metric().scaled(lambda.lambda)).max_abs() / g.metric().max_abs();
        if !r.is_finite() {
            return Err(Error::NonFinite("Einstein residual".into()));
        }
        if r > out.residual {
            out.residual = r;
            out.worst = k;
        }
    }
    Ok(out)
}

/// Residual of `(n−2)X₁(f₂)X₂(f₁) = (n₂−1)X₁(X₂(f₂))` on coordinate fields.
#[derive(Debug, Clone, PartialEq)]
pub struct EinsteinOneResidual {
    /// Row-major `n₁ × n₂`.
    pub entries: Vec<f64>,
    /// `max |∂ₓf₁|` at the point; the relation presumes it vanishes.
    pub d1f1_max: f64,
}

impl EinsteinOneResidual {
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn einstein1_residual(
    cfg: &ConformalProductConfig,
    p: &ProductPoint,
) -> Result<EinsteinOneResidual> {
    let split = cfg.split();
    let (n, n2) = (split.n() as f64, split.n2() as f64);
    let (d1f1, d2f1) = cfg.f1().split_differential(p)?;
    let (d1f2, _) = cfg.f2().split_differential(p)?;
    let mixed = cfg.f2().mixed_d1d2(p)?;
    let mut entries = Vec::with_capacity(split.n1() * split.n2());
    for i in 0..split.n1() {
        for j in 0..split.n2() {
            entries.push((n - 2.0) * d1f2[i] * d2f1[j] - (n2 - 1.0) * mixed[i * split.n2() + j]);
        }
    }
    Ok(EinsteinOneResidual {
        entries,
        d1f1_max: d1f1.iter().fold(0.0, |m, v| m.max(v.abs())),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisReport {
    pub d1f1_max: f64,
    pub d1d2f1_max: f64,
    /// `d₁d₂f₁` vanishes on the sample, so `f₁` can be re-gauged to `d₁f₁ = 0`.
    pub equivalent_normal_form: bool,
}

pub fn hypothesis_check(
    cfg: &ConformalProductConfig,
    points: &[ProductPoint],
    tolerance: f64,
) -> Result<HypothesisReport> {
    let mut d1f1_max: f64 = 0.0;
    let mut d1d2f1_max: f64 = 0.0;
    for p in points {
        let (d1, _) = cfg.f1().split_differential(p)?;
        d1f1_max = d1.iter().fold(d1f1_max, |m, v| m.max(v.abs()));
        d1d2f1_max = cfg
            .f1()
            .mixed_d1d2(p)?
            .iter()
            .fold(d1d2f1_max, |m, v| m.max(v.abs()));
    }
    Ok(HypothesisReport {
        d1f1_max,
        d1d2f1_max,
        equivalent_normal_form: d1d2f1_max <= tolerance,
    })
}
