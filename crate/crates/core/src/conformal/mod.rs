//! Conformal product metrics `g = e^{2f₁}g₁ + e^{2f₂}g₂`.
//!
//! The factor metrics live on the factor charts (coefficients in `x` only,
//! resp. `y` only); the conformal factors may depend on both. Lifted factor
//! fields are the coordinate fields `∂ₓ`, `∂ᵧ` of the product chart.

mod curvature;
mod einstein;
mod split;

pub use curvature::{
    factor_geometry, point_data, ricci_cp, ricci_from_jets, riemann_cp, Completion, CurvatureClass,
    FactorGeometry, Jet2, PointData, RiemannCp, CURVATURE_CLASSES,
};
pub use einstein::{
    einstein1_residual, einstein_residual, hypothesis_check, EinsteinConstant, EinsteinOneResidual,
    EinsteinResidual, HypothesisReport, LambdaMode,
};
pub use split::{decompose_sum, theorem_split, Regauge, SampleGrid, SplitResult, SumDecomposition};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::{CoordSplit, ProductPoint, ScalarExpr};
use crate::oracle::{self, MetricField};
use crate::tensor::{BlockVector, OneFormValue};

#[derive(Debug, Clone)]
pub struct ConformalProductConfig {
    split: CoordSplit,
    g1: MetricField,
    g2: MetricField,
    f1: ScalarExpr,
    f2: ScalarExpr,
}

impl ConformalProductConfig {
    pub fn new(g1: MetricField, g2: MetricField, f1: ScalarExpr, f2: ScalarExpr) -> Result<Self> {
        let split = f1.split();
        if g1.split() != split || g2.split() != split || f2.split() != split {
            return Err(Error::Dimension(
                "configuration parts use different splits".into(),
            ));
        }
        let first: Vec<usize> = split.first().collect();
        let second: Vec<usize> = split.second().collect();
        if g1.chart() != first.as_slice() {
            return Err(Error::Invalid(
                "g1 must be a metric on the x-coordinates".into(),
            ));
        }
        if g2.chart() != second.as_slice() {
            return Err(Error::Invalid(
                "g2 must be a metric on the y-coordinates".into(),
            ));
        }
        Ok(ConformalProductConfig {
            split,
            g1,
            g2,
            f1,
            f2,
        })
    }

    /// Flat factors `g₁ = δ`, `g₂ = δ`.
    pub fn flat_factors(f1: ScalarExpr, f2: ScalarExpr) -> Result<Self> {
        let split = f1.split();
        ConformalProductConfig::new(
            MetricField::euclidean(split, split.first().collect()),
            MetricField::euclidean(split, split.second().collect()),
            f1,
            f2,
        )
    }

    pub fn split(&self) -> CoordSplit {
        self.split
    }

    pub fn g1(&self) -> &MetricField {
        &self.g1
    }

    pub fn g2(&self) -> &MetricField {
        &self.g2
    }

    pub fn f1(&self) -> &ScalarExpr {
        &self.f1
    }

    pub fn f2(&self) -> &ScalarExpr {
        &self.f2
    }

    /// Same factors with new conformal factors.
    pub fn with_factors(&self, f1: ScalarExpr, f2: ScalarExpr) -> Result<Self> {
        ConformalProductConfig::new(self.g1.clone(), self.g2.clone(), f1, f2)
    }
}

/// The assembled metric as a block-diagonal coefficient matrix.
pub fn assemble_metric(cfg: &ConformalProductConfig) -> MetricField {
    let split = cfg.split;
    let (n, n1) = (split.n(), split.n1());
    let w1 = cfg.f1.scaled(2.0).exp();
    let w2 = cfg.f2.scaled(2.0).exp();
    let mut coeffs = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let c = if j < n1 {
                &w1 * cfg.g1.coeff(i, j)
            } else if i >= n1 {
                &w2 * cfg.g2.coeff(i - n1, j - n1)
            } else {
                ScalarExpr::constant(split, 0.0)
            };
            coeffs.push(c);
        }
    }
    MetricField::from_upper(split, (0..n).collect(), coeffs)
        .expect("block assembly of validated factors is well formed")
}

/// `θ = −d₁f₂ − d₂f₁`.
pub fn lee_form(cfg: &ConformalProductConfig, p: &ProductPoint) -> Result<OneFormValue> {
    let (d1f2, _) = cfg.f2.split_differential(p)?;
    let (_, d2f1) = cfg.f1.split_differential(p)?;
    let neg = |v: Vec<f64>| v.into_iter().map(|x| -x).collect::<Vec<_>>();
    OneFormValue::new(cfg.split, &neg(d1f2), &neg(d2f1))
}

/// Pointwise ingredients for the Weyl-connection checks.
struct WeylData {
    n: usize,
    g: crate::tensor::MetricValue,
    dg: Vec<crate::tensor::Sym2Value>,
    gamma: oracle::Christoffel,
    theta: Vec<f64>,
    theta_sharp: Vec<f64>,
}

impl WeylData {
    fn new(cfg: &ConformalProductConfig, p: &ProductPoint) -> Result<Self> {
        let md = assemble_metric(cfg).derivatives(p)?;
        let gamma = oracle::christoffel_from(&md);
        let theta = lee_form(cfg, p)?.components().to_vec();
        let theta_sharp = md.metric.raise(&theta);
        Ok(WeylData {
            n: cfg.split.n(),
            g: md.metric,
            dg: md.dg,
            gamma,
            theta,
            theta_sharp,
        })
    }

    fn theta_at(&self, x: &[f64]) -> f64 {
        self.theta.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `∇_Z X = ∇^g_Z X + θ(Z)X + θ(X)Z − g(Z, X)θ^♯` for constant-coefficient fields.
    fn weyl(&self, z: &[f64], x: &[f64]) -> Vec<f64> {
        let lc = self.gamma.contract(z, x);
        let (tz, tx, gzx) = (self.theta_at(z), self.theta_at(x), self.g.inner(z, x));
        (0..self.n)
            .map(|k| lc[k] + tz * x[k] + tx * z[k] - gzx * self.theta_sharp[k])
            .collect()
    }
}

/// Largest component of the one-form `Z ↦ (∇_Z g)(X, Y) + 2θ(Z)g(X, Y)`,
/// with `∇` the Weyl connection built over the Levi-Civita connection of the
/// assembled metric and `X`, `Y` extended with constant coefficients.
pub fn weyl_compatibility_residual(
    cfg: &ConformalProductConfig,
    p: &ProductPoint,
    x: &BlockVector,
    y: &BlockVector,
) -> Result<f64> {
    let w = WeylData::new(cfg, p)?;
    let (xv, yv) = (x.components(), y.components());
    let gxy = w.g.inner(xv, yv);
    let mut worst: f64 = 0.0;
    for c in 0..w.n {
        let mut z = vec![0.0; w.n];
        z[c] = 1.0;
        let dz = w.dg[c].apply(xv, yv);
        let nabla_g = dz - w.g.inner(&w.weyl(&z, xv), yv) - w.g.inner(xv, &w.weyl(&z, yv));
        worst = worst.max((nabla_g + 2.0 * w.theta[c] * gxy).abs());
    }
    Ok(worst)
}

/// Largest component of `∇_{∂ₓ}∂ᵧ` for the adapted Weyl connection, over all
/// pairs of lifted coordinate fields. Vanishes identically.
pub fn adapted_mixed_residual(cfg: &ConformalProductConfig, p: &ProductPoint) -> Result<f64> {
    let w = WeylData::new(cfg, p)?;
    let mut worst: f64 = 0.0;
    for a in cfg.split.first() {
        for j in cfg.split.second() {
            let mut ea = vec![0.0; w.n];
            let mut ej = vec![0.0; w.n];
            ea[a] = 1.0;
            ej[j] = 1.0;
            for v in w.weyl(&ea, &ej) {
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

/// Which pair of factors a connection block refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    B11,
    B22,
    B12,
}

/// Closed-form Levi-Civita coefficients for lifted coordinate fields.
///
/// Returns `c[(i·m + j)·n + k]`, the `k`-th component of `∇^g_{eᵢ}eⱼ`, where
/// `eᵢ` runs over the first-named block and `eⱼ` over the second-named one
/// (`m` is the size of the second block).
pub fn lc_product(
    cfg: &ConformalProductConfig,
    p: &ProductPoint,
    which: Block,
) -> Result<Vec<f64>> {
    let split = cfg.split;
    let n = split.n();
    let n1 = split.n1();
    let d1 = cfg.f1.eval_jet(p, 1)?.gradient();
    let d2 = cfg.f2.eval_jet(p, 1)?.gradient();
    let g = assemble_metric(cfg).value(p)?;
    match which {
        Block::B12 => {
            let mut out = vec![0.0; n1 * split.n2() * n];
            for a in split.first() {
                for (jj, j) in split.second().enumerate() {
                    let c = &mut out[(a * split.n2() + jj) * n..][..n];
                    c[j] += d2[a];
                    c[a] += d1[j];
                }
            }
            Ok(out)
        }
        Block::B11 | Block::B22 => {
            let (range, fac, df) = if which == Block::B11 {
                (split.first(), &cfg.g1, &d1)
            } else {
                (split.second(), &cfg.g2, &d2)
            };
            let off = range.start;
            let m = range.len();
            let gamma = oracle::christoffel(fac, p)?;
            let sharp = g.raise(df);
            let mut out = vec![0.0; m * m * n];
            for i in 0..m {
                for j in 0..m {
                    let c = &mut out[(i * m + j) * n..][..n];
                    for k in 0..m {
                        c[off + k] += gamma.get(k, i, j);
                    }
                    c[off + j] += df[off + i];
                    c[off + i] += df[off + j];
                    let gij = g.metric().get(off + i, off + j);
                    for k in 0..n {
                        c[k] -= gij * sharp[k];
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Largest `|g(∇^g_{∂ₐ}∂ᵦ, ∂ⱼ) + g(∂ₐ, ∂ᵦ)∂ⱼf₁|` over first-block `a, b` and
/// second-block `j`, with `∇^g` taken from the coordinate Christoffel symbols.
pub fn normal_component_residual(cfg: &ConformalProductConfig, p: &ProductPoint) -> Result<f64> {
    let md = assemble_metric(cfg).derivatives(p)?;
    let gamma = oracle::christoffel_from(&md);
    let g = md.metric.metric();
    let d1 = cfg.f1.eval_jet(p, 1)?.gradient();
    let n = cfg.split.n();
    let mut worst: f64 = 0.0;
    for a in cfg.split.first() {
        for b in cfg.split.first() {
            for j in cfg.split.second() {
                let lhs: f64 = (0..n).map(|k| gamma.get(k, a, b) * g.get(k, j)).sum();
                worst = worst.max((lhs + g.get(a, b) * d1[j]).abs());
            }
        }
    }
    Ok(worst)
}

pub(crate) fn dim_error(what: &str, split: CoordSplit) -> Error {
    Error::Dimension(format!("{what} for split ({}, {})", split.n1(), split.n2()))
}
