//! Sum decomposition and the splitting construction `c = [h₁ + h₂]`.

use alloc::vec::Vec;

use super::{assemble_metric, hypothesis_check, ConformalProductConfig};
use crate::error::{Error, Result};
use crate::expr::{CoordSplit, ProductPoint, ScalarExpr};
use crate::oracle::MetricField;

/// Product sample set: every x-sample paired with every y-sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    split: CoordSplit,
    xs: Vec<Vec<f64>>,
    ys: Vec<Vec<f64>>,
}

/// Additive recurrence in `d` dimensions; evenly spread, deterministic.
fn kronecker(d: usize, m: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    if d == 1 {
        let step = if m > 1 {
            (hi - lo) / (m - 1) as f64
        } else {
            0.0
        };
        return (0..m).map(|k| alloc::vec![lo + step * k as f64]).collect();
    }
    // φ_d is the real root of x^{d+1} = x + 1
    let mut phi: f64 = 2.0;
    for _ in 0..64 {
        phi = libm::pow(1.0 + phi, 1.0 / (d as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=d)
        .map(|i| {
            let a = 1.0 / libm::pow(phi, i as f64);
            a - libm::floor(a)
        })
        .collect();
    (0..m)
        .map(|k| {
            alpha
                .iter()
                .map(|a| {
                    let u = 0.5 + a * k as f64;
                    lo + (hi - lo) * (u - libm::floor(u))
                })
                .collect()
        })
        .collect()
}

impl SampleGrid {
    pub fn new(split: CoordSplit, xs: Vec<Vec<f64>>, ys: Vec<Vec<f64>>) -> Result<Self> {
        if xs.is_empty() || ys.is_empty() {
            return Err(Error::Invalid(
                "sample grid needs at least one sample per factor".into(),
            ));
        }
        if xs.iter().any(|x| x.len() != split.n1()) || ys.iter().any(|y| y.len() != split.n2()) {
            return Err(super::dim_error("sample lengths do not match", split));
        }
        Ok(SampleGrid { split, xs, ys })
    }

    /// `m` samples per factor in the given coordinate boxes; a uniform
    /// lattice on one-dimensional factors.
    pub fn uniform(split: CoordSplit, x_range: (f64, f64), y_range: (f64, f64), m: usize) -> Self {
        let ranges: Vec<(f64, f64)> = (0..split.n())
            .map(|c| if split.is_first(c) { x_range } else { y_range })
            .collect();
        Self::in_box(split, &ranges, m).expect("one range per coordinate")
    }

    /// `m` samples per factor with one interval per product coordinate.
    pub fn in_box(split: CoordSplit, ranges: &[(f64, f64)], m: usize) -> Result<Self> {
        if ranges.len() != split.n() {
            return Err(super::dim_error(
                "one interval per coordinate is required",
                split,
            ));
        }
        let place = |unit: Vec<Vec<f64>>, offset: usize| -> Vec<Vec<f64>> {
            unit.into_iter()
                .map(|u| {
                    u.iter()
                        .enumerate()
                        .map(|(i, t)| {
                            let (lo, hi) = ranges[offset + i];
                            lo + (hi - lo) * t
                        })
                        .collect()
                })
                .collect()
        };
        let m = m.max(1);
        Ok(SampleGrid {
            split,
            xs: place(kronecker(split.n1(), m, 0.0, 1.0), 0),
            ys: place(kronecker(split.n2(), m, 0.0, 1.0), split.n1()),
        })
    }

    pub fn split(&self) -> CoordSplit {
        self.split
    }

    /// First-factor samples.
    pub fn xs(&self) -> &[Vec<f64>] {
        &self.xs
    }

    /// Second-factor samples.
    pub fn ys(&self) -> &[Vec<f64>] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> impl Iterator<Item = ProductPoint> + '_ {
        self.xs.iter().flat_map(move |x| {
            self.ys
                .iter()
                .map(move |y| ProductPoint::new(self.split, x, y).expect("lengths checked"))
        })
    }
}

/// `f = a₁(x) + a₂(y)` on the sample, with `a₁(x₀) = 0`.
#[derive(Debug, Clone)]
pub struct SumDecomposition {
    pub a1: ScalarExpr,
    pub a2: ScalarExpr,
    pub basepoint: ProductPoint,
    /// `max |f − a₁ − a₂|` over the grid.
    pub residual: f64,
    /// `max |∂ₓ∂ᵧf|` over the grid.
    pub mixed_max: f64,
}

pub fn decompose_sum(
    f: &ScalarExpr,
    basepoint: &ProductPoint,
    grid: &SampleGrid,
    tolerance: f64,
) -> Result<SumDecomposition> {
    let mut mixed_max: f64 = 0.0;
    for p in grid.points() {
        mixed_max = f
            .mixed_d1d2(&p)?
            .iter()
            .fold(mixed_max, |m, v| m.max(v.abs()));
    }
    if !(mixed_max <= tolerance) {
        return Err(Error::NotDecomposable {
            mixed: mixed_max,
            tolerance,
        });
    }
    let a2 = f.restrict_first(basepoint.x());
    let f00 = f.eval(basepoint)?;
    let a1 = f.restrict_second(basepoint.y()) - ScalarExpr::constant(f.split(), f00);
    let mut residual: f64 = 0.0;
    for p in grid.points() {
        residual = residual.max((f.eval(&p)? - a1.eval(&p)? - a2.eval(&p)?).abs());
    }
    Ok(SumDecomposition {
        a1,
        a2,
        basepoint: basepoint.clone(),
        residual,
        mixed_max,
    })
}

/// `f₁ = b₁(x) + b₂(y)` absorbed as `f₁ ↦ b₂`, `g₁ ↦ e^{2b₁}g₁`.
#[derive(Debug, Clone)]
pub struct Regauge {
    pub b1: ScalarExpr,
    pub b2: ScalarExpr,
    pub config: ConformalProductConfig,
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub h1: MetricField,
    pub h2: MetricField,
    pub sigma: ScalarExpr,
    pub a1: ScalarExpr,
    pub a2: ScalarExpr,
    pub regauge: Option<Regauge>,
    /// `max ‖g − e^{2σ}(h₁ ⊕ h₂)‖_∞ / ‖g‖_∞` over the grid.
    pub conformality_residual: f64,
    pub decomposition_residual: f64,
}

impl SplitResult {
    /// Whether `σ` depends on the first, resp. second, factor.
    pub fn sigma_dependence(&self) -> (bool, bool) {
        (
            self.sigma.depends_on_first(),
            self.sigma.depends_on_second(),
        )
    }
}

fn scale_field(m: &MetricField, w: &ScalarExpr) -> Result<MetricField> {
    let coeffs = m.coeffs().iter().map(|c| w * c).collect();
    MetricField::from_upper(m.split(), m.chart().to_vec(), coeffs)
}

/// Re-gauges `f₁` to `d₁f₁ = 0`, splits `f₂ = a₁ + a₂` and returns
/// `h₁ = e^{−2a₁}g₁`, `h₂ = e^{−2f₁+2a₂}g₂`, `σ = f₁ + a₁`.
pub fn theorem_split(
    cfg: &ConformalProductConfig,
    basepoint: &ProductPoint,
    grid: &SampleGrid,
    tolerance: f64,
) -> Result<SplitResult> {
    let points: Vec<ProductPoint> = grid.points().collect();
    let hyp = hypothesis_check(cfg, &points, tolerance)?;
    if !hyp.equivalent_normal_form {
        return Err(Error::Precondition {
            check: "d1d2f1",
            value: hyp.d1d2f1_max,
            tolerance,
        });
    }
    let (work, regauge) = if cfg.f1().depends_on_first() {
        let d = decompose_sum(cfg.f1(), basepoint, grid, tolerance)?;
        let g1 = scale_field(cfg.g1(), &d.a1.scaled(2.0).exp())?;
        let config =
            ConformalProductConfig::new(g1, cfg.g2().clone(), d.a2.clone(), cfg.f2().clone())?;
        (
            config.clone(),
            Some(Regauge {
                b1: d.a1,
                b2: d.a2,
                config,
            }),
        )
    } else {
        (cfg.clone(), None)
    };
    let d = decompose_sum(work.f2(), basepoint, grid, tolerance).map_err(|e| match e {
        Error::NotDecomposable { mixed, tolerance } => Error::Precondition {
            check: "d1d2f2",
            value: mixed,
            tolerance,
        },
        other => other,
    })?;
    let h1 = scale_field(work.g1(), &d.a1.scaled(-2.0).exp())?;
    let h2 = scale_field(
        work.g2(),
        &(&d.a2.scaled(2.0) - &work.f1().scaled(2.0)).exp(),
    )?;
    let sigma = work.f1() + &d.a1;

    let g = assemble_metric(cfg);
    let n1 = cfg.split().n1();
    let mut conformality_residual: f64 = 0.0;
    for p in &points {
        let gv = g.value(p)?;
        let w = libm::exp(2.0 * sigma.eval(p)?);
        let (v1, v2) = (h1.value(p)?, h2.value(p)?);
        let n = cfg.split().n();
        let scale = gv.metric().max_abs();
        for i in 0..n {
            for j in i..n {
                let h = if j < n1 {
                    v1.metric().get(i, j)
                } else if i >= n1 {
                    v2.metric().get(i - n1, j - n1)
                } else {
                    0.0
                };
                conformality_residual =
                    conformality_residual.max((gv.metric().get(i, j) - w * h).abs() / scale);
            }
        }
    }
    Ok(SplitResult {
        h1,
        h2,
        sigma,
        a1: d.a1,
        a2: d.a2,
        regauge,
        conformality_residual,
        decomposition_residual: d.residual,
    })
}
