//! Coordinate curvature of an arbitrary chart metric.
//!
//! Everything here works from the metric coefficients alone: first and
//! second partials come from jets of the coefficient expressions, so the
//! only error is round-off. Nothing in this module knows about conformal
//! products.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::{CoordSplit, Jet, JetSpace, ProductPoint, ScalarExpr};
use crate::tensor::{MetricValue, Riemann4Value, Sym2Value};

/// A symmetric matrix of coefficient expressions on a chart.
///
/// The chart coordinates are a subset of the product coordinates: all of
/// them for a metric on the product, or one factor block for a factor metric.
#[derive(Debug, Clone)]
pub struct MetricField {
    split: CoordSplit,
    chart: Vec<usize>,
    coeffs: Vec<ScalarExpr>,
}

fn packed_len(d: usize) -> usize {
    d * (d + 1) / 2
}

fn packed(d: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * d - i * (i + 1) / 2 + j
}

impl MetricField {
    /// Chart on the given product coordinates, coefficients as a packed upper
    /// triangle (row by row).
    pub fn from_upper(
        split: CoordSplit,
        chart: Vec<usize>,
        coeffs: Vec<ScalarExpr>,
    ) -> Result<Self> {
        let d = chart.len();
        if d == 0 {
            return Err(Error::Dimension("metric on an empty chart".into()));
        }
        if coeffs.len() != packed_len(d) {
            return Err(Error::Dimension(format!(
                "{} coefficients for a {d}-dimensional metric, expected {}",
                coeffs.len(),
                packed_len(d)
            )));
        }
        if chart.iter().any(|&c| c >= split.n()) {
            return Err(Error::Dimension(
                "chart coordinate outside the split".into(),
            ));
        }
        if coeffs.iter().any(|c| c.split() != split) {
            return Err(Error::Dimension(
                "coefficient bound to a different split".into(),
            ));
        }
        for c in &coeffs {
            if let Some(&bad) = c.free_coords().iter().find(|v| !chart.contains(v)) {
                return Err(Error::Invalid(format!(
                    "coefficient `{c}` depends on {}, which is not a chart coordinate",
                    split.coord_name(bad)
                )));
            }
        }
        Ok(MetricField {
            split,
            chart,
            coeffs,
        })
    }

    /// Full square matrix; the two triangles must agree structurally.
    pub fn from_rows(
        split: CoordSplit,
        chart: Vec<usize>,
        rows: Vec<Vec<ScalarExpr>>,
    ) -> Result<Self> {
        let d = chart.len();
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(Error::Dimension(format!("metric matrix is not {d}×{d}")));
        }
        for i in 0..d {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::Invalid(format!(
                        "metric matrix is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let mut coeffs = Vec::with_capacity(packed_len(d));
        for (i, row) in rows.into_iter().enumerate() {
            coeffs.extend(row.into_iter().skip(i));
        }
        MetricField::from_upper(split, chart, coeffs)
    }

    /// Metric on the whole product chart.
    pub fn on_product(split: CoordSplit, rows: Vec<Vec<ScalarExpr>>) -> Result<Self> {
        MetricField::from_rows(split, (0..split.n()).collect(), rows)
    }

    /// Constant-coefficient identity on the given chart coordinates.
    pub fn euclidean(split: CoordSplit, chart: Vec<usize>) -> Self {
        let d = chart.len();
        let coeffs = (0..d)
            .flat_map(|i| (i..d).map(move |j| (i, j)))
            .map(|(i, j)| ScalarExpr::constant(split, if i == j { 1.0 } else { 0.0 }))
            .collect();
        MetricField {
            split,
            chart,
            coeffs,
        }
    }

    pub fn split(&self) -> CoordSplit {
        self.split
    }

    pub fn chart(&self) -> &[usize] {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.len()
    }

    /// Coefficient `(i, j)` in chart indices.
    pub fn coeff(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.coeffs[packed(self.dim(), i, j)]
    }

    /// Packed upper triangle.
    pub fn coeffs(&self) -> &[ScalarExpr] {
        &self.coeffs
    }

    pub fn value(&self, p: &ProductPoint) -> Result<MetricValue> {
        let d = self.dim();
        let mut g = Sym2Value::zeros(d);
        for i in 0..d {
            for j in i..d {
                g.set(i, j, self.coeff(i, j).eval(p)?);
            }
        }
        MetricValue::new(g)
    }

    /// Jets of the packed coefficients over the chart coordinates.
    pub fn jets(&self, p: &ProductPoint, order: usize) -> Result<Vec<Jet>> {
        let space = JetSpace::over(self.split, &self.chart, order)?;
        self.jets_in(p, &space)
    }

    fn jets_in(&self, p: &ProductPoint, space: &Arc<JetSpace>) -> Result<Vec<Jet>> {
        self.coeffs
            .iter()
            .map(|c| c.eval_jet_in(p, space))
            .collect()
    }

    /// Value, first and second partials of the coefficients.
    pub fn derivatives(&self, p: &ProductPoint) -> Result<MetricDerivatives> {
        let d = self.dim();
        let jets = self.jets(p, 2)?;
        let ch = &self.chart;
        let mut g = Sym2Value::zeros(d);
        let mut dg = vec![Sym2Value::zeros(d); d];
        let mut ddg = vec![Sym2Value::zeros(d); d * d];
        for i in 0..d {
            for j in i..d {
                let jet = &jets[packed(d, i, j)];
                g.set(i, j, jet.value());
                for a in 0..d {
                    dg[a].set(i, j, jet.partial(&[ch[a]]).unwrap_or(0.0));
                    for b in 0..d {
                        ddg[a * d + b].set(i, j, jet.partial(&[ch[a], ch[b]]).unwrap_or(0.0));
                    }
                }
            }
        }
        Ok(MetricDerivatives {
            metric: MetricValue::new(g)?,
            dg,
            ddg,
        })
    }
}

/// Pointwise metric, `∂ₐg` and `∂ₐ∂ᵦg` in chart indices.
#[derive(Debug, Clone)]
pub struct MetricDerivatives {
    pub metric: MetricValue,
    pub dg: Vec<Sym2Value>,
    /// Row-major `d × d` list, `ddg[a * d + b] = ∂ₐ∂ᵦg`.
    pub ddg: Vec<Sym2Value>,
}

impl MetricDerivatives {
    /// Metric with constant coefficients.
    pub fn flat(metric: MetricValue) -> Self {
        let d = metric.dim();
        MetricDerivatives {
            metric,
            dg: vec![Sym2Value::zeros(d); d],
            ddg: vec![Sym2Value::zeros(d); d * d],
        }
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }
}

/// `Γ^k_{ij}`, stored as `[k][i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        Christoffel {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        let n = self.n;
        self.data[(k * n + i) * n + j] = v;
    }

    pub fn components(&self) -> &[f64] {
        &self.data
    }

    /// `∇_X Y` for constant-coefficient `X`, `Y` (the `Γ` part only).
    pub fn contract(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += self.get(k, i, j) * x[i] * y[j];
                    }
                }
                s
            })
            .collect()
    }
}

/// Christoffel symbols of the first kind, `[ij, l] = ½(∂ᵢg_{jl} + ∂ⱼg_{il} − ∂ₗg_{ij})`.
fn first_kind(dg: &[Sym2Value], i: usize, j: usize, l: usize) -> f64 {
    0.5 * (dg[i].get(j, l) + dg[j].get(i, l) - dg[l].get(i, j))
}

/// `Γ^k_{ij}` from pointwise derivatives.
pub fn christoffel_from(md: &MetricDerivatives) -> Christoffel {
    let d = md.dim();
    let inv = md.metric.inverse();
    let mut gamma = Christoffel::zeros(d);
    for i in 0..d {
        for j in i..d {
            let low: Vec<f64> = (0..d).map(|l| first_kind(&md.dg, i, j, l)).collect();
            for k in 0..d {
                let v: f64 = (0..d).map(|l| inv.get(k, l) * low[l]).sum();
                gamma.set(k, i, j, v);
                gamma.set(k, j, i, v);
            }
        }
    }
    gamma
}

/// Covariant Riemann tensor from pointwise derivatives.
pub fn riemann_from(md: &MetricDerivatives) -> (Christoffel, Riemann4Value) {
    let d = md.dim();
    let g = md.metric.metric();
    let inv = md.metric.inverse();
    let gamma = christoffel_from(md);

    // ∂ₘ g^{kl} = −g^{ka} ∂ₘg_{ab} g^{bl}
    let dinv: Vec<Vec<f64>> = (0..d)
        .map(|m| {
            let mut out = vec![0.0; d * d];
            for k in 0..d {
                for l in 0..d {
                    let mut s = 0.0;
                    for a in 0..d {
                        for b in 0..d {
                            s += inv.get(k, a) * md.dg[m].get(a, b) * inv.get(b, l);
                        }
                    }
                    out[k * d + l] = -s;
                }
            }
            out
        })
        .collect();

    // ∂ₘΓ^k_{ij}, stored [m][k][i][j]
    let idx = |m: usize, k: usize, i: usize, j: usize| ((m * d + k) * d + i) * d + j;
    let mut dgamma = vec![0.0; d * d * d * d];
    for m in 0..d {
        for i in 0..d {
            for j in i..d {
                let low: Vec<f64> = (0..d).map(|l| first_kind(&md.dg, i, j, l)).collect();
                let dlow: Vec<f64> = (0..d)
                    .map(|l| {
                        0.5 * (md.ddg[m * d + i].get(j, l) + md.ddg[m * d + j].get(i, l)
                            - md.ddg[m * d + l].get(i, j))
                    })
                    .collect();
                for k in 0..d {
                    let mut s = 0.0;
                    for l in 0..d {
                        s += dinv[m][k * d + l] * low[l] + inv.get(k, l) * dlow[l];
                    }
                    dgamma[idx(m, k, i, j)] = s;
                    dgamma[idx(m, k, j, i)] = s;
                }
            }
        }
    }

    // R^m_{ijk} = ∂ᵢΓ^m_{jk} − ∂ⱼΓ^m_{ik} + Γ^m_{ia}Γ^a_{jk} − Γ^m_{ja}Γ^a_{ik}
    let mut up = vec![0.0; d * d * d * d];
    for m in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut s = dgamma[idx(i, m, j, k)] - dgamma[idx(j, m, i, k)];
                    for a in 0..d {
                        s += gamma.get(m, i, a) * gamma.get(a, j, k)
                            - gamma.get(m, j, a) * gamma.get(a, i, k);
                    }
                    up[idx(m, i, j, k)] = s;
                }
            }
        }
    }
    let mut r = Riemann4Value::zeros(d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let v: f64 = (0..d).map(|m| g.get(l, m) * up[idx(m, i, j, k)]).sum();
                    r.set(i, j, k, l, v);
                }
            }
        }
    }
    (gamma, r)
}

/// `Ric_{jk} = g^{il} R_{ijkl}`.
pub fn ricci_contract(r: &Riemann4Value, g: &MetricValue) -> Sym2Value {
    let d = r.dim();
    let inv = g.inverse();
    Sym2Value::from_fn(d, |j, k| {
        let mut s = 0.0;
        for i in 0..d {
            for l in 0..d {
                s += inv.get(i, l) * r.get(i, j, k, l);
            }
        }
        s
    })
}

/// `g^{ij} b_{ij}`.
pub fn trace(b: &Sym2Value, g: &MetricValue) -> f64 {
    let d = b.dim();
    let inv = g.inverse();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            s += inv.get(i, j) * b.get(i, j);
        }
    }
    s
}

/// Curvature of a chart metric at a point.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub point: ProductPoint,
    pub chart: Vec<usize>,
    pub metric: MetricValue,
    pub gamma: Christoffel,
    pub riemann: Riemann4Value,
    pub ricci: Sym2Value,
    pub scalar: f64,
}

impl CurvatureReport {
    /// Factor block (1 or 2) of a chart index.
    pub fn block_of(&self, i: usize) -> u8 {
        if self.point.split().is_first(self.chart[i]) {
            1
        } else {
            2
        }
    }

    /// Recomputes Ricci from Riemann through the mixed-index contraction
    /// `R^i_{ijk}` and returns the worst disagreement, together with that of
    /// the scalar curvature.
    pub fn contraction_defect(&self) -> (f64, f64) {
        let d = self.riemann.dim();
        let inv = self.metric.inverse();
        let mut ric_err: f64 = 0.0;
        for j in 0..d {
            for k in 0..d {
                let mut s = 0.0;
                for i in 0..d {
                    for l in 0..d {
                        // R^i_{ijk} = g^{il} R_{ijkl}; also = −g^{il} R_{jikl}
                        s -= inv.get(i, l) * self.riemann.get(j, i, k, l);
                    }
                }
                ric_err = ric_err.max((s - self.ricci.get(j, k)).abs());
            }
        }
        let scal = trace(&self.ricci, &self.metric);
        (ric_err, (scal - self.scalar).abs())
    }

    /// `R(X, Y, Y, X) / (|X|²|Y|² − g(X, Y)²)`.
    pub fn sectional(&self, x: &[f64], y: &[f64]) -> f64 {
        let num = self.riemann.eval_raw(x, y, y, x);
        let (xx, yy, xy) = (
            self.metric.inner(x, x),
            self.metric.inner(y, y),
            self.metric.inner(x, y),
        );
        num / (xx * yy - xy * xy)
    }
}

pub fn curvature(m: &MetricField, p: &ProductPoint) -> Result<CurvatureReport> {
    check_point(m, p)?;
    let md = m.derivatives(p)?;
    let (gamma, riemann) = riemann_from(&md);
    let ricci = ricci_contract(&riemann, &md.metric);
    let scalar = trace(&ricci, &md.metric);
    Ok(CurvatureReport {
        point: p.clone(),
        chart: m.chart.clone(),
        metric: md.metric,
        gamma,
        riemann,
        ricci,
        scalar,
    })
}

fn check_point(m: &MetricField, p: &ProductPoint) -> Result<()> {
    if p.split() != m.split {
        return Err(Error::Dimension(
            "point and metric use different splits".into(),
        ));
    }
    Ok(())
}

pub fn christoffel(m: &MetricField, p: &ProductPoint) -> Result<Christoffel> {
    check_point(m, p)?;
    Ok(christoffel_from(&m.derivatives(p)?))
}

pub fn riemann_oracle(m: &MetricField, p: &ProductPoint) -> Result<Riemann4Value> {
    check_point(m, p)?;
    Ok(riemann_from(&m.derivatives(p)?).1)
}

pub fn ricci_oracle(m: &MetricField, p: &ProductPoint) -> Result<Sym2Value> {
    Ok(curvature(m, p)?.ricci)
}
