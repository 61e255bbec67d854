//! Residuals of the one-dimensional-factor reductions.
//!
//! With `n₁ = 1` the first factor is parametrized by arc length `t = x₁`
//! (`g₁ = dt²`), primes denote `∂ₜ`, and all `t`-derivatives of `f₂` come
//! from a single jet over `(t, y)`.

use alloc::vec::Vec;

use crate::conformal::{factor_geometry, ConformalProductConfig, FactorGeometry};
use crate::error::{Error, Result};
use crate::expr::{Jet, JetSpace, ProductPoint, DEFAULT_JET_ORDER, MAX_JET_ORDER};
use crate::real::{Dual, Real};

/// Below this `|f₂′|` the entries divided by `f₂′` are not applicable.
pub const DERIVATIVE_FLOOR: f64 = 1e-8;

/// Gate for the homogeneity checks: `max_k` of the `k`-derivative relation.
pub const KDERIV_TOLERANCE: f64 = 1e-8;

fn grad_ff(fac: &FactorGeometry, u: &[f64], v: &[f64]) -> f64 {
    let inv = fac.metric.inverse();
    let o = fac.offset;
    let d = fac.dim();
    let mut s = 0.0;
    for a in 0..d {
        for b in 0..d {
            s += inv.get(a, b) * u[o + a] * v[o + b];
        }
    }
    s
}

/// `Δᵢf = −gᵢ^{ab}(∂ₐ∂ᵦf − Γ^c_{ab}∂_cf)` from a jet of order ≥ 2.
fn leaf_laplacian(fac: &FactorGeometry, f: &Jet) -> f64 {
    let inv = fac.metric.inverse();
    let o = fac.offset;
    let d = fac.dim();
    let grad = f.gradient();
    let mut s = 0.0;
    for a in 0..d {
        for b in 0..d {
            let mut h = f.partial(&[o + a, o + b]).unwrap_or(0.0);
            for c in 0..d {
                h -= fac.gamma.get(c, a, b) * grad[o + c];
            }
            s += inv.get(a, b) * h;
        }
    }
    -s
}

/// `λ − e^{−2f₁}(Δ₁f₂ − |d₁f₂|²_{g₁})` on a configuration with `n₂ = 1`,
/// evaluated where `d₂f₁` vanishes.
pub fn case2_lambda_residual(
    cfg: &ConformalProductConfig,
    lambda: f64,
    p: &ProductPoint,
    tolerance: f64,
) -> Result<f64> {
    let split = cfg.split();
    if split.n2() != 1 || split.n1() < 2 {
        return Err(Error::Invalid(
            "this reduction needs n2 = 1 and n1 > 1".into(),
        ));
    }
    let (_, d2f1) = cfg.f1().split_differential(p)?;
    let d2 = d2f1[0].abs();
    if !(d2 <= tolerance) {
        return Err(Error::Precondition {
            check: "d2f1",
            value: d2,
            tolerance,
        });
    }
    let fac1 = factor_geometry(cfg.g1(), p)?;
    let f2 = cfg.f2().eval_jet(p, 2)?;
    let grad = f2.gradient();
    let bracket = leaf_laplacian(&fac1, &f2) - grad_ff(&fac1, &grad, &grad);
    Ok(lambda - libm::exp(-2.0 * cfg.f1().eval(p)?) * bracket)
}

/// A one-dimensional first factor in arc length together with `λ`.
#[derive(Debug, Clone)]
pub struct Case3Config {
    base: ConformalProductConfig,
    lambda: f64,
    max_order: usize,
}

impl Case3Config {
    pub fn new(base: ConformalProductConfig, lambda: f64) -> Result<Self> {
        let split = base.split();
        if split.n1() != 1 || split.n2() < 2 {
            return Err(Error::Invalid(
                "this reduction needs n1 = 1 and n2 > 1".into(),
            ));
        }
        if base.f1().depends_on_first() {
            return Err(Error::Invalid(
                "f1 must not depend on the first factor".into(),
            ));
        }
        let g1 = base.g1().coeff(0, 0);
        let unit = g1.is_constant()
            && g1
                .eval(&ProductPoint::origin(split))
                .is_ok_and(|v| v == 1.0);
        if !unit {
            return Err(Error::Invalid(
                "g1 must be dt^2 (arc-length coordinate)".into(),
            ));
        }
        Ok(Case3Config {
            base,
            lambda,
            max_order: DEFAULT_JET_ORDER,
        })
    }

    /// Highest `t`-derivative of `f₂` that may be requested (4 or 5).
    pub fn with_max_order(mut self, order: usize) -> Result<Self> {
        if !(1..MAX_JET_ORDER).contains(&order) {
            return Err(Error::OrderUnavailable {
                requested: order,
                max: MAX_JET_ORDER - 1,
            });
        }
        self.max_order = order;
        Ok(self)
    }

    pub fn base(&self) -> &ConformalProductConfig {
        &self.base
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    fn n2(&self) -> usize {
        self.base.split().n2()
    }
}

/// Jet of `f₂` over `(t, y)` with `t`-order `k` and one transverse order.
struct TJet {
    jet: Jet,
    n2: usize,
}

impl TJet {
    fn new(cfg: &Case3Config, p: &ProductPoint, t_order: usize) -> Result<Self> {
        if t_order > cfg.max_order {
            return Err(Error::OrderUnavailable {
                requested: t_order,
                max: cfg.max_order,
            });
        }
        let split = cfg.base.split();
        let vars: Vec<usize> = (0..split.n()).collect();
        let space = JetSpace::over(split, &vars, t_order + 1)?;
        Ok(TJet {
            jet: cfg.base.f2().eval_jet_in(p, &space)?,
            n2: split.n2(),
        })
    }

    /// `∂ₜ^k f₂`.
    fn t(&self, k: usize) -> f64 {
        self.jet.partial_repeated(0, k).expect("order checked")
    }

    /// `∂ᵧⱼ∂ₜ^k f₂`.
    fn ty(&self, k: usize, j: usize) -> f64 {
        let mut idx = alloc::vec![0usize; k];
        idx.push(1 + j);
        self.jet.partial(&idx).expect("order checked")
    }
}

/// A residual entry, possibly undefined at the point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Entry {
    Value(f64),
    NotApplicable,
}

impl Entry {
    pub fn value(self) -> Option<f64> {
        match self {
            Entry::Value(v) => Some(v),
            Entry::NotApplicable => None,
        }
    }
}

/// Left minus right side of each reduced Einstein relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case3Residuals {
    /// `max_j |∂ₜ∂ᵧⱼf₂ − f₂′∂ᵧⱼf₁|`.
    pub deriv22f2: f64,
    pub ric11sp: f64,
    pub f2deriv: f64,
    pub eqlambda: Entry,
    pub f12: f64,
}

pub fn case3_residuals(cfg: &Case3Config, p: &ProductPoint) -> Result<Case3Residuals> {
    let lambda = cfg.lambda;
    let n2 = cfg.n2() as f64;
    let tj = TJet::new(cfg, p, 4)?;
    let (d1, d2, d3, d4) = (tj.t(1), tj.t(2), tj.t(3), tj.t(4));
    let f1 = cfg.base.f1().eval_jet(p, 2)?;
    let f1v = f1.value();
    let f2v = tj.t(0);
    let g1 = f1.gradient();
    let fac2 = factor_geometry(cfg.base.g2(), p)?;
    let g2: Vec<f64> = (0..cfg.base.split().n())
        .map(|c| if c == 0 { d1 } else { tj.ty(0, c - 1) })
        .collect();

    let deriv22f2 = (0..tj.n2).fold(0.0f64, |m, j| m.max((tj.ty(1, j) - d1 * g1[1 + j]).abs()));

    let d2f1_sq = grad_ff(&fac2, &g1, &g1);
    let e22 = libm::exp(2.0 * f2v - 2.0 * f1v);
    let ric11sp = lambda * libm::exp(2.0 * f2v)
        - (leaf_laplacian(&fac2, &f1) + (2.0 - n2) * grad_ff(&fac2, &g2, &g1)
            - d2f1_sq
            - n2 * e22 * (d2 + d1 * d1));
    let f2deriv = 2.0 * lambda * d1 * libm::exp(2.0 * f2v)
        - ((2.0 - n2) * d1 * d2f1_sq - n2 * e22 * (4.0 * d1 * d2 + 2.0 * d1 * d1 * d1 + d3));
    let eqlambda = if d1.abs() < DERIVATIVE_FLOOR {
        Entry::NotApplicable
    } else {
        let rhs =
            12.0 * d2 + 4.0 * d1 * d1 + 6.0 * d3 / d1 + d4 / (d1 * d1) - d2 * d3 / (d1 * d1 * d1);
        Entry::Value(-4.0 * lambda * libm::exp(2.0 * f1v) / n2 - rhs)
    };
    let f12 = d1 * d1 + lambda * libm::exp(2.0 * f1v) / n2;
    Ok(Case3Residuals {
        deriv22f2,
        ric11sp,
        f2deriv,
        eqlambda,
        f12,
    })
}

/// `max_j |∂ᵧⱼf₂^{(k)} − f₂^{(k)}∂ᵧⱼf₁|`.
pub fn kderiv_family_residual(cfg: &Case3Config, p: &ProductPoint, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    let tj = TJet::new(cfg, p, k)?;
    let (_, d2f1) = cfg.base.f1().split_differential(p)?;
    let fk = tj.t(k);
    Ok((0..tj.n2).fold(0.0f64, |m, j| m.max((tj.ty(k, j) - fk * d2f1[j]).abs())))
}

/// The four rational terms of the differentiated reduction, by degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RationalDegreeTerm {
    AMinus1,
    A0,
    A1,
    A2,
}

impl RationalDegreeTerm {
    pub const ALL: [RationalDegreeTerm; 4] = [
        RationalDegreeTerm::A2,
        RationalDegreeTerm::A1,
        RationalDegreeTerm::A0,
        RationalDegreeTerm::AMinus1,
    ];

    pub fn degree(self) -> i32 {
        match self {
            RationalDegreeTerm::AMinus1 => -1,
            RationalDegreeTerm::A0 => 0,
            RationalDegreeTerm::A1 => 1,
            RationalDegreeTerm::A2 => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RationalDegreeTerm::AMinus1 => "A-1",
            RationalDegreeTerm::A0 => "A0",
            RationalDegreeTerm::A1 => "A1",
            RationalDegreeTerm::A2 => "A2",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        RationalDegreeTerm::ALL.into_iter().find(|t| t.label() == s)
    }

    /// Highest `t`-derivative of `f₂` the term uses.
    pub fn t_order(self) -> usize {
        match self {
            RationalDegreeTerm::A2 => 2,
            RationalDegreeTerm::A1 => 3,
            RationalDegreeTerm::A0 => 4,
            RationalDegreeTerm::AMinus1 => 5,
        }
    }

    /// `A_ℓ(f′, f″, …)`; `d[k]` is the `k`-th `t`-derivative (`d[0]` unused).
    pub fn eval<T: Real>(self, d: &[T]) -> T {
        let c = T::from_f64;
        match self {
            RationalDegreeTerm::A2 => c(8.0) * d[1] * d[2],
            RationalDegreeTerm::A1 => c(12.0) * d[3],
            RationalDegreeTerm::A0 => c(6.0) * d[4] / d[1] - c(6.0) * d[2] * d[3] / (d[1] * d[1]),
            RationalDegreeTerm::AMinus1 => {
                let (p2, p3, p4) = (d[1] * d[1], d[1] * d[1] * d[1], d[1] * d[1] * d[1] * d[1]);
                d[5] / p2 - c(3.0) * d[2] * d[4] / p3 - d[3] * d[3] / p3
                    + c(3.0) * d[2] * d[2] * d[3] / p4
            }
        }
    }
}

/// `(∂ₜ^k f₂, ∂ᵧⱼ∂ₜ^k f₂)` as dual numbers, `k = 0..=order`, for each `j`.
pub fn transverse_duals(
    cfg: &Case3Config,
    p: &ProductPoint,
    order: usize,
) -> Result<Vec<Vec<Dual>>> {
    let tj = TJet::new(cfg, p, order)?;
    Ok((0..tj.n2)
        .map(|j| {
            (0..=order)
                .map(|k| Dual::new(tj.t(k), tj.ty(k, j)))
                .collect()
        })
        .collect())
}

/// `max_j |∂ᵧⱼA_ℓ − ℓA_ℓ∂ᵧⱼf₁|`, gated on the `k`-derivative relation and on
/// `f₂′ ≠ 0`.
pub fn homogeneity_check(
    cfg: &Case3Config,
    p: &ProductPoint,
    term: RationalDegreeTerm,
) -> Result<f64> {
    let order = term.t_order();
    let gate = order.max(4).min(cfg.max_order);
    if order > cfg.max_order {
        return Err(Error::OrderUnavailable {
            requested: order,
            max: cfg.max_order,
        });
    }
    for k in 1..=gate {
        let r = kderiv_family_residual(cfg, p, k)?;
        if !(r < KDERIV_TOLERANCE) {
            return Err(Error::Precondition {
                check: "kderiv",
                value: r,
                tolerance: KDERIV_TOLERANCE,
            });
        }
    }
    let duals = transverse_duals(cfg, p, order)?;
    let d1 = duals[0][1].re;
    if d1.abs() < DERIVATIVE_FLOOR {
        return Err(Error::Precondition {
            check: "f2' != 0",
            value: d1.abs(),
            tolerance: DERIVATIVE_FLOOR,
        });
    }
    let (_, d2f1) = cfg.base.f1().split_differential(p)?;
    let l = term.degree() as f64;
    let mut worst: f64 = 0.0;
    for (j, d) in duals.iter().enumerate() {
        let a = term.eval(d);
        worst = worst.max((a.eps - l * a.re * d2f1[j]).abs());
    }
    Ok(worst)
}
