use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::jet::{Jet, JetSpace};
use super::{Expr, Func, ProductPoint, ScalarExpr};
use crate::error::{DomainError, DomainKind, Error, Result};
use crate::math;

impl ScalarExpr {
    /// Plain value at `p`.
    pub fn eval(&self, p: &ProductPoint) -> Result<f64> {
        self.check_point(p)?;
        let mut ev = ValueEval {
            split: self.split,
            z: p.coords(),
        };
        ev.eval(&self.root)
    }

    /// Jet of the given order in all product coordinates.
    pub fn eval_jet(&self, p: &ProductPoint, order: usize) -> Result<Jet> {
        let space = JetSpace::full(self.split, order)?;
        self.eval_jet_in(p, &space)
    }

    /// Jet in the variables of a caller-provided space.
    pub fn eval_jet_in(&self, p: &ProductPoint, space: &Arc<JetSpace>) -> Result<Jet> {
        self.check_point(p)?;
        let mut ev = JetEval {
            split: self.split,
            space,
            p,
        };
        ev.eval(&self.root)
    }

    /// `(d₁f, d₂f)` at `p` as coordinate components.
    pub fn split_differential(&self, p: &ProductPoint) -> Result<(Vec<f64>, Vec<f64>)> {
        let g = self.eval_jet(p, 1)?.gradient();
        let n1 = self.split.n1();
        Ok((g[..n1].to_vec(), g[n1..].to_vec()))
    }

    /// Row-major `n1 × n2` matrix of `∂²f/∂xᵢ∂yⱼ`.
    pub fn mixed_d1d2(&self, p: &ProductPoint) -> Result<Vec<f64>> {
        let h = self.eval_jet(p, 2)?.hessian();
        let (n1, n) = (self.split.n1(), self.split.n());
        let mut m = Vec::with_capacity(n1 * self.split.n2());
        for i in 0..n1 {
            for j in n1..n {
                m.push(h[i * n + j]);
            }
        }
        Ok(m)
    }

    fn check_point(&self, p: &ProductPoint) -> Result<()> {
        if p.split() != self.split {
            return Err(Error::Dimension(alloc::format!(
                "point split {:?} does not match expression split {:?}",
                p.split(),
                self.split
            )));
        }
        Ok(())
    }
}

fn domain(kind: DomainKind, e: &Expr, split: super::CoordSplit, value: f64) -> Error {
    let subexpr = ScalarExpr::from_root(split, e.clone()).to_string();
    Error::Domain(DomainError {
        kind,
        subexpr,
        value,
    })
}

fn finite(v: f64, e: &Expr, split: super::CoordSplit) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(DomainKind::NonFinite, e, split, v))
    }
}

struct ValueEval<'a> {
    split: super::CoordSplit,
    z: &'a [f64],
}

impl ValueEval<'_> {
    fn eval(&mut self, e: &Expr) -> Result<f64> {
        let v = match e {
            Expr::Const(c) => *c,
            Expr::Coord(i) => self.z[*i],
            Expr::Neg(a) => -self.eval(a)?,
            Expr::Add(a, b) => self.eval(a)? + self.eval(b)?,
            Expr::Sub(a, b) => self.eval(a)? - self.eval(b)?,
            Expr::Mul(a, b) => self.eval(a)? * self.eval(b)?,
            Expr::Div(a, b) => {
                let num = self.eval(a)?;
                let den = self.eval(b)?;
                if den == 0.0 {
                    return Err(domain(DomainKind::DivisionByZero, b, self.split, den));
                }
                num / den
            }
            Expr::Pow(a, k) => {
                let base = self.eval(a)?;
                if *k < 0 && base == 0.0 {
                    return Err(domain(DomainKind::DivisionByZero, a, self.split, base));
                }
                powi(base, *k)
            }
            Expr::Call(func, a) => {
                let x = self.eval(a)?;
                match func {
                    Func::Sin => math::sin(x),
                    Func::Cos => math::cos(x),
                    Func::Exp => math::exp(x),
                    Func::Sinh => math::sinh(x),
                    Func::Cosh => math::cosh(x),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(domain(DomainKind::LogOfNonPositive, a, self.split, x));
                        }
                        math::ln(x)
                    }
                }
            }
        };
        finite(v, e, self.split)
    }
}

fn powi(base: f64, k: i32) -> f64 {
    let mut r = 1.0;
    let mut b = base;
    let mut e = k.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            r *= b;
        }
        b *= b;
        e >>= 1;
    }
    if k < 0 {
        1.0 / r
    } else {
        r
    }
}

struct JetEval<'a> {
    split: super::CoordSplit,
    space: &'a Arc<JetSpace>,
    p: &'a ProductPoint,
}

impl JetEval<'_> {
    fn reciprocal(&self, j: &Jet, e: &Expr) -> Result<Jet> {
        let a = j.value();
        if a == 0.0 {
            return Err(domain(DomainKind::DivisionByZero, e, self.split, a));
        }
        // (1/x)^{(m)} = (-1)^m m! / x^{m+1}
        let order = self.space.order();
        let mut d = Vec::with_capacity(order + 1);
        let mut cur = 1.0 / a;
        for m in 0..=order {
            d.push(cur);
            cur *= -((m + 1) as f64) / a;
        }
        Ok(j.compose(&d))
    }

    fn eval(&mut self, e: &Expr) -> Result<Jet> {
        let j = match e {
            Expr::Const(c) => Jet::constant(self.space, *c),
            Expr::Coord(i) => Jet::variable(self.space, self.p, *i),
            Expr::Neg(a) => self.eval(a)?.neg(),
            Expr::Add(a, b) => self.eval(a)?.add(&self.eval(b)?),
            Expr::Sub(a, b) => self.eval(a)?.sub(&self.eval(b)?),
            Expr::Mul(a, b) => self.eval(a)?.mul(&self.eval(b)?),
            Expr::Div(a, b) => {
                let num = self.eval(a)?;
                let den = self.eval(b)?;
                num.mul(&self.reciprocal(&den, b)?)
            }
            Expr::Pow(a, k) => {
                let base = self.eval(a)?;
                let pos = base.powi(k.unsigned_abs());
                if *k < 0 {
                    if base.value() == 0.0 {
                        return Err(domain(DomainKind::DivisionByZero, a, self.split, 0.0));
                    }
                    self.reciprocal(&pos, e)?
                } else {
                    pos
                }
            }
            Expr::Call(func, a) => {
                let inner = self.eval(a)?;
                let x = inner.value();
                let order = self.space.order();
                let derivs = univariate_derivatives(*func, x, order)
                    .ok_or_else(|| domain(DomainKind::LogOfNonPositive, a, self.split, x))?;
                inner.compose(&derivs)
            }
        };
        finite(j.value(), e, self.split)?;
        Ok(j)
    }
}

/// `φ^{(m)}(x)` for `m = 0..=order`; `None` outside the domain of `log`.
fn univariate_derivatives(func: Func, x: f64, order: usize) -> Option<Vec<f64>> {
    let mut d = Vec::with_capacity(order + 1);
    match func {
        Func::Sin | Func::Cos => {
            let (s, c) = (math::sin(x), math::cos(x));
            let cycle = if func == Func::Sin {
                [s, c, -s, -c]
            } else {
                [c, -s, -c, s]
            };
            d.extend((0..=order).map(|m| cycle[m % 4]));
        }
        Func::Exp => d.extend(core::iter::repeat_n(math::exp(x), order + 1)),
        Func::Sinh | Func::Cosh => {
            let (sh, ch) = (math::sinh(x), math::cosh(x));
            let pair = if func == Func::Sinh {
                [sh, ch]
            } else {
                [ch, sh]
            };
            d.extend((0..=order).map(|m| pair[m % 2]));
        }
        Func::Log => {
            if x <= 0.0 {
                return None;
            }
            d.push(math::ln(x));
            // (log x)^{(m)} = (-1)^{m-1} (m-1)! / x^m
            let mut cur = 1.0 / x;
            for m in 1..=order {
                d.push(cur);
                cur *= -(m as f64) / x;
            }
        }
    }
    Some(d)
}
