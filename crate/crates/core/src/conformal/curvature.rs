//! Closed-form curvature of conformal product metrics.
//!
//! Second derivatives of the conformal factors with both slots in one factor
//! enter as leaf Hessians `Hess^{gᵢ}(f)(X, Y) = X(Y(f)) − (∇^{gᵢ}_X Y)(f)`;
//! mixed second derivatives are plain partials. Laplacians are the
//! geometers' ones, `Δᵢ = −tr_{gᵢ} Hess^{gᵢ}`.

use alloc::vec;
use alloc::vec::Vec;

use super::ConformalProductConfig;
use crate::error::Result;
use crate::expr::{CoordSplit, Jet, ProductPoint};
use crate::oracle::{self, Christoffel, MetricField};
use crate::real::Real;
use crate::tensor::{MetricValue, Riemann4Value, Sym2Value};

/// Pointwise geometry of one factor metric, in factor-local indices.
#[derive(Debug, Clone)]
pub struct FactorGeometry {
    /// First product coordinate of the factor.
    pub offset: usize,
    pub metric: MetricValue,
    pub gamma: Christoffel,
    pub riemann: Riemann4Value,
    pub ricci: Sym2Value,
}

impl FactorGeometry {
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// Flat factor `δ` of dimension `d` starting at `offset`.
    pub fn flat(offset: usize, d: usize) -> Self {
        FactorGeometry {
            offset,
            metric: MetricValue::new(Sym2Value::identity(d))
                .expect("identity is positive definite"),
            gamma: Christoffel::zeros(d),
            riemann: Riemann4Value::zeros(d),
            ricci: Sym2Value::zeros(d),
        }
    }
}

pub fn factor_geometry(m: &MetricField, p: &ProductPoint) -> Result<FactorGeometry> {
    let rep = oracle::curvature(m, p)?;
    Ok(FactorGeometry {
        offset: m.chart()[0],
        metric: rep.metric,
        gamma: rep.gamma,
        riemann: rep.riemann,
        ricci: rep.ricci,
    })
}

/// Value, gradient and Hessian (row-major) over all product coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2<T> {
    pub value: T,
    pub grad: Vec<T>,
    pub hess: Vec<T>,
}

impl Jet2<f64> {
    pub fn from_jet(j: &Jet) -> Self {
        Jet2 {
            value: j.value(),
            grad: j.gradient(),
            hess: j.hessian(),
        }
    }
}

impl<T: Real> Jet2<T> {
    pub fn constant(n: usize, v: f64) -> Self {
        Jet2 {
            value: T::from_f64(v),
            grad: vec![T::from_f64(0.0); n],
            hess: vec![T::from_f64(0.0); n * n],
        }
    }

    fn n(&self) -> usize {
        self.grad.len()
    }

    #[inline]
    fn h(&self, a: usize, b: usize) -> T {
        self.hess[a * self.n() + b]
    }
}

/// Everything the closed forms need at one point.
#[derive(Debug, Clone)]
pub struct PointData {
    pub split: CoordSplit,
    pub fac1: FactorGeometry,
    pub fac2: FactorGeometry,
    pub f1: Jet2<f64>,
    pub f2: Jet2<f64>,
}

pub fn point_data(cfg: &ConformalProductConfig, p: &ProductPoint) -> Result<PointData> {
    Ok(PointData {
        split: cfg.split(),
        fac1: factor_geometry(cfg.g1(), p)?,
        fac2: factor_geometry(cfg.g2(), p)?,
        f1: Jet2::from_jet(&cfg.f1().eval_jet(p, 2)?),
        f2: Jet2::from_jet(&cfg.f2().eval_jet(p, 2)?),
    })
}

/// Leaf quantities of a scalar on one factor.
struct Leaf<'a, T> {
    fac: &'a FactorGeometry,
    f: &'a Jet2<T>,
}

impl<T: Real> Leaf<'_, T> {
    fn zero() -> T {
        T::from_f64(0.0)
    }

    /// `Hess^{gᵢ}(f)_{ab}` in local indices.
    fn hess(&self, a: usize, b: usize) -> T {
        let o = self.fac.offset;
        let mut h = self.f.h(o + a, o + b);
        for c in 0..self.fac.dim() {
            h = h - self.f.grad[o + c].scale(self.fac.gamma.get(c, a, b));
        }
        h
    }

    fn hess_on(&self, x: &[f64], y: &[f64]) -> T {
        let d = self.fac.dim();
        let mut s = Self::zero();
        for a in 0..d {
            for b in 0..d {
                let w = x[a] * y[b];
                if w != 0.0 {
                    s = s + self.hess(a, b).scale(w);
                }
            }
        }
        s
    }

    /// `Δᵢf = −gᵢ^{ab} Hess_{ab}`.
    fn laplacian(&self) -> T {
        let inv = self.fac.metric.inverse();
        let d = self.fac.dim();
        let mut s = Self::zero();
        for a in 0..d {
            for b in 0..d {
                s = s + self.hess(a, b).scale(inv.get(a, b));
            }
        }
        -s
    }

    /// `X(f)` for a local vector.
    fn along(&self, x: &[f64]) -> T {
        let o = self.fac.offset;
        let mut s = Self::zero();
        for (a, &xa) in x.iter().enumerate() {
            if xa != 0.0 {
                s = s + self.f.grad[o + a].scale(xa);
            }
        }
        s
    }
}

/// `gᵢ(dᵢu, dᵢv)` with the factor metric.
fn factor_inner<T: Real>(fac: &FactorGeometry, u: &Jet2<T>, v: &Jet2<T>) -> T {
    let inv = fac.metric.inverse();
    let o = fac.offset;
    let mut s = T::from_f64(0.0);
    for a in 0..fac.dim() {
        for b in 0..fac.dim() {
            s = s + (u.grad[o + a] * v.grad[o + b]).scale(inv.get(a, b));
        }
    }
    s
}

/// Closed-form Ricci tensor of `e^{2f₁}g₁ + e^{2f₂}g₂`, row-major `n × n`.
///
/// Generic over the scalar type so that callers can push dual numbers
/// through the conformal factors; the factor geometry is plain `f64`.
pub fn ricci_from_jets<T: Real>(
    split: CoordSplit,
    fac1: &FactorGeometry,
    fac2: &FactorGeometry,
    f1: &Jet2<T>,
    f2: &Jet2<T>,
) -> Vec<T> {
    let (n, n1, n2) = (split.n(), split.n1(), split.n2());
    let (n1f, n2f, nf) = (n1 as f64, n2 as f64, n as f64);
    let e1 = f1.value.scale(2.0).exp();
    let e2 = f2.value.scale(2.0).exp();
    let ie1 = f1.value.scale(-2.0).exp();
    let ie2 = f2.value.scale(-2.0).exp();

    let l1f1 = Leaf { fac: fac1, f: f1 };
    let l1f2 = Leaf { fac: fac1, f: f2 };
    let l2f1 = Leaf { fac: fac2, f: f1 };
    let l2f2 = Leaf { fac: fac2, f: f2 };

    let i1 = |u, v| factor_inner(fac1, u, v);
    let i2 = |u, v| factor_inner(fac2, u, v);

    // scalar coefficients of |X|²_g in each block
    let c1 = ie2 * l2f1.laplacian() + ie1 * l1f1.laplacian() + (ie2 * i2(f1, f2)).scale(2.0 - n2f)
        - ((ie1 * i1(f1, f2)).scale(n2f) + (ie2 * i2(f1, f1)).scale(n1f)
            - (ie1 * i1(f1, f1)).scale(2.0 - n1f));
    let c2 = ie1 * l1f2.laplacian() + ie2 * l2f2.laplacian() + (ie1 * i1(f1, f2)).scale(2.0 - n1f)
        - ((ie2 * i2(f2, f1)).scale(n1f) + (ie1 * i1(f2, f2)).scale(n2f)
            - (ie2 * i2(f2, f2)).scale(2.0 - n2f));

    // quadratic forms on each factor
    let q1 = |x: &[f64]| -> T {
        let xx = e1.scale(fac1.metric.inner(x, x));
        let (xf1, xf2) = (l1f1.along(x), l1f2.along(x));
        T::from_f64(fac1.ricci.apply(x, x))
            + c1 * xx
            + (l1f1.hess_on(x, x) - xf1 * xf1).scale(2.0 - n1f)
            - (l1f2.hess_on(x, x) + xf2 * xf2 - (xf1 * xf2).scale(2.0)).scale(n2f)
    };
    let q2 = |x: &[f64]| -> T {
        let xx = e2.scale(fac2.metric.inner(x, x));
        let (xf1, xf2) = (l2f1.along(x), l2f2.along(x));
        T::from_f64(fac2.ricci.apply(x, x))
            + c2 * xx
            + (l2f2.hess_on(x, x) - xf2 * xf2).scale(2.0 - n2f)
            - (l2f1.hess_on(x, x) + xf1 * xf1 - (xf2 * xf1).scale(2.0)).scale(n1f)
    };

    let mut ric = vec![T::from_f64(0.0); n * n];
    polarize_into(&mut ric, n, 0, n1, q1);
    polarize_into(&mut ric, n, n1, n2, q2);
    for a in 0..n1 {
        for j in n1..n {
            let v = f1.h(a, j).scale(1.0 - n1f)
                + f2.h(a, j).scale(1.0 - n2f)
                + (f2.grad[a] * f1.grad[j]).scale(nf - 2.0);
            ric[a * n + j] = v;
            ric[j * n + a] = v;
        }
    }
    ric
}

/// Fills the diagonal block at `offset` from a quadratic form:
/// `B(eᵢ, eⱼ) = ½[Q(eᵢ + eⱼ) − Q(eᵢ) − Q(eⱼ)]`.
fn polarize_into<T: Real>(
    out: &mut [T],
    n: usize,
    offset: usize,
    d: usize,
    q: impl Fn(&[f64]) -> T,
) {
    let unit = |i: usize| {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        v
    };
    let diag: Vec<T> = (0..d).map(|i| q(&unit(i))).collect();
    for i in 0..d {
        out[(offset + i) * n + offset + i] = diag[i];
        for j in i + 1..d {
            let mut v = unit(i);
            v[j] = 1.0;
            let b = (q(&v) - diag[i] - diag[j]).scale(0.5);
            out[(offset + i) * n + offset + j] = b;
            out[(offset + j) * n + offset + i] = b;
        }
    }
}

pub fn ricci_cp(cfg: &ConformalProductConfig, p: &ProductPoint) -> Result<Sym2Value> {
    let pd = point_data(cfg, p)?;
    let n = pd.split.n();
    let r = ricci_from_jets(pd.split, &pd.fac1, &pd.fac2, &pd.f1, &pd.f2);
    Ok(Sym2Value::from_row_major(n, &r))
}

/// How the components of one block class were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    /// Read off a closed form for four arbitrary arguments.
    Direct,
    /// Recovered from a closed-form sectional-type quadratic by polarization.
    Polarized,
    /// Fixed by the first Bianchi identity from polarized components.
    Bianchi,
}

/// A block class `(b₁b₂|b₃b₄)` together with its completion rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurvatureClass {
    pub pattern: [u8; 4],
    pub completion: Completion,
}

pub const CURVATURE_CLASSES: [CurvatureClass; 6] = [
    CurvatureClass {
        pattern: [1, 1, 1, 1],
        completion: Completion::Polarized,
    },
    CurvatureClass {
        pattern: [1, 1, 1, 2],
        completion: Completion::Direct,
    },
    CurvatureClass {
        pattern: [1, 2, 2, 1],
        completion: Completion::Polarized,
    },
    CurvatureClass {
        pattern: [1, 1, 2, 2],
        completion: Completion::Bianchi,
    },
    CurvatureClass {
        pattern: [2, 2, 2, 1],
        completion: Completion::Direct,
    },
    CurvatureClass {
        pattern: [2, 2, 2, 2],
        completion: Completion::Polarized,
    },
];

/// Closed-form Riemann tensor with the completion rule of every class.
#[derive(Debug, Clone)]
pub struct RiemannCp {
    pub tensor: Riemann4Value,
    pub classes: &'static [CurvatureClass],
}

/// Sign and index permutation of the eight symmetries `R_{ijkl}`.
const SYMMETRIES: [(f64, [usize; 4]); 8] = [
    (1.0, [0, 1, 2, 3]),
    (-1.0, [1, 0, 2, 3]),
    (-1.0, [0, 1, 3, 2]),
    (1.0, [1, 0, 3, 2]),
    (1.0, [2, 3, 0, 1]),
    (-1.0, [3, 2, 0, 1]),
    (-1.0, [2, 3, 1, 0]),
    (1.0, [3, 2, 1, 0]),
];

struct Closed<'a> {
    pd: &'a PointData,
    n: usize,
    n1: usize,
    e1: f64,
    e2: f64,
    /// `g(df₁, df₁)`, `g(df₂, df₂)`, `g(df₁, df₂)` with the assembled metric.
    df11: f64,
    df22: f64,
    df12: f64,
}

impl<'a> Closed<'a> {
    fn new(pd: &'a PointData) -> Self {
        let e1 = libm::exp(2.0 * pd.f1.value);
        let e2 = libm::exp(2.0 * pd.f2.value);
        let full = |u: &Jet2<f64>, v: &Jet2<f64>| {
            factor_inner(&pd.fac1, u, v) / e1 + factor_inner(&pd.fac2, u, v) / e2
        };
        Closed {
            pd,
            n: pd.split.n(),
            n1: pd.split.n1(),
            e1,
            e2,
            df11: full(&pd.f1, &pd.f1),
            df22: full(&pd.f2, &pd.f2),
            df12: full(&pd.f1, &pd.f2),
        }
    }

    fn block(&self, i: usize) -> u8 {
        if i < self.n1 {
            1
        } else {
            2
        }
    }

    /// Factor-local data for block `b`: (geometry, own factor, other factor, conformal weight).
    fn side(&self, b: u8) -> (&FactorGeometry, &Jet2<f64>, &Jet2<f64>, f64) {
        if b == 1 {
            (&self.pd.fac1, &self.pd.f1, &self.pd.f2, self.e1)
        } else {
            (&self.pd.fac2, &self.pd.f2, &self.pd.f1, self.e2)
        }
    }

    fn unit(&self, b: u8, i: usize) -> Vec<f64> {
        let (fac, ..) = self.side(b);
        let mut v = vec![0.0; fac.dim()];
        v[i - fac.offset] = 1.0;
        v
    }

    /// `R(X, Y, Y, X)` for `X, Y` tangent to factor `b`.
    fn k_same(&self, b: u8, x: &[f64], y: &[f64]) -> f64 {
        let (fac, f, _, e) = self.side(b);
        let df = if b == 1 { self.df11 } else { self.df22 };
        let leaf = Leaf { fac, f };
        let (gxy, xx, yy) = (
            e * fac.metric.inner(x, y),
            e * fac.metric.inner(x, x),
            e * fac.metric.inner(y, y),
        );
        let (xf, yf) = (leaf.along(x), leaf.along(y));
        e * fac.riemann.eval_raw(x, y, y, x) + 2.0 * leaf.hess_on(x, y) * gxy + gxy * gxy * df
            - 2.0 * xf * yf * gxy
            - leaf.hess_on(x, x) * yy
            - leaf.hess_on(y, y) * xx
            + xf * xf * yy
            + yf * yf * xx
            - df * xx * yy
    }

    /// `R(X₁, X₂, X₂, X₁)`.
    fn k_mixed(&self, x1: &[f64], x2: &[f64]) -> f64 {
        let pd = self.pd;
        let xx = self.e1 * pd.fac1.metric.inner(x1, x1);
        let yy = self.e2 * pd.fac2.metric.inner(x2, x2);
        let (a1, a2) = (
            Leaf {
                fac: &pd.fac1,
                f: &pd.f1,
            },
            Leaf {
                fac: &pd.fac1,
                f: &pd.f2,
            },
        );
        let (b1, b2) = (
            Leaf {
                fac: &pd.fac2,
                f: &pd.f1,
            },
            Leaf {
                fac: &pd.fac2,
                f: &pd.f2,
            },
        );
        let (x1f1, x1f2) = (a1.along(x1), a2.along(x1));
        let (x2f1, x2f2) = (b1.along(x2), b2.along(x2));
        -x1f2 * x1f2 * yy - a2.hess_on(x1, x1) * yy + 2.0 * x1f1 * x1f2 * yy
            - b1.hess_on(x2, x2) * xx
            + 2.0 * x2f1 * x2f2 * xx
            - x2f1 * x2f1 * xx
            - self.df12 * xx * yy
    }

    /// `R(eᵢ, eⱼ, eₖ, eₗ)` with `i, j, k` in block `b` and `l` in the other.
    fn three_one(&self, b: u8, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let (fac, _, _, e) = self.side(b);
        let o = fac.offset;
        // f: the factor of the other block's weight (f₁ for b = 1)
        let (own_f, other_f) = if b == 1 {
            (&self.pd.f1, &self.pd.f2)
        } else {
            (&self.pd.f2, &self.pd.f1)
        };
        let g = |a: usize, c: usize| e * fac.metric.metric().get(a - o, c - o);
        let n = self.n;
        let term = |a: usize| own_f.hess[a * n + l] - other_f.grad[a] * own_f.grad[l];
        g(i, k) * term(j) - g(j, k) * term(i)
    }

    /// Same-block tensor from the sectional quadratic.
    fn same_block(&self, b: u8, idx: [usize; 4]) -> f64 {
        let [i, j, k, l] = idx.map(|c| self.unit(b, c));
        let add = |u: &[f64], v: &[f64], s: f64| -> Vec<f64> {
            u.iter().zip(v).map(|(a, c)| a + s * c).collect()
        };
        let bil = |x: &[f64], w: &[f64], y: &[f64]| {
            0.25 * (self.k_same(b, &add(x, w, 1.0), y) - self.k_same(b, &add(x, w, -1.0), y))
        };
        let s = |x: &[f64], w: &[f64], y: &[f64], z: &[f64]| {
            0.25 * (bil(x, w, &add(y, z, 1.0)) - bil(x, w, &add(y, z, -1.0)))
        };
        (2.0 / 3.0) * (s(&i, &l, &j, &k) - s(&i, &k, &j, &l))
    }

    /// `R(eₐ, eᵢ, eⱼ, e_b)` with `a, b` in the first block, `i, j` in the second.
    fn mixed_pair(&self, a: usize, i: usize, j: usize, b: usize) -> f64 {
        let (xa, xb) = (self.unit(1, a), self.unit(1, b));
        let (yi, yj) = (self.unit(2, i), self.unit(2, j));
        let add = |u: &[f64], v: &[f64], s: f64| -> Vec<f64> {
            u.iter().zip(v).map(|(p, q)| p + s * q).collect()
        };
        let bil = |y: &[f64]| {
            0.25 * (self.k_mixed(&add(&xa, &xb, 1.0), y) - self.k_mixed(&add(&xa, &xb, -1.0), y))
        };
        0.25 * (bil(&add(&yi, &yj, 1.0)) - bil(&add(&yi, &yj, -1.0)))
    }

    fn component(&self, idx: [usize; 4]) -> f64 {
        let blocks = idx.map(|c| self.block(c));
        let twos = blocks.iter().filter(|&&b| b == 2).count();
        match twos {
            0 => self.same_block(1, idx),
            4 => self.same_block(2, idx),
            1 | 3 => {
                let target = if twos == 1 {
                    [1, 1, 1, 2]
                } else {
                    [2, 2, 2, 1]
                };
                let (sign, [i, j, k, l]) = self.image(idx, target);
                sign * self.three_one(target[0], i, j, k, l)
            }
            _ => {
                if let Some((sign, [a, i, j, b])) = self.try_image(idx, [1, 2, 2, 1]) {
                    sign * self.mixed_pair(a, i, j, b)
                } else {
                    // R(a, b, i, j) = M(b, i, j, a) − M(a, i, j, b)
                    let (sign, [a, b, i, j]) = self.image(idx, [1, 1, 2, 2]);
                    sign * (self.mixed_pair(b, i, j, a) - self.mixed_pair(a, i, j, b))
                }
            }
        }
    }

    fn try_image(&self, idx: [usize; 4], target: [u8; 4]) -> Option<(f64, [usize; 4])> {
        SYMMETRIES.iter().find_map(|&(sign, perm)| {
            let img = perm.map(|p| idx[p]);
            (img.map(|c| self.block(c)) == target).then_some((sign, img))
        })
    }

    fn image(&self, idx: [usize; 4], target: [u8; 4]) -> (f64, [usize; 4]) {
        self.try_image(idx, target)
            .expect("every block pattern has a class representative")
    }
}

pub fn riemann_from_data(pd: &PointData) -> Riemann4Value {
    let c = Closed::new(pd);
    let n = c.n;
    let mut r = Riemann4Value::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    r.set(i, j, k, l, c.component([i, j, k, l]));
                }
            }
        }
    }
    r
}

pub fn riemann_cp(cfg: &ConformalProductConfig, p: &ProductPoint) -> Result<RiemannCp> {
    let pd = point_data(cfg, p)?;
    Ok(RiemannCp {
        tensor: riemann_from_data(&pd),
        classes: &CURVATURE_CLASSES,
    })
}
