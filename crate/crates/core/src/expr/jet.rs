//! Truncated multivariate Taylor jets.
//!
//! Coefficients are stored as Taylor coefficients `∂^α f / α!` in graded
//! order, which turns multiplication into a plain convolution over a
//! precomputed product table.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{CoordSplit, ProductPoint};
use crate::error::{Error, Result};

/// Hard cap on total jet order. The one-dimensional-factor checks need five
/// derivatives along the first factor plus one transverse derivative.
pub const MAX_JET_ORDER: usize = 6;
pub const MAX_JET_VARS: usize = 8;

#[derive(Debug)]
struct Layout {
    nvars: usize,
    order: usize,
    exps: Vec<[u8; MAX_JET_VARS]>,
    /// `α!` per monomial.
    factorial: Vec<f64>,
    /// `(i, j, k)` with `mono[i] + mono[j] = mono[k]`.
    products: Vec<(u32, u32, u32)>,
    index: BTreeMap<u64, usize>,
}

fn pack(e: &[u8; MAX_JET_VARS]) -> u64 {
    u64::from_le_bytes(*e)
}

fn enumerate(
    nvars: usize,
    degree: usize,
    var: usize,
    cur: &mut [u8; MAX_JET_VARS],
    out: &mut Vec<[u8; MAX_JET_VARS]>,
) {
    if var + 1 == nvars {
        cur[var] = degree as u8;
        out.push(*cur);
        cur[var] = 0;
        return;
    }
    for d in (0..=degree).rev() {
        cur[var] = d as u8;
        enumerate(nvars, degree - d, var + 1, cur, out);
    }
    cur[var] = 0;
}

impl Layout {
    fn new(nvars: usize, order: usize) -> Layout {
        let mut exps = Vec::new();
        if nvars == 0 {
            exps.push([0u8; MAX_JET_VARS]);
        } else {
            let mut cur = [0u8; MAX_JET_VARS];
            for d in 0..=order {
                enumerate(nvars, d, 0, &mut cur, &mut exps);
            }
        }
        let degree = |e: &[u8; MAX_JET_VARS]| e.iter().map(|&v| v as usize).sum::<usize>();
        let index: BTreeMap<u64, usize> =
            exps.iter().enumerate().map(|(i, e)| (pack(e), i)).collect();
        let factorial = exps
            .iter()
            .map(|e| {
                e.iter()
                    .map(|&k| (1..=k as u32).map(f64::from).product::<f64>())
                    .product()
            })
            .collect();
        let mut products = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            let da = degree(a);
            for (j, b) in exps.iter().enumerate() {
                // graded order: later entries only get larger
                if da + degree(b) > order {
                    break;
                }
                let k = index[&(pack(a) + pack(b))];
                products.push((i as u32, j as u32, k as u32));
            }
        }
        Layout {
            nvars,
            order,
            exps,
            factorial,
            products,
            index,
        }
    }

    fn len(&self) -> usize {
        self.exps.len()
    }
}

/// The variables a jet is taken with respect to, and the truncation order.
///
/// Jet variables are a subset of the product coordinates; the others are
/// held fixed. Build one space and reuse it for many evaluations.
#[derive(Debug)]
pub struct JetSpace {
    split: CoordSplit,
    vars: Vec<usize>,
    slot: Vec<Option<usize>>,
    layout: Layout,
}

impl JetSpace {
    /// Jets in all `n` product coordinates.
    pub fn full(split: CoordSplit, order: usize) -> Result<Arc<JetSpace>> {
        let vars: Vec<usize> = (0..split.n()).collect();
        JetSpace::over(split, &vars, order)
    }

    /// Jets in the listed product coordinates only.
    pub fn over(split: CoordSplit, vars: &[usize], order: usize) -> Result<Arc<JetSpace>> {
        if order > MAX_JET_ORDER {
            return Err(Error::OrderUnavailable {
                requested: order,
                max: MAX_JET_ORDER,
            });
        }
        let mut slot = vec![None; split.n()];
        for (s, &c) in vars.iter().enumerate() {
            if c >= split.n() || slot[c].is_some() {
                return Err(Error::Dimension(format!(
                    "invalid jet variable list {vars:?}"
                )));
            }
            slot[c] = Some(s);
        }
        Ok(Arc::new(JetSpace {
            split,
            vars: vars.to_vec(),
            slot,
            layout: Layout::new(vars.len(), order),
        }))
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn split(&self) -> CoordSplit {
        self.split
    }

    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        self.layout.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Value and all partial derivatives up to a fixed order at one point.
#[derive(Debug, Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, value: f64) -> Jet {
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = value;
        Jet {
            space: Arc::clone(space),
            coeffs,
        }
    }

    /// The coordinate function `z_coord` expanded at `p`.
    pub fn variable(space: &Arc<JetSpace>, p: &ProductPoint, coord: usize) -> Jet {
        let mut j = Jet::constant(space, p.coords()[coord]);
        if let Some(s) = space.slot[coord] {
            if space.order() >= 1 {
                let mut e = [0u8; MAX_JET_VARS];
                e[s] = 1;
                let k = space.layout.index[&pack(&e)];
                j.coeffs[k] = 1.0;
            }
        }
        j
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.space.order()
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub(crate) fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0.0)
    }

    /// `∂^k f / ∂z_{i1} ... ∂z_{ik}` for product coordinate indices, in any
    /// order. Derivatives in coordinates outside the jet space are zero;
    /// requests above the jet order return `None`.
    pub fn partial(&self, coords: &[usize]) -> Option<f64> {
        if coords.len() > self.order() {
            return None;
        }
        let mut e = [0u8; MAX_JET_VARS];
        for &c in coords {
            match self.space.slot.get(c).copied().flatten() {
                Some(s) => e[s] += 1,
                None => return Some(0.0),
            }
        }
        let k = self.space.layout.index[&pack(&e)];
        Some(self.coeffs[k] * self.space.layout.factorial[k])
    }

    /// Derivative of order `k` in a single coordinate.
    pub fn partial_repeated(&self, coord: usize, k: usize) -> Option<f64> {
        let coords = vec![coord; k];
        self.partial(&coords)
    }

    /// First derivatives in every product coordinate (length `n`).
    pub fn gradient(&self) -> Vec<f64> {
        (0..self.space.split.n())
            .map(|c| self.partial(&[c]).unwrap_or(0.0))
            .collect()
    }

    /// Second derivatives, row-major `n × n`.
    pub fn hessian(&self) -> Vec<f64> {
        let n = self.space.split.n();
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.partial(&[i, j]).unwrap_or(0.0);
                h[i * n + j] = v;
                h[j * n + i] = v;
            }
        }
        h
    }

    /// All stored partials as `(nondecreasing coordinate tuple, derivative)`.
    pub fn partials(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let layout = &self.space.layout;
        layout.exps.iter().enumerate().map(move |(k, e)| {
            let mut idx = Vec::new();
            for (s, &m) in e[..layout.nvars].iter().enumerate() {
                for _ in 0..m {
                    idx.push(self.space.vars[s]);
                }
            }
            idx.sort_unstable();
            (idx, self.coeffs[k] * layout.factorial[k])
        })
    }

    pub(crate) fn add(&self, o: &Jet) -> Jet {
        self.zip(o, |a, b| a + b)
    }

    pub(crate) fn sub(&self, o: &Jet) -> Jet {
        self.zip(o, |a, b| a - b)
    }

    pub(crate) fn neg(&self) -> Jet {
        self.map(|a| -a)
    }

    pub(crate) fn scale(&self, k: f64) -> Jet {
        self.map(|a| a * k)
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Jet {
        Jet {
            space: Arc::clone(&self.space),
            coeffs: self.coeffs.iter().map(|&a| f(a)).collect(),
        }
    }

    fn zip(&self, o: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        Jet {
            space: Arc::clone(&self.space),
            coeffs: self
                .coeffs
                .iter()
                .zip(&o.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub(crate) fn mul(&self, o: &Jet) -> Jet {
        if o.is_constant() {
            return self.scale(o.value());
        }
        if self.is_constant() {
            return o.scale(self.value());
        }
        let mut out = vec![0.0; self.coeffs.len()];
        for &(i, j, k) in &self.space.layout.products {
            out[k as usize] += self.coeffs[i as usize] * o.coeffs[j as usize];
        }
        Jet {
            space: Arc::clone(&self.space),
            coeffs: out,
        }
    }

    /// `φ ∘ self` given `derivs[m] = φ^{(m)}(self.value())`, `m = 0..=order`.
    pub(crate) fn compose(&self, derivs: &[f64]) -> Jet {
        let order = self.order();
        debug_assert!(derivs.len() > order);
        if self.is_constant() || order == 0 {
            return Jet::constant(&self.space, derivs[0]);
        }
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        // Horner in h with Taylor coefficients φ^{(m)}/m!
        let mut fact = 1.0;
        let mut taylor = vec![0.0; order + 1];
        for (m, t) in taylor.iter_mut().enumerate() {
            if m > 0 {
                fact *= m as f64;
            }
            *t = derivs[m] / fact;
        }
        let mut r = Jet::constant(&self.space, taylor[order]);
        for m in (0..order).rev() {
            r = r.mul(&h);
            r.coeffs[0] += taylor[m];
        }
        r
    }

    pub(crate) fn powi(&self, k: u32) -> Jet {
        let mut result = Jet::constant(&self.space, 1.0);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }
}
