//! Pointwise tensor values on the product chart.
//!
//! Indices run over product coordinates `0..n`; the first `n1` belong to the
//! first factor. Curvature is stored fully covariant,
//! `R[i][j][k][l] = g(R(∂ᵢ, ∂ⱼ)∂ₖ, ∂ₗ)` with `R(X, Y) = [∇_X, ∇_Y] − ∇_[X,Y]`,
//! so a round sphere has `R(X, Y, Y, X) > 0`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::CoordSplit;

/// Pivot ratio below which a metric value is treated as singular.
pub const PIVOT_RATIO: f64 = 1e-12;

/// Symmetric bilinear form, packed upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Sym2Value {
    n: usize,
    data: Vec<f64>,
}

#[inline]
fn packed(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl Sym2Value {
    pub fn zeros(n: usize) -> Self {
        Sym2Value {
            n,
            data: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        Sym2Value::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Upper-triangle entries are taken from `f(i, j)` with `i ≤ j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut s = Sym2Value::zeros(n);
        for i in 0..n {
            for j in i..n {
                s.data[packed(n, i, j)] = f(i, j);
            }
        }
        s
    }

    /// From a row-major square matrix; the lower triangle is ignored.
    pub fn from_row_major(n: usize, m: &[f64]) -> Self {
        Sym2Value::from_fn(n, |i, j| m[i * n + j])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[packed(self.n, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = packed(self.n, i, j);
        self.data[k] = v;
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = self.get(i, j);
            }
        }
        m
    }

    /// `B(X, Y)`.
    pub fn apply(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += x[i] * self.get(i, j) * y[j];
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &Sym2Value) -> Sym2Value {
        Sym2Value {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scaled(&self, k: f64) -> Sym2Value {
        Sym2Value {
            n: self.n,
            data: self.data.iter().map(|a| a * k).collect(),
        }
    }

    /// Block `(a, b)` with `a, b ∈ {1, 2}`, row-major.
    pub fn block(&self, split: CoordSplit, a: u8, b: u8) -> Vec<f64> {
        let range = |k: u8| {
            if k == 1 {
                split.first()
            } else {
                split.second()
            }
        };
        let (ra, rb) = (range(a), range(b));
        let mut out = Vec::with_capacity(ra.len() * rb.len());
        for i in ra {
            for j in rb.clone() {
                out.push(self.get(i, j));
            }
        }
        out
    }

    /// Largest absolute entry of the off-diagonal block.
    pub fn mixed_block_max(&self, split: CoordSplit) -> f64 {
        self.block(split, 1, 2)
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Symmetric `LDLᵀ` with diagonal pivoting. Fails when a pivot is not
    /// larger than [`PIVOT_RATIO`] times the largest pivot.
    pub fn factor(&self) -> Result<LdlFactor> {
        let n = self.n;
        let mut a = self.to_row_major();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n * n];
        let mut max_pivot: f64 = 0.0;
        for k in 0..n {
            // pick largest remaining diagonal
            let mut best = k;
            for i in k + 1..n {
                if a[perm[i] * n + perm[i]] > a[perm[best] * n + perm[best]] {
                    best = i;
                }
            }
            perm.swap(k, best);
            for c in 0..k {
                l.swap(k * n + c, best * n + c);
            }
            let pk = perm[k];
            let pivot = a[pk * n + pk];
            max_pivot = max_pivot.max(pivot);
            if !(pivot > PIVOT_RATIO * max_pivot) || !pivot.is_finite() {
                let min_pivot = pivot;
                return Err(Error::SingularMetric {
                    min_pivot,
                    max_pivot,
                });
            }
            d[k] = pivot;
            for i in k + 1..n {
                let pi = perm[i];
                let lik = a[pi * n + pk] / pivot;
                l[i * n + k] = lik;
                for j in k + 1..n {
                    let pj = perm[j];
                    a[pi * n + pj] -= lik * a[pk * n + pj];
                }
            }
            l[k * n + k] = 1.0;
        }
        Ok(LdlFactor { n, perm, l, d })
    }
}

/// `P A Pᵀ = L D Lᵀ`.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    n: usize,
    perm: Vec<usize>,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl LdlFactor {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l[i * n + k] * y[k];
            }
        }
        for i in 0..n {
            y[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= self.l[k * n + i] * y[k];
            }
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }
}

/// A positive definite metric value together with its inverse.
#[derive(Debug, Clone)]
pub struct MetricValue {
    g: Sym2Value,
    inv: Sym2Value,
}

impl MetricValue {
    pub fn new(g: Sym2Value) -> Result<Self> {
        let f = g.factor()?;
        let n = g.dim();
        let mut inv = Sym2Value::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = f.solve(&e);
            for (i, &v) in col.iter().enumerate().take(j + 1) {
                inv.set(i, j, v);
            }
        }
        Ok(MetricValue { g, inv })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn metric(&self) -> &Sym2Value {
        &self.g
    }

    pub fn inverse(&self) -> &Sym2Value {
        &self.inv
    }

    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        self.g.apply(x, y)
    }

    /// Index lowering: `X ↦ g(X, ·)`.
    pub fn flat(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.g, x)
    }

    /// Index raising on raw components.
    pub fn raise(&self, w: &[f64]) -> Vec<f64> {
        mat_vec(&self.inv, w)
    }

    /// `ωᵀ g⁻¹ η` on raw components.
    pub fn dual_inner(&self, w: &[f64], e: &[f64]) -> f64 {
        self.inv.apply(w, e)
    }
}

fn mat_vec(m: &Sym2Value, x: &[f64]) -> Vec<f64> {
    let n = m.dim();
    (0..n)
        .map(|i| (0..n).map(|j| m.get(i, j) * x[j]).sum())
        .collect()
}

/// A tangent vector split into factor blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    split: CoordSplit,
    comps: Vec<f64>,
}

impl BlockVector {
    pub fn new(split: CoordSplit, v1: &[f64], v2: &[f64]) -> Result<Self> {
        check_blocks(split, v1.len(), v2.len())?;
        let mut comps = v1.to_vec();
        comps.extend_from_slice(v2);
        Ok(BlockVector { split, comps })
    }

    pub fn from_components(split: CoordSplit, comps: Vec<f64>) -> Result<Self> {
        check_len(split, comps.len())?;
        Ok(BlockVector { split, comps })
    }

    /// Coordinate basis vector `∂_coord`.
    pub fn basis(split: CoordSplit, coord: usize) -> Self {
        let mut comps = vec![0.0; split.n()];
        comps[coord] = 1.0;
        BlockVector { split, comps }
    }

    pub fn split(&self) -> CoordSplit {
        self.split
    }

    pub fn components(&self) -> &[f64] {
        &self.comps
    }

    pub fn v1(&self) -> &[f64] {
        &self.comps[..self.split.n1()]
    }

    pub fn v2(&self) -> &[f64] {
        &self.comps[self.split.n1()..]
    }
}

/// A covector split into factor blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct OneFormValue {
    split: CoordSplit,
    comps: Vec<f64>,
}

impl OneFormValue {
    pub fn new(split: CoordSplit, w1: &[f64], w2: &[f64]) -> Result<Self> {
        check_blocks(split, w1.len(), w2.len())?;
        let mut comps = w1.to_vec();
        comps.extend_from_slice(w2);
        Ok(OneFormValue { split, comps })
    }

    pub fn from_components(split: CoordSplit, comps: Vec<f64>) -> Result<Self> {
        check_len(split, comps.len())?;
        Ok(OneFormValue { split, comps })
    }

    pub fn split(&self) -> CoordSplit {
        self.split
    }

    pub fn components(&self) -> &[f64] {
        &self.comps
    }

    pub fn w1(&self) -> &[f64] {
        &self.comps[..self.split.n1()]
    }

    pub fn w2(&self) -> &[f64] {
        &self.comps[self.split.n1()..]
    }

    pub fn apply(&self, v: &BlockVector) -> f64 {
        self.comps
            .iter()
            .zip(v.components())
            .map(|(a, b)| a * b)
            .sum()
    }
}

fn check_len(split: CoordSplit, len: usize) -> Result<()> {
    if len != split.n() {
        return Err(Error::Dimension(format!(
            "{len} components for a split of total dimension {}",
            split.n()
        )));
    }
    Ok(())
}

fn check_blocks(split: CoordSplit, a: usize, b: usize) -> Result<()> {
    if a != split.n1() || b != split.n2() {
        return Err(Error::Dimension(format!(
            "blocks ({a}, {b}) for split ({}, {})",
            split.n1(),
            split.n2()
        )));
    }
    Ok(())
}

fn check_metric(split: CoordSplit, g: &MetricValue) -> Result<()> {
    if g.dim() != split.n() {
        return Err(Error::Dimension(format!(
            "metric of dimension {} for split of dimension {}",
            g.dim(),
            split.n()
        )));
    }
    Ok(())
}

/// `ω^♯`, the vector with `g(ω^♯, Z) = ω(Z)`.
pub fn sharp(w: &OneFormValue, g: &MetricValue) -> Result<BlockVector> {
    check_metric(w.split, g)?;
    BlockVector::from_components(w.split, g.raise(&w.comps))
}

/// `X^♭ = g(X, ·)`.
pub fn flat(x: &BlockVector, g: &MetricValue) -> Result<OneFormValue> {
    check_metric(x.split, g)?;
    OneFormValue::from_components(x.split, g.flat(&x.comps))
}

/// `g(ω, η) = ωᵀ g⁻¹ η`.
pub fn form_inner(w: &OneFormValue, e: &OneFormValue, g: &MetricValue) -> Result<f64> {
    check_metric(w.split, g)?;
    Ok(g.dual_inner(&w.comps, &e.comps))
}

/// Fully covariant rank-4 curvature value.
#[derive(Debug, Clone, PartialEq)]
pub struct Riemann4Value {
    n: usize,
    data: Vec<f64>,
}

impl Riemann4Value {
    pub fn zeros(n: usize) -> Self {
        Riemann4Value {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let at = self.idx(i, j, k, l);
        self.data[at] = v;
    }

    pub fn components(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Multilinear contraction `R(X, Y, Z, W)` on raw components.
    pub fn eval_raw(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    if z[k] == 0.0 {
                        continue;
                    }
                    for l in 0..n {
                        s += x[i] * y[j] * z[k] * w[l] * self.get(i, j, k, l);
                    }
                }
            }
        }
        s
    }

    /// Largest violation of the algebraic curvature identities, relative to
    /// `max(1, max |R|)`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.get(i, j, k, l);
                        worst = worst
                            .max((r + self.get(j, i, k, l)).abs())
                            .max((r + self.get(i, j, l, k)).abs())
                            .max((r - self.get(k, l, i, j)).abs())
                            .max((r + self.get(j, k, i, l) + self.get(k, i, j, l)).abs());
                    }
                }
            }
        }
        worst / self.max_abs().max(1.0)
    }
}

/// `R(X, Y, Z, W)`.
pub fn curvature_eval(
    r: &Riemann4Value,
    x: &BlockVector,
    y: &BlockVector,
    z: &BlockVector,
    w: &BlockVector,
) -> f64 {
    r.eval_raw(&x.comps, &y.comps, &z.comps, &w.comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn split(n1: usize, n2: usize) -> CoordSplit {
        CoordSplit::new(n1, n2).unwrap()
    }

    /// `A Aᵀ + n I` from arbitrary entries.
    fn spd(n: usize, a: &[f64]) -> MetricValue {
        let g = Sym2Value::from_fn(n, |i, j| {
            let dot: f64 = (0..n).map(|k| a[i * n + k] * a[j * n + k]).sum();
            dot + if i == j { 0.5 } else { 0.0 }
        });
        MetricValue::new(g).unwrap()
    }

    #[test]
    fn sharp_of_zero_and_identity() {
        let s = split(1, 2);
        let g = MetricValue::new(Sym2Value::identity(3)).unwrap();
        let zero = OneFormValue::new(s, &[0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(sharp(&zero, &g).unwrap().components(), [0.0; 3]);
        let w = OneFormValue::new(s, &[1.0], &[2.0, 3.0]).unwrap();
        assert_eq!(sharp(&w, &g).unwrap().components(), [1.0, 2.0, 3.0]);
    }

    #[test]
    fn form_inner_diagonal_and_block_orthogonal() {
        let s = split(2, 1);
        let g = MetricValue::new(Sym2Value::from_fn(3, |i, j| {
            if i == j {
                [4.0, 2.0, 3.0][i]
            } else {
                0.0
            }
        }))
        .unwrap();
        let dx1 = OneFormValue::new(s, &[1.0, 0.0], &[0.0]).unwrap();
        assert!((form_inner(&dx1, &dx1, &g).unwrap() - 0.25).abs() < 1e-15);
        let w = OneFormValue::new(s, &[1.0, -2.0], &[0.0]).unwrap();
        let e = OneFormValue::new(s, &[0.0, 0.0], &[5.0]).unwrap();
        assert_eq!(form_inner(&w, &e, &g).unwrap(), 0.0);
    }

    #[test]
    fn singular_metric_rejected() {
        let g = Sym2Value::from_row_major(2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            MetricValue::new(g),
            Err(Error::SingularMetric { .. })
        ));
        let g = Sym2Value::from_row_major(2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(MetricValue::new(g).is_err());
        let g = Sym2Value::from_row_major(2, &[1.0, 0.0, 0.0, 1e-13]);
        assert!(MetricValue::new(g).is_err());
    }

    #[test]
    fn riemann_with_repeated_argument_vanishes() {
        let mut r = Riemann4Value::zeros(2);
        // constant curvature 1 on the Euclidean plane metric
        r.set(0, 1, 1, 0, 1.0);
        r.set(1, 0, 0, 1, 1.0);
        r.set(0, 1, 0, 1, -1.0);
        r.set(1, 0, 1, 0, -1.0);
        assert!(r.symmetry_defect() < 1e-15);
        let s = split(1, 1);
        let x = BlockVector::new(s, &[0.3], &[0.7]).unwrap();
        let z = BlockVector::new(s, &[1.0], &[-2.0]).unwrap();
        assert_eq!(curvature_eval(&r, &x, &x, &z, &z), 0.0);
        let e0 = BlockVector::basis(s, 0);
        let e1 = BlockVector::basis(s, 1);
        assert_eq!(curvature_eval(&r, &e0, &e1, &e1, &e0), 1.0);
    }

    proptest! {
        #[test]
        fn sharp_then_flat_is_identity(
            a in proptest::collection::vec(-1.0f64..1.0, 16),
            w in proptest::collection::vec(-3.0f64..3.0, 4),
        ) {
            let s = split(2, 2);
            let g = spd(4, &a);
            let form = OneFormValue::from_components(s, w.clone()).unwrap();
            let v = sharp(&form, &g).unwrap();
            let back = flat(&v, &g).unwrap();
            for (x, y) in back.components().iter().zip(&w) {
                prop_assert!((x - y).abs() < 1e-12 * (1.0 + y.abs()));
            }
            // g(ω♯, Z) = ω(Z) for a basis Z
            for c in 0..4 {
                let z = BlockVector::basis(s, c);
                prop_assert!((g.inner(v.components(), z.components()) - form.apply(&z)).abs() < 1e-12);
            }
        }

        #[test]
        fn form_inner_is_symmetric_and_positive(
            a in proptest::collection::vec(-1.0f64..1.0, 9),
            w in proptest::collection::vec(-3.0f64..3.0, 3),
            e in proptest::collection::vec(-3.0f64..3.0, 3),
        ) {
            let s = split(1, 2);
            let g = spd(3, &a);
            let w = OneFormValue::from_components(s, w).unwrap();
            let e = OneFormValue::from_components(s, e).unwrap();
            let we = form_inner(&w, &e, &g).unwrap();
            let ew = form_inner(&e, &w, &g).unwrap();
            prop_assert!((we - ew).abs() < 1e-12 * (1.0 + we.abs()));
            let ww = form_inner(&w, &w, &g).unwrap();
            if w.components().iter().any(|c| c.abs() > 1e-6) {
                prop_assert!(ww > 0.0);
            }
        }
    }
}
