//! Real Fourier series on the flat torus `[0, 2π)^n`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::{CoordSplit, Func, ScalarExpr};
use crate::math;

/// Frequency vectors `k ≠ 0` with `|k|_∞ ≤ K` and first nonzero entry
/// positive, over the selected coordinates (others fixed to zero).
fn half_set(split: CoordSplit, coords: &[usize], k_max: i32) -> Vec<Vec<i32>> {
    let d = coords.len();
    let side = (2 * k_max + 1) as usize;
    let mut out = Vec::new();
    for code in 0..side.pow(d as u32) {
        let mut k = vec![0i32; split.n()];
        let mut c = code;
        for &coord in coords {
            k[coord] = (c % side) as i32 - k_max;
            c /= side;
        }
        let first = k.iter().copied().find(|&v| v != 0);
        if matches!(first, Some(v) if v > 0) {
            out.push(k);
        }
    }
    out.sort();
    out
}

/// Coefficient layout: `[c₀, a₁, b₁, a₂, b₂, …]` for
/// `c₀ + Σ a_m cos(k_m·z) + b_m sin(k_m·z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierParam {
    split: CoordSplit,
    max_frequency: i32,
    f1_modes: Vec<Vec<i32>>,
    f2_modes: Vec<Vec<i32>>,
    f1: Vec<f64>,
    f2: Vec<f64>,
}

impl FourierParam {
    /// `f₁` uses only `y`-frequencies, `f₂` uses all of them.
    pub fn zeros(split: CoordSplit, max_frequency: usize) -> Result<Self> {
        if max_frequency == 0 || max_frequency > 8 {
            return Err(Error::Invalid("max frequency must be in 1..=8".into()));
        }
        let k = max_frequency as i32;
        let second: Vec<usize> = split.second().collect();
        let all: Vec<usize> = (0..split.n()).collect();
        let f1_modes = half_set(split, &second, k);
        let f2_modes = half_set(split, &all, k);
        Ok(FourierParam {
            split,
            max_frequency: k,
            f1: vec![0.0; 1 + 2 * f1_modes.len()],
            f2: vec![0.0; 1 + 2 * f2_modes.len()],
            f1_modes,
            f2_modes,
        })
    }

    pub fn split(&self) -> CoordSplit {
        self.split
    }

    pub fn max_frequency(&self) -> usize {
        self.max_frequency as usize
    }

    pub fn f1_modes(&self) -> &[Vec<i32>] {
        &self.f1_modes
    }

    pub fn f2_modes(&self) -> &[Vec<i32>] {
        &self.f2_modes
    }

    pub fn f1_coeffs(&self) -> &[f64] {
        &self.f1
    }

    pub fn f2_coeffs(&self) -> &[f64] {
        &self.f2
    }

    /// Total number of coefficients.
    pub fn len(&self) -> usize {
        self.f1.len() + self.f2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `f₁` coefficients followed by `f₂` coefficients.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.f1.clone();
        v.extend_from_slice(&self.f2);
        v
    }

    pub fn set_vec(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.len() {
            return Err(Error::Dimension(
                "coefficient vector has the wrong length".into(),
            ));
        }
        let (a, b) = v.split_at(self.f1.len());
        self.f1.copy_from_slice(a);
        self.f2.copy_from_slice(b);
        Ok(())
    }

    pub fn with_vec(&self, v: &[f64]) -> Result<Self> {
        let mut p = self.clone();
        p.set_vec(v)?;
        Ok(p)
    }

    /// Indices into [`f2_modes`](Self::f2_modes) whose frequency couples the factors.
    pub fn cross_modes(&self) -> Vec<usize> {
        let n1 = self.split.n1();
        (0..self.f2_modes.len())
            .filter(|&m| {
                let k = &self.f2_modes[m];
                k[..n1].iter().any(|&v| v != 0) && k[n1..].iter().any(|&v| v != 0)
            })
            .collect()
    }

    /// Adds `eps·cos(k·z)` (or `sin`) to `f₂` for mode `m`.
    pub fn perturb_f2(&mut self, mode: usize, sine: bool, eps: f64) -> Result<()> {
        if mode >= self.f2_modes.len() {
            return Err(Error::Invalid("mode index out of range".into()));
        }
        self.f2[1 + 2 * mode + sine as usize] += eps;
        Ok(())
    }

    /// Mutable `f₂` coefficient of `cos` (or `sin`) for mode `m`.
    pub fn f2_coeff_mut(&mut self, mode: usize, sine: bool) -> &mut f64 {
        &mut self.f2[1 + 2 * mode + sine as usize]
    }

    pub fn f1_coeff_mut(&mut self, mode: usize, sine: bool) -> &mut f64 {
        &mut self.f1[1 + 2 * mode + sine as usize]
    }

    fn series_expr(&self, modes: &[Vec<i32>], c: &[f64]) -> ScalarExpr {
        let s = self.split;
        let mut e = ScalarExpr::constant(s, c[0]);
        for (m, k) in modes.iter().enumerate() {
            let (a, b) = (c[1 + 2 * m], c[2 + 2 * m]);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let mut phase = ScalarExpr::constant(s, 0.0);
            for (coord, &kc) in k.iter().enumerate() {
                if kc != 0 {
                    let z = ScalarExpr::coordinate(s, coord).expect("coordinate in range");
                    phase = phase + z.scaled(kc as f64);
                }
            }
            if a != 0.0 {
                e = e + phase.call(Func::Cos).scaled(a);
            }
            if b != 0.0 {
                e = e + phase.call(Func::Sin).scaled(b);
            }
        }
        e
    }

    /// The two series as closed-form expressions.
    pub fn to_exprs(&self) -> (ScalarExpr, ScalarExpr) {
        (
            self.series_expr(&self.f1_modes, &self.f1),
            self.series_expr(&self.f2_modes, &self.f2),
        )
    }
}

/// Value, gradient and Hessian of every basis function at one point.
#[derive(Debug, Clone)]
pub(crate) struct BasisJets {
    pub n: usize,
    /// Per coefficient: `(value, grad, hess)` flattened as `1 + n + n²` numbers.
    pub data: Vec<f64>,
}

impl BasisJets {
    pub fn stride(n: usize) -> usize {
        1 + n + n * n
    }

    pub fn at(modes: &[Vec<i32>], n: usize, z: &[f64]) -> Self {
        let st = Self::stride(n);
        let mut data = vec![0.0; st * (1 + 2 * modes.len())];
        data[0] = 1.0;
        for (m, k) in modes.iter().enumerate() {
            let phase: f64 = k.iter().zip(z).map(|(&a, &b)| a as f64 * b).sum();
            let (c, s) = (math::cos(phase), math::sin(phase));
            let (cos_at, sin_at) = ((1 + 2 * m) * st, (2 + 2 * m) * st);
            data[cos_at] = c;
            data[sin_at] = s;
            for i in 0..n {
                let ki = k[i] as f64;
                data[cos_at + 1 + i] = -ki * s;
                data[sin_at + 1 + i] = ki * c;
                for j in 0..n {
                    let kk = ki * k[j] as f64;
                    data[cos_at + 1 + n + i * n + j] = -kk * c;
                    data[sin_at + 1 + n + i * n + j] = -kk * s;
                }
            }
        }
        BasisJets { n, data }
    }

    pub fn coeff(&self, p: usize) -> &[f64] {
        let st = Self::stride(self.n);
        &self.data[p * st..(p + 1) * st]
    }

    /// `Σ c_p φ_p` as a flat `(value, grad, hess)` block.
    pub fn combine(&self, c: &[f64]) -> Vec<f64> {
        let st = Self::stride(self.n);
        let mut out = vec![0.0; st];
        for (p, &cp) in c.iter().enumerate() {
            if cp != 0.0 {
                for (o, v) in out.iter_mut().zip(self.coeff(p)) {
                    *o += cp * v;
                }
            }
        }
        out
    }
}
