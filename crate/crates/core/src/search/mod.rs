//! Einstein-residual minimization over Fourier conformal factors on
//! `T^{n₁} × T^{n₂}` with flat factor metrics.

mod fourier;

use alloc::vec;
use alloc::vec::Vec;

use fourier::BasisJets;
pub use fourier::FourierParam;

use crate::conformal::{ricci_from_jets, FactorGeometry, Jet2};
use crate::error::{Error, Result};
use crate::expr::CoordSplit;
use crate::math;
use crate::real::{Dual, Real};

/// Smallest admissible ratio `e^{2fᵢ}` between the two blocks.
const METRIC_RATIO_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaMode {
    Fixed(f64),
    /// Grid mean of `scal / n`.
    TraceAveraged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradientMode {
    /// Forward differences with the given step.
    FiniteDifference(f64),
    /// Forward-mode duals pushed through the closed-form Ricci tensor.
    Jet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Backtracking {
    pub initial_step: f64,
    /// Step multiplier after a rejected trial, in `(0, 1)`.
    pub shrink: f64,
    /// Armijo sufficient-decrease constant, in `(0, 1)`.
    pub armijo: f64,
    /// Step multiplier carried to the next iteration after acceptance, `≥ 1`.
    pub grow: f64,
    pub min_step: f64,
}

impl Default for Backtracking {
    fn default() -> Self {
        Backtracking {
            initial_step: 1.0,
            shrink: 0.5,
            armijo: 1e-4,
            grow: 2.0,
            min_step: 1e-14,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub split: CoordSplit,
    pub max_frequency: usize,
    /// Quadrature points per axis.
    pub grid: usize,
    pub lambda_mode: LambdaMode,
    pub max_iters: usize,
    /// Stop once the objective drops below this.
    pub tolerance: f64,
    /// Stop once the gradient norm drops below this.
    pub grad_tolerance: f64,
    pub line_search: Backtracking,
    pub gradient: GradientMode,
}

impl SearchConfig {
    pub fn new(split: CoordSplit, max_frequency: usize) -> Self {
        SearchConfig {
            split,
            max_frequency,
            grid: 2 * max_frequency + 4,
            lambda_mode: LambdaMode::TraceAveraged,
            max_iters: 500,
            tolerance: 1e-12,
            grad_tolerance: 1e-14,
            line_search: Backtracking::default(),
            gradient: GradientMode::Jet,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Invalid(m.into()));
        if self.max_frequency == 0 || self.max_frequency > 8 {
            return bad("max_frequency must be in 1..=8");
        }
        if self.grid < 2 * self.max_frequency + 1 {
            return bad("grid must have at least 2·max_frequency + 1 points per axis");
        }
        if self
            .grid
            .checked_pow(self.split.n() as u32)
            .is_none_or(|g| g > 1 << 20)
        {
            return bad("quadrature grid is too large");
        }
        if let LambdaMode::Fixed(l) = self.lambda_mode {
            if !l.is_finite() {
                return bad("lambda must be finite");
            }
        }
        if !(self.tolerance >= 0.0 && self.grad_tolerance >= 0.0) {
            return bad("tolerances must be non-negative");
        }
        let ls = &self.line_search;
        if !(ls.initial_step > 0.0 && ls.initial_step.is_finite()) {
            return bad("initial step must be positive");
        }
        if !(ls.shrink > 0.0 && ls.shrink < 1.0) {
            return bad("shrink factor must lie in (0, 1)");
        }
        if !(ls.armijo > 0.0 && ls.armijo < 1.0) {
            return bad("Armijo constant must lie in (0, 1)");
        }
        if !(ls.grow >= 1.0 && ls.grow.is_finite()) {
            return bad("growth factor must be at least 1");
        }
        if !(ls.min_step > 0.0) {
            return bad("minimum step must be positive");
        }
        if let GradientMode::FiniteDifference(h) = self.gradient {
            if !(h > 0.0 && h.is_finite()) {
                return bad("finite-difference step must be positive");
            }
        }
        Ok(())
    }
}

/// Quadrature grid with precomputed basis jets; the objective is a pure
/// function of the coefficient vector.
#[derive(Debug, Clone)]
pub struct Objective {
    template: FourierParam,
    lambda_mode: LambdaMode,
    nodes: Vec<Vec<f64>>,
    basis1: Vec<BasisJets>,
    basis2: Vec<BasisJets>,
    fac1: FactorGeometry,
    fac2: FactorGeometry,
}

/// Objective value with the Einstein constant it was measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    pub value: f64,
    pub lambda: f64,
}

/// Uniform grid `2πm/N` per axis.
fn torus_nodes(n: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let h = 2.0 * core::f64::consts::PI / per_axis as f64;
    (0..per_axis.pow(n as u32))
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let m = code % per_axis;
                    code /= per_axis;
                    m as f64 * h
                })
                .collect()
        })
        .collect()
}

fn jet_of(basis: &BasisJets, c: &[f64]) -> Jet2<f64> {
    let n = basis.n;
    let v = basis.combine(c);
    Jet2 {
        value: v[0],
        grad: v[1..1 + n].to_vec(),
        hess: v[1 + n..].to_vec(),
    }
}

fn dual_jet(primal: &Jet2<f64>, tangent: Option<&[f64]>) -> Jet2<Dual> {
    let n = primal.grad.len();
    let t = |i: usize| tangent.map_or(0.0, |t| t[i]);
    Jet2 {
        value: Dual::new(primal.value, t(0)),
        grad: (0..n)
            .map(|i| Dual::new(primal.grad[i], t(1 + i)))
            .collect(),
        hess: (0..n * n)
            .map(|i| Dual::new(primal.hess[i], t(1 + n + i)))
            .collect(),
    }
}

impl Objective {
    pub fn new(cfg: &SearchConfig) -> Result<Self> {
        cfg.validate()?;
        let split = cfg.split;
        let template = FourierParam::zeros(split, cfg.max_frequency)?;
        let nodes = torus_nodes(split.n(), cfg.grid);
        let n = split.n();
        let basis1 = nodes
            .iter()
            .map(|z| BasisJets::at(template.f1_modes(), n, z))
            .collect();
        let basis2 = nodes
            .iter()
            .map(|z| BasisJets::at(template.f2_modes(), n, z))
            .collect();
        Ok(Objective {
            lambda_mode: cfg.lambda_mode,
            basis1,
            basis2,
            nodes,
            fac1: FactorGeometry::flat(0, split.n1()),
            fac2: FactorGeometry::flat(split.n1(), split.n2()),
            template,
        })
    }

    pub fn split(&self) -> CoordSplit {
        self.template.split()
    }

    /// Zero coefficients with the layout this objective expects.
    pub fn template(&self) -> &FourierParam {
        &self.template
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    fn check_len(&self, c: &[f64]) -> Result<()> {
        if c.len() != self.template.len() {
            return Err(Error::Dimension(
                "coefficient vector has the wrong length".into(),
            ));
        }
        Ok(())
    }

    fn check_metric(&self, j1: &Jet2<f64>, j2: &Jet2<f64>) -> Result<()> {
        let (a, b) = (math::exp(2.0 * j1.value), math::exp(2.0 * j2.value));
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::NonFinite("conformal factor overflowed".into()));
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if !(lo > 0.0) || lo < METRIC_RATIO_FLOOR * hi {
            return Err(Error::SingularMetric {
                min_pivot: lo,
                max_pivot: hi,
            });
        }
        Ok(())
    }

    fn primal_jets(&self, c: &[f64]) -> Result<Vec<(Jet2<f64>, Jet2<f64>)>> {
        self.check_len(c)?;
        let (c1, c2) = c.split_at(self.template.f1_coeffs().len());
        let mut out = Vec::with_capacity(self.nodes.len());
        for (b1, b2) in self.basis1.iter().zip(&self.basis2) {
            let (j1, j2) = (jet_of(b1, c1), jet_of(b2, c2));
            self.check_metric(&j1, &j2)?;
            out.push((j1, j2));
        }
        Ok(out)
    }

    /// Mean of `‖Ric − λg‖²_F / ‖g‖²_F` over the grid, generic in the scalar.
    fn reduce<T: Real>(&self, jets: &[(Jet2<T>, Jet2<T>)]) -> (T, T) {
        let s = self.split();
        let (n, n1) = (s.n(), s.n1());
        let zero = T::from_f64(0.0);
        let rics: Vec<Vec<T>> = jets
            .iter()
            .map(|(j1, j2)| ricci_from_jets(s, &self.fac1, &self.fac2, j1, j2))
            .collect();
        let inv_count = 1.0 / jets.len() as f64;
        let lambda = match self.lambda_mode {
            LambdaMode::Fixed(l) => T::from_f64(l),
            LambdaMode::TraceAveraged => {
                let mut acc = zero;
                for ((j1, j2), r) in jets.iter().zip(&rics) {
                    let (i1, i2) = (j1.value.scale(-2.0).exp(), j2.value.scale(-2.0).exp());
                    for a in 0..n {
                        acc = acc + r[a * n + a] * if a < n1 { i1 } else { i2 };
                    }
                }
                acc.scale(inv_count / n as f64)
            }
        };
        let mut total = zero;
        for ((j1, j2), r) in jets.iter().zip(&rics) {
            let (g1, g2) = (j1.value.scale(2.0).exp(), j2.value.scale(2.0).exp());
            let mut num = zero;
            for a in 0..n {
                for b in 0..n {
                    let mut d = r[a * n + b];
                    if a == b {
                        d = d - lambda * if a < n1 { g1 } else { g2 };
                    }
                    num = num + d * d;
                }
            }
            let den = (g1 * g1).scale(n1 as f64) + (g2 * g2).scale((n - n1) as f64);
            total = total + num / den;
        }
        (total.scale(inv_count), lambda)
    }

    pub fn evaluate(&self, c: &[f64]) -> Result<ObjectiveValue> {
        let jets = self.primal_jets(c)?;
        let (v, l) = self.reduce(&jets);
        if !v.is_finite() {
            return Err(Error::NonFinite("objective".into()));
        }
        Ok(ObjectiveValue {
            value: v,
            lambda: l,
        })
    }

    pub fn value(&self, c: &[f64]) -> Result<f64> {
        Ok(self.evaluate(c)?.value)
    }

    /// Exact gradient, one dual pass per coefficient.
    pub fn gradient_jet(&self, c: &[f64]) -> Result<Vec<f64>> {
        let jets = self.primal_jets(c)?;
        let n1c = self.template.f1_coeffs().len();
        let mut grad = vec![0.0; c.len()];
        for (p, gp) in grad.iter_mut().enumerate() {
            let duals: Vec<(Jet2<Dual>, Jet2<Dual>)> = jets
                .iter()
                .enumerate()
                .map(|(q, (j1, j2))| {
                    if p < n1c {
                        (
                            dual_jet(j1, Some(self.basis1[q].coeff(p))),
                            dual_jet(j2, None),
                        )
                    } else {
                        (
                            dual_jet(j1, None),
                            dual_jet(j2, Some(self.basis2[q].coeff(p - n1c))),
                        )
                    }
                })
                .collect();
            *gp = self.reduce(&duals).0.eps;
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient".into()));
        }
        Ok(grad)
    }

    /// Forward-difference gradient with step `h`.
    pub fn gradient_fd(&self, c: &[f64], h: f64) -> Result<Vec<f64>> {
        let f0 = self.value(c)?;
        let mut x = c.to_vec();
        let mut grad = vec![0.0; c.len()];
        for p in 0..c.len() {
            x[p] = c[p] + h;
            grad[p] = (self.value(&x)? - f0) / h;
            x[p] = c[p];
        }
        Ok(grad)
    }

    pub fn gradient(&self, c: &[f64], mode: GradientMode) -> Result<Vec<f64>> {
        match mode {
            GradientMode::Jet => self.gradient_jet(c),
            GradientMode::FiniteDifference(h) => self.gradient_fd(c, h),
        }
    }

    /// Split diagnostic of `f₂` on this objective's grid.
    pub fn split_diagnostic(&self, param: &FourierParam) -> SplitDiagnostic {
        split_diagnostic_on(param, &self.nodes)
    }
}

/// How far `f₂` is from `a₁(x) + a₂(y)`, measured by `‖∂x∂y f₂‖_F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitDiagnostic {
    /// Maximum over the grid.
    pub max: f64,
    /// Root mean square over the grid.
    pub grid_rms: f64,
    /// Root mean square from the coefficients alone:
    /// `(Σ_k |k_x|²|k_y|² (a_k² + b_k²) / 2)^{1/2}`, equal to the grid
    /// value whenever the grid has more than `2K` points per axis.
    pub coefficient_rms: f64,
}

pub fn split_diagnostic_on(param: &FourierParam, nodes: &[Vec<f64>]) -> SplitDiagnostic {
    let s = param.split();
    let (n, n1) = (s.n(), s.n1());
    let c = param.f2_coeffs();
    let (mut max, mut sq) = (0.0f64, 0.0);
    for z in nodes {
        let b = BasisJets::at(param.f2_modes(), n, z);
        let v = b.combine(c);
        let mut fro = 0.0;
        for a in 0..n1 {
            for j in n1..n {
                let h = v[1 + n + a * n + j];
                fro += h * h;
            }
        }
        sq += fro;
        max = max.max(math::sqrt(fro));
    }
    let mut coeff = 0.0;
    for (m, k) in param.f2_modes().iter().enumerate() {
        let kx: f64 = k[..n1].iter().map(|&v| (v * v) as f64).sum();
        let ky: f64 = k[n1..].iter().map(|&v| (v * v) as f64).sum();
        let (a, b) = (c[1 + 2 * m], c[2 + 2 * m]);
        coeff += kx * ky * (a * a + b * b) / 2.0;
    }
    SplitDiagnostic {
        max,
        grid_rms: if nodes.is_empty() {
            0.0
        } else {
            math::sqrt(sq / nodes.len() as f64)
        },
        coefficient_rms: math::sqrt(coeff),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub objective: f64,
    pub lambda: f64,
    pub grad_norm: f64,
    /// Step accepted to reach this iterate (zero for the start).
    pub step: f64,
    pub split_diag: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ObjectiveBelowTolerance,
    GradientBelowTolerance,
    MaxIterations,
    /// No step above the minimum achieved sufficient decrease.
    LineSearchStalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub param: FourierParam,
    pub objective: f64,
    pub lambda: f64,
    pub trace: Vec<TraceRecord>,
    pub termination: Termination,
}

impl SearchResult {
    /// Accepted steps taken.
    pub fn iterations(&self) -> usize {
        self.trace.last().map_or(0, |r| r.iter)
    }

    pub fn converged(&self) -> bool {
        matches!(
            self.termination,
            Termination::ObjectiveBelowTolerance | Termination::GradientBelowTolerance
        )
    }

    /// Objective never increased along the trace.
    pub fn is_monotone(&self) -> bool {
        self.trace
            .windows(2)
            .all(|w| w[1].objective <= w[0].objective)
    }
}

fn norm(v: &[f64]) -> f64 {
    math::sqrt(v.iter().map(|x| x * x).sum())
}

/// Gradient descent with Armijo backtracking from `start`.
///
/// `observe` sees every trace record as it is produced.
pub fn minimize_with(
    cfg: &SearchConfig,
    start: &FourierParam,
    mut observe: impl FnMut(&TraceRecord),
) -> Result<SearchResult> {
    let obj = Objective::new(cfg)?;
    if start.split() != cfg.split || start.max_frequency() != cfg.max_frequency {
        return Err(Error::Invalid(
            "start point does not match the search basis".into(),
        ));
    }
    let ls = cfg.line_search;
    let mut x = start.to_vec();
    let mut cur = obj.evaluate(&x)?;
    let mut step = ls.initial_step;
    let mut accepted = 0.0;
    let mut trace = Vec::new();
    let mut param = start.clone();
    for iter in 0.. {
        let grad = obj.gradient(&x, cfg.gradient)?;
        let gn = norm(&grad);
        let rec = TraceRecord {
            iter,
            objective: cur.value,
            lambda: cur.lambda,
            grad_norm: gn,
            step: accepted,
            split_diag: obj.split_diagnostic(&param).max,
        };
        observe(&rec);
        trace.push(rec);
        let done = if cur.value < cfg.tolerance {
            Some(Termination::ObjectiveBelowTolerance)
        } else if gn < cfg.grad_tolerance {
            Some(Termination::GradientBelowTolerance)
        } else if iter >= cfg.max_iters {
            Some(Termination::MaxIterations)
        } else {
            None
        };
        if let Some(termination) = done {
            return Ok(SearchResult {
                param,
                objective: cur.value,
                lambda: cur.lambda,
                trace,
                termination,
            });
        }
        let mut t = step;
        let next = loop {
            let trial: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a - t * g).collect();
            // non-finite or degenerate trials count as rejected
            if let Ok(v) = obj.evaluate(&trial) {
                if v.value <= cur.value - ls.armijo * t * gn * gn {
                    break Some((trial, v));
                }
            }
            t *= ls.shrink;
            if t < ls.min_step {
                break None;
            }
        };
        match next {
            Some((trial, v)) => {
                x = trial;
                cur = v;
                param.set_vec(&x)?;
                accepted = t;
                step = t * ls.grow;
            }
            None => {
                return Ok(SearchResult {
                    param,
                    objective: cur.value,
                    lambda: cur.lambda,
                    trace,
                    termination: Termination::LineSearchStalled,
                })
            }
        }
    }
    unreachable!("the iteration loop only exits by returning")
}

pub fn minimize(cfg: &SearchConfig, start: &FourierParam) -> Result<SearchResult> {
    minimize_with(cfg, start, |_| {})
}
