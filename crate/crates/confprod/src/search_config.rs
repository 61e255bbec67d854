//! Search configuration documents.

use confprod_core::search::{Backtracking, FourierParam, GradientMode, LambdaMode, SearchConfig};
use confprod_core::CoordSplit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::scene::{digest, parse_json, SplitSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Fixed(f64),
    /// Only `"trace"` is accepted.
    Named(String),
}

impl Default for LambdaSpec {
    fn default() -> Self {
        LambdaSpec::Named("trace".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GradientSpec {
    #[default]
    Jet,
    ForwardDifference(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepSpec {
    pub initial: f64,
    pub shrink: f64,
    pub armijo: f64,
    pub grow: f64,
    pub min_step: f64,
}

impl Default for StepSpec {
    fn default() -> Self {
        let b = Backtracking::default();
        StepSpec {
            initial: b.initial_step,
            shrink: b.shrink,
            armijo: b.armijo,
            grow: b.grow,
            min_step: b.min_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    #[default]
    Zero,
    /// `eps` on one seeded cross-frequency mode of `f₂`.
    CrossMode { eps: f64, seed: u64 },
    /// Explicit coefficient vectors in the basis layout.
    Coefficients { f1: Vec<f64>, f2: Vec<f64> },
}

fn default_frequency() -> usize {
    1
}

fn default_iters() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchFile {
    pub split: SplitSpec,
    #[serde(default = "default_frequency")]
    pub max_frequency: usize,
    /// Quadrature points per axis; defaults to `2·max_frequency + 4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default)]
    pub lambda: LambdaSpec,
    #[serde(default = "default_iters")]
    pub max_iters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_tolerance: Option<f64>,
    #[serde(default)]
    pub step: StepSpec,
    #[serde(default)]
    pub gradient: GradientSpec,
    #[serde(default)]
    pub init: InitSpec,
}

/// A validated search: configuration, starting point and input digest.
#[derive(Debug, Clone)]
pub struct SearchSetup {
    pub config: SearchConfig,
    pub start: FourierParam,
    /// The perturbed `(mode, sine)` for cross-mode starts.
    pub perturbed_mode: Option<(usize, bool)>,
    pub digest: String,
}

/// Adds `eps` to a cross-frequency mode of `f₂` picked by `seed`.
pub fn seeded_cross_mode(
    param: &mut FourierParam,
    eps: f64,
    seed: u64,
) -> CliResult<(usize, bool)> {
    let cross = param.cross_modes();
    if cross.is_empty() {
        return Err(CliError::invalid(
            "$.init",
            "the basis has no cross-frequency modes",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mode = cross[rng.random_range(0..cross.len())];
    let sine = rng.random_bool(0.5);
    param.perturb_f2(mode, sine, eps)?;
    Ok((mode, sine))
}

impl SearchFile {
    pub fn from_json(bytes: &[u8]) -> CliResult<SearchFile> {
        parse_json(bytes)
    }

    /// `overrides` may set `objective` and `gradient` tolerances.
    pub fn setup(&self, overrides: &[(String, f64)]) -> CliResult<SearchSetup> {
        let split = CoordSplit::new(self.split.n1, self.split.n2)
            .map_err(|e| CliError::at("$.split", e))?;
        let mut cfg = SearchConfig::new(split, self.max_frequency);
        if let Some(g) = self.grid {
            cfg.grid = g;
        }
        cfg.lambda_mode = match &self.lambda {
            LambdaSpec::Fixed(l) => LambdaMode::Fixed(*l),
            LambdaSpec::Named(s) if s == "trace" => LambdaMode::TraceAveraged,
            LambdaSpec::Named(s) => {
                return Err(CliError::invalid(
                    "$.lambda",
                    format!("expected a number or \"trace\", got \"{s}\""),
                ))
            }
        };
        cfg.max_iters = self.max_iters;
        if let Some(t) = self.tolerance {
            cfg.tolerance = t;
        }
        if let Some(t) = self.grad_tolerance {
            cfg.grad_tolerance = t;
        }
        for (k, v) in overrides {
            match k.as_str() {
                "objective" => cfg.tolerance = *v,
                "gradient" => cfg.grad_tolerance = *v,
                _ => {
                    return Err(CliError::invalid(
                        format!("--tol {k}"),
                        "search accepts only the `objective` and `gradient` tolerances",
                    ))
                }
            }
        }
        let s = self.step;
        cfg.line_search = Backtracking {
            initial_step: s.initial,
            shrink: s.shrink,
            armijo: s.armijo,
            grow: s.grow,
            min_step: s.min_step,
        };
        cfg.gradient = match self.gradient {
            GradientSpec::Jet => GradientMode::Jet,
            GradientSpec::ForwardDifference(h) => GradientMode::FiniteDifference(h),
        };
        if cfg.grid < 2 * cfg.max_frequency + 1 {
            return Err(CliError::invalid(
                "$.grid",
                format!(
                    "{} points per axis alias frequency {}; at least {} are required",
                    cfg.grid,
                    cfg.max_frequency,
                    2 * cfg.max_frequency + 1
                ),
            ));
        }
        cfg.validate().map_err(|e| CliError::at("$", e))?;

        let mut start = FourierParam::zeros(split, self.max_frequency)
            .map_err(|e| CliError::at("$.max_frequency", e))?;
        let mut perturbed_mode = None;
        match &self.init {
            InitSpec::Zero => {}
            InitSpec::CrossMode { eps, seed } => {
                if !eps.is_finite() {
                    return Err(CliError::invalid("$.init.cross_mode.eps", "must be finite"));
                }
                perturbed_mode = Some(seeded_cross_mode(&mut start, *eps, *seed)?);
            }
            InitSpec::Coefficients { f1, f2 } => {
                let (l1, l2) = (start.f1_coeffs().len(), start.f2_coeffs().len());
                if f1.len() != l1 {
                    return Err(CliError::invalid(
                        "$.init.coefficients.f1",
                        format!("expected {l1} coefficients"),
                    ));
                }
                if f2.len() != l2 {
                    return Err(CliError::invalid(
                        "$.init.coefficients.f2",
                        format!("expected {l2} coefficients"),
                    ));
                }
                let mut v = f1.clone();
                v.extend_from_slice(f2);
                start.set_vec(&v)?;
            }
        }
        Ok(SearchSetup {
            config: cfg,
            start,
            perturbed_mode,
            digest: digest(&serde_json::to_vec(self).expect("search file serializes")),
        })
    }
}
