//! Named numerical thresholds, overridable from scenes and the command line.

use std::collections::BTreeMap;

use crate::error::{CliError, CliResult};

/// Every threshold the commands compare against.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    values: BTreeMap<&'static str, f64>,
}

/// `(name, default, meaning)`.
pub const DEFAULTS: &[(&str, f64, &str)] = &[
    ("ricci_rel", 1e-8, "closed-form vs oracle Ricci, relative"),
    (
        "ricci_abs",
        1e-10,
        "closed-form vs oracle Ricci, absolute floor",
    ),
    (
        "riemann_rel",
        1e-8,
        "closed-form vs oracle Riemann, relative",
    ),
    (
        "riemann_abs",
        1e-10,
        "closed-form vs oracle Riemann, absolute floor",
    ),
    (
        "lc",
        1e-9,
        "product Levi-Civita blocks vs oracle Christoffels",
    ),
    (
        "connection",
        1e-10,
        "normal-component and mixed Weyl connection identities",
    ),
    (
        "weyl",
        1e-10,
        "Weyl compatibility of the adapted connection",
    ),
    ("lee_gauge", 1e-10, "Lee-form gauge rule"),
    (
        "einstein",
        1e-9,
        "Einstein residual against the scene lambda",
    ),
    (
        "mixed",
        1e-10,
        "vanishing of mixed derivatives before splitting",
    ),
    (
        "conformality",
        1e-10,
        "metric vs its split conformal product",
    ),
    ("kderiv", 1e-8, "transverse derivative family identities"),
    ("homogeneity", 1e-8, "rational-degree homogeneity"),
    (
        "max_order",
        4.0,
        "transverse derivative order of the ODE analysis (4 or 5)",
    ),
];

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            values: DEFAULTS.iter().map(|&(k, v, _)| (k, v)).collect(),
        }
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        self.values[name]
    }

    pub fn set(&mut self, name: &str, value: f64, path: &str) -> CliResult<()> {
        let Some((key, _, _)) = DEFAULTS.iter().find(|(k, _, _)| *k == name) else {
            let known: Vec<&str> = DEFAULTS.iter().map(|d| d.0).collect();
            return Err(CliError::invalid(
                path,
                format!("unknown tolerance `{name}` (known: {})", known.join(", ")),
            ));
        };
        if !(value.is_finite() && value > 0.0) {
            return Err(CliError::invalid(
                path,
                format!("tolerance `{name}` must be positive and finite"),
            ));
        }
        if name == "max_order" && !(value == 4.0 || value == 5.0) {
            return Err(CliError::invalid(path, "max_order must be 4 or 5"));
        }
        self.values.insert(key, value);
        Ok(())
    }

    pub fn apply(&mut self, overrides: &[(String, f64)], path: &str) -> CliResult<()> {
        for (k, v) in overrides {
            self.set(k, *v, &format!("{path}.{k}"))?;
        }
        Ok(())
    }

    /// `|a − b| ≤ max(rel·|b|, abs)` expressed as a scaled error
    /// `|a − b| / max(|b|, abs/rel)`, to be compared against `rel`.
    pub fn relative_error(a: f64, b: f64, rel: f64, abs: f64) -> f64 {
        (a - b).abs() / b.abs().max(abs / rel)
    }

    pub fn as_map(&self) -> BTreeMap<String, f64> {
        self.values
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect()
    }
}

/// Parses `name=value`.
pub fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}
