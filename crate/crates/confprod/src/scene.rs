//! Scene documents: a conformal product metric plus sampling domain.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use confprod_core::conformal::ConformalProductConfig;
use confprod_core::oracle::MetricField;
use confprod_core::{CoordSplit, ProductPoint, ScalarExpr};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult, Issue};
use crate::tolerances::Tolerances;

/// Default interval of a non-periodic coordinate; keeps sphere charts off the poles.
pub const OPEN_INTERVAL: (f64, f64) = (0.3, 2.8);
pub const PERIODIC_INTERVAL: (f64, f64) = (0.0, 2.0 * PI);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub n1: usize,
    pub n2: usize,
}

/// The on-disk JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub split: SplitSpec,
    pub g1: Vec<Vec<String>>,
    pub g2: Vec<Vec<String>>,
    pub f1: String,
    pub f2: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodic: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A validated scene.
#[derive(Debug, Clone)]
pub struct Scene {
    pub file: SceneFile,
    pub config: ConformalProductConfig,
    pub domain: Vec<(f64, f64)>,
    pub periodic: Vec<bool>,
    pub tolerances: Tolerances,
    /// `sha256:` of the canonical JSON serialization.
    pub digest: String,
}

fn strip(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Parses a JSON value of type `T`, reporting the path of the first type error.
pub fn parse_json<T: for<'de> Deserialize<'de>>(bytes: &[u8]) -> CliResult<T> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| CliError::invalid("$", format!("not UTF-8: {e}")))?;
    if text.starts_with('\u{feff}') {
        return Err(CliError::invalid("$", "byte-order mark is not allowed"));
    }
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." {
            "$".to_string()
        } else {
            format!("$.{path}")
        };
        CliError::invalid(path, e.into_inner().to_string())
    })
}

/// Hex SHA-256 digest with a `sha256:` prefix.
pub fn digest(bytes: &[u8]) -> String {
    let h = Sha256::digest(bytes);
    let hex: String = h.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

impl SceneFile {
    pub fn load(path: &Path) -> CliResult<SceneFile> {
        parse_json(&crate::io::read(path)?)
    }

    pub fn validate(self) -> CliResult<Scene> {
        Scene::new(self)
    }
}

fn parse_matrix(
    name: &str,
    rows: &[Vec<String>],
    d: usize,
    split: CoordSplit,
    issues: &mut Vec<Issue>,
) -> Option<Vec<Vec<ScalarExpr>>> {
    let issue = |issues: &mut Vec<Issue>, path: String, message: String| {
        issues.push(Issue { path, message })
    };
    let before = issues.len();
    if rows.len() != d {
        issue(
            issues,
            format!("$.{name}"),
            format!("expected {d} rows, found {}", rows.len()),
        );
        return None;
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != d {
            issue(
                issues,
                format!("$.{name}[{i}]"),
                format!("expected {d} entries, found {}", r.len()),
            );
        }
    }
    if issues.len() > before {
        return None;
    }
    for i in 0..d {
        for j in i + 1..d {
            if strip(&rows[i][j]) != strip(&rows[j][i]) {
                issue(
                    issues,
                    format!("$.{name}[{i}][{j}]"),
                    format!(
                        "`{}` differs from $.{name}[{j}][{i}] = `{}`; the matrix must be symmetric",
                        rows[i][j], rows[j][i]
                    ),
                );
            }
        }
    }
    let mut out = Vec::with_capacity(d);
    for (i, r) in rows.iter().enumerate() {
        let mut row = Vec::with_capacity(d);
        for (j, text) in r.iter().enumerate() {
            match ScalarExpr::parse(text, split) {
                Ok(e) => row.push(e),
                Err(e) => issue(issues, format!("$.{name}[{i}][{j}]"), e.to_string()),
            }
        }
        out.push(row);
    }
    (issues.len() == before).then_some(out)
}

impl Scene {
    pub fn new(file: SceneFile) -> CliResult<Scene> {
        let split = CoordSplit::new(file.split.n1, file.split.n2)
            .map_err(|e| CliError::at("$.split", e))?;
        let n = split.n();
        let mut issues = Vec::new();
        let g1 = parse_matrix("g1", &file.g1, split.n1(), split, &mut issues);
        let g2 = parse_matrix("g2", &file.g2, split.n2(), split, &mut issues);
        let mut factor = |name: &str, text: &str| match ScalarExpr::parse(text, split) {
            Ok(e) => Some(e),
            Err(e) => {
                issues.push(Issue {
                    path: format!("$.{name}"),
                    message: e.to_string(),
                });
                None
            }
        };
        let f1 = factor("f1", &file.f1);
        let f2 = factor("f2", &file.f2);

        let periodic = match &file.periodic {
            None => vec![false; n],
            Some(p) if p.len() == n => p.clone(),
            Some(p) => {
                issues.push(Issue {
                    path: "$.periodic".into(),
                    message: format!("expected {n} flags, found {}", p.len()),
                });
                vec![false; n]
            }
        };
        let domain: Vec<(f64, f64)> = match &file.domain {
            None => periodic
                .iter()
                .map(|&p| if p { PERIODIC_INTERVAL } else { OPEN_INTERVAL })
                .collect(),
            Some(d) if d.len() != n => {
                issues.push(Issue {
                    path: "$.domain".into(),
                    message: format!("expected {n} intervals, found {}", d.len()),
                });
                Vec::new()
            }
            Some(d) => {
                for (i, [lo, hi]) in d.iter().enumerate() {
                    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                        issues.push(Issue {
                            path: format!("$.domain[{i}]"),
                            message: format!("[{lo}, {hi}] is not a finite interval with lo < hi"),
                        });
                    }
                }
                d.iter().map(|&[a, b]| (a, b)).collect()
            }
        };
        if let Some(l) = file.lambda {
            if !l.is_finite() {
                issues.push(Issue {
                    path: "$.lambda".into(),
                    message: "lambda must be finite".into(),
                });
            }
        }
        let mut tolerances = Tolerances::default();
        for (k, v) in file.tolerances.iter().flatten() {
            if let Err(CliError::Validation(mut more)) =
                tolerances.set(k, *v, &format!("$.tolerances.{k}"))
            {
                issues.append(&mut more);
            }
        }
        if !issues.is_empty() {
            return Err(CliError::Validation(issues));
        }
        let (g1, g2, f1, f2) = (g1.unwrap(), g2.unwrap(), f1.unwrap(), f2.unwrap());
        let g1 = MetricField::from_rows(split, split.first().collect(), g1)
            .map_err(|e| CliError::at("$.g1", e))?;
        let g2 = MetricField::from_rows(split, split.second().collect(), g2)
            .map_err(|e| CliError::at("$.g2", e))?;
        let config =
            ConformalProductConfig::new(g1, g2, f1, f2).map_err(|e| CliError::at("$", e))?;
        let canonical = serde_json::to_vec(&file).expect("scene serializes");
        Ok(Scene {
            digest: digest(&canonical),
            file,
            config,
            domain,
            periodic,
            tolerances,
        })
    }

    pub fn load(path: &Path) -> CliResult<Scene> {
        Scene::new(SceneFile::load(path)?)
    }

    pub fn from_json(bytes: &[u8]) -> CliResult<Scene> {
        Scene::new(parse_json(bytes)?)
    }

    pub fn split(&self) -> CoordSplit {
        self.config.split()
    }

    pub fn lambda(&self) -> Option<f64> {
        self.file.lambda
    }

    pub fn seed(&self) -> Option<u64> {
        self.file.seed
    }

    /// `count` seeded quasi-random points in the domain.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<ProductPoint> {
        crate::sampling::halton_box(&self.domain, count, seed)
            .into_iter()
            .map(|c| ProductPoint::from_coords(self.split(), c).expect("sample has n coordinates"))
            .collect()
    }

    /// Midpoint of the domain.
    pub fn center(&self) -> ProductPoint {
        let c = self.domain.iter().map(|(a, b)| 0.5 * (a + b)).collect();
        ProductPoint::from_coords(self.split(), c).expect("domain has n intervals")
    }
}
