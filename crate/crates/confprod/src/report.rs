//! Report documents.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Summary of one residual over the sampled points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub max: f64,
    pub mean: f64,
    /// Points at which the residual was evaluated.
    pub points: usize,
    /// Points at which it was not applicable.
    #[serde(default)]
    pub not_applicable: usize,
    pub tolerance: Option<f64>,
    /// Whether the row takes part in the overall verdict.
    pub asserted: bool,
    pub pass: bool,
}

/// Running max/mean of a residual.
#[derive(Debug, Clone)]
pub struct Accumulator {
    name: String,
    max: f64,
    sum: f64,
    count: usize,
    not_applicable: usize,
}

impl Accumulator {
    pub fn new(name: impl Into<String>) -> Self {
        Accumulator {
            name: name.into(),
            max: 0.0,
            sum: 0.0,
            count: 0,
            not_applicable: 0,
        }
    }

    pub fn push(&mut self, v: f64) {
        // NaN must not be absorbed by max
        self.max = if v.is_nan() || self.max.is_nan() {
            f64::NAN
        } else {
            self.max.max(v)
        };
        self.sum += v;
        self.count += 1;
    }

    pub fn skip(&mut self) {
        self.not_applicable += 1;
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    fn row(&self, tolerance: Option<f64>, asserted: bool) -> CheckRow {
        let mean = if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        };
        CheckRow {
            name: self.name.clone(),
            max: self.max,
            mean,
            points: self.count,
            not_applicable: self.not_applicable,
            tolerance,
            asserted,
            pass: tolerance.is_none_or(|t| self.max <= t),
        }
    }

    /// Row that counts towards the verdict.
    pub fn asserted(&self, tolerance: f64) -> CheckRow {
        self.row(Some(tolerance), true)
    }

    /// Row reported for information only.
    pub fn informational(&self, tolerance: Option<f64>) -> CheckRow {
        self.row(tolerance, false)
    }
}

/// A theorem hypothesis that failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreconditionFailure {
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    /// Digest of the canonical input document (scene or search config).
    pub scene_digest: String,
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<String, f64>,
    pub checks: Vec<CheckRow>,
    pub preconditions: Vec<PreconditionFailure>,
    /// Command-specific payload.
    pub details: serde_json::Value,
    pub pass: bool,
    pub exit_code: i32,
    pub wall_time_s: f64,
}

impl Report {
    pub fn new(command: &str, scene_digest: String) -> Self {
        Report {
            command: command.into(),
            scene_digest,
            seed: None,
            tolerances: BTreeMap::new(),
            checks: Vec::new(),
            preconditions: Vec::new(),
            details: serde_json::Value::Null,
            pass: true,
            exit_code: 0,
            wall_time_s: 0.0,
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckRow> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Sets `pass` and `exit_code` from the rows and preconditions.
    pub fn finish(&mut self, started: std::time::Instant) {
        self.pass =
            self.preconditions.is_empty() && self.checks.iter().all(|c| !c.asserted || c.pass);
        self.exit_code = if self.pass { 0 } else { 2 };
        self.wall_time_s = started.elapsed().as_secs_f64();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// JSON with the wall time zeroed, for reproducibility comparisons.
    pub fn to_json_without_time(&self) -> String {
        Report {
            wall_time_s: 0.0,
            ..self.clone()
        }
        .to_json()
    }
}
