//! Residual summaries shared by every verification routine.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

fn default_true() -> bool {
    true
}

/// Named residual summary. `pass` always equals `max_residual <= tol`.
///
/// `expected_pass` is `false` for negative controls and for cases whose
/// failure is the documented outcome; the CLI exit code compares the two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tol: f64,
    pub pass: bool,
    #[serde(default = "default_true")]
    pub expected_pass: bool,
    #[serde(default)]
    pub metadata: BTreeMap<String, Value>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, max_residual: f64, mean_residual: f64, tol: f64) -> Self {
        let (max_residual, non_finite) = sanitize(max_residual);
        let (mean_residual, mean_nf) = sanitize(mean_residual);
        let mut report = Self {
            name: name.into(),
            max_residual,
            mean_residual,
            tol,
            pass: !non_finite && max_residual <= tol,
            expected_pass: true,
            metadata: BTreeMap::new(),
        };
        if non_finite || mean_nf {
            report.metadata.insert("non_finite".into(), Value::Bool(true));
        }
        report
    }

    /// A single-value report (e.g. `|observed - expected|`).
    pub fn scalar(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        Self::new(name, residual, residual, tol)
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn expecting_failure(mut self) -> Self {
        self.expected_pass = false;
        self
    }

    /// Re-evaluate `pass` against a different tolerance.
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self.pass = !self.metadata.contains_key("non_finite") && self.max_residual <= tol;
        self
    }

    /// `true` when the outcome matches what was expected.
    pub fn as_expected(&self) -> bool {
        self.pass == self.expected_pass
    }

    /// Merge several reports into one, keeping the worst residual.
    pub fn combine(name: impl Into<String>, tol: f64, parts: &[CheckReport]) -> Self {
        let mut acc = Residuals::new();
        for p in parts {
            acc.push_weighted(p.max_residual, p.mean_residual);
        }
        let mut r = acc.report(name, tol);
        let parts_json: Vec<Value> = parts
            .iter()
            .map(|p| {
                serde_json::json!({"name": p.name, "max_residual": p.max_residual, "pass": p.pass})
            })
            .collect();
        r.metadata.insert("parts".into(), Value::Array(parts_json));
        r
    }
}

fn sanitize(x: f64) -> (f64, bool) {
    if x.is_finite() {
        (x, false)
    } else {
        (f64::MAX, true)
    }
}

/// Running max/mean accumulator for residual sweeps.
#[derive(Debug, Clone, Default)]
pub struct Residuals {
    max: f64,
    sum: f64,
    count: usize,
    worst: Option<usize>,
    non_finite: bool,
}

impl Residuals {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, r: f64) {
        self.push_weighted(r, r);
    }

    fn push_weighted(&mut self, max: f64, mean: f64) {
        if !max.is_finite() || !mean.is_finite() {
            self.non_finite = true;
        }
        if self.worst.is_none() || max > self.max || max.is_nan() {
            self.max = max;
            self.worst = Some(self.count);
        }
        self.sum += mean;
        self.count += 1;
    }

    pub fn max(&self) -> f64 {
        if self.non_finite {
            f64::INFINITY
        } else {
            self.max
        }
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Index (in push order) of the largest residual.
    pub fn worst_index(&self) -> Option<usize> {
        self.worst
    }

    pub fn report(&self, name: impl Into<String>, tol: f64) -> CheckReport {
        CheckReport::new(name, self.max(), self.mean(), tol).with_meta("samples", self.count)
    }
}
