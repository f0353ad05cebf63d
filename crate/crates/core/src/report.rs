use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// One disagreement found by a verification suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub input: BTreeMap<String, f64>,
    pub expected: String,
    pub got: String,
    pub residual: f64,
}

/// Outcome of a verification suite. Passing means `failures` is empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub cases: usize,
    pub failures: Vec<Failure>,
    pub max_residual: f64,
    /// Suite-specific summary numbers.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
}

impl VerifyReport {
    pub fn new(suite: impl Into<String>) -> Self {
        Self {
            suite: suite.into(),
            cases: 0,
            failures: Vec::new(),
            max_residual: 0.0,
            metrics: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Folds a residual into `max_residual`; NaN poisons the maximum.
    pub fn record_residual(&mut self, residual: f64) {
        if residual.is_nan() || residual > self.max_residual {
            self.max_residual = if residual.is_nan() { f64::INFINITY } else { residual };
        }
    }

    pub fn set_metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }
}

/// Builds an input record from `(name, value)` pairs.
pub fn input_of<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
