use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<")]
    Below,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub measured: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
    pub passed: bool,
}

impl Assertion {
    pub fn new(name: &str, measured: f64, comparison: Comparison, tolerance: f64) -> Self {
        let passed = match comparison {
            Comparison::AtMost => measured <= tolerance,
            Comparison::AtLeast => measured >= tolerance,
            Comparison::Below => measured < tolerance,
        };
        Assertion { name: name.to_string(), measured, comparison, tolerance, passed }
    }

    pub fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        Self::new(name, measured, Comparison::AtMost, tolerance)
    }

    pub fn at_least(name: &str, measured: f64, tolerance: f64) -> Self {
        Self::new(name, measured, Comparison::AtLeast, tolerance)
    }
}

/// Machine-readable result of one scenario run, written as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    /// The structural identity the scenario exercises.
    pub anchor: String,
    pub config_sha256: String,
    pub seed: u64,
    pub passed: bool,
    pub assertions: Vec<Assertion>,
    pub metrics: BTreeMap<String, f64>,
    pub files: Vec<String>,
}

impl Summary {
    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }
}
