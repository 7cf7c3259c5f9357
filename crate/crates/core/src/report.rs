//! Outcome records shared by the condition checks.

use serde::{Deserialize, Serialize};

/// Which condition a [`CheckReport`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "W")]
    W,
    #[serde(rename = "MG")]
    Mg,
    #[serde(rename = "W11")]
    W11,
    #[serde(rename = "A-value")]
    AValue,
    #[serde(rename = "M-omega-G")]
    MOmegaG,
    #[serde(rename = "equivalences")]
    Equivalences,
    #[serde(rename = "modulus-identities")]
    ModulusIdentities,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

/// Result of a condition check.
///
/// `passed` is true exactly when `worst_slack >= -tol`. The witness holds up
/// to three points `(x, y, z)` that realise the worst slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub condition: Condition,
    pub constant: f64,
    pub worst_slack: f64,
    pub witness: Vec<Vec<f64>>,
    pub passed: bool,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<NamedValue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl CheckReport {
    pub fn new(condition: Condition, constant: f64, tol: f64) -> Self {
        CheckReport {
            condition,
            constant,
            worst_slack: f64::INFINITY,
            witness: Vec::new(),
            passed: true,
            tol,
            details: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Record a slack value; keeps the witness of the smallest one seen.
    pub fn observe(&mut self, slack: f64, witness: impl FnOnce() -> Vec<Vec<f64>>) {
        if slack < self.worst_slack || (slack.is_nan() && !self.worst_slack.is_nan()) {
            self.worst_slack = slack;
            self.witness = witness();
        }
    }

    pub fn detail(&mut self, name: &str, value: f64) {
        self.details.push(NamedValue {
            name: name.to_string(),
            value,
        });
    }

    pub fn detail_value(&self, name: &str) -> Option<f64> {
        self.details
            .iter()
            .find(|d| d.name == name)
            .map(|d| d.value)
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        if !self.warnings.contains(&msg) {
            self.warnings.push(msg);
        }
    }

    /// Fix `passed` from the recorded slack. An empty report (no pairs) passes.
    pub fn finish(mut self) -> Self {
        if self.worst_slack == f64::INFINITY {
            self.worst_slack = 0.0;
        }
        self.passed = self.worst_slack >= -self.tol;
        self
    }
}
