use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// False when the check does not apply to this kind of profile; such
    /// entries always pass.
    pub applicable: bool,
    /// Largest normalized violation; nonpositive values are margins.
    pub worst: f64,
    /// Radius at which `worst` occurs.
    pub r_worst: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub(crate) fn not_applicable(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            pass: true,
            applicable: false,
            worst: 0.0,
            r_worst: 0.0,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub checks: Vec<CheckResult>,
}

impl DiagnosticsReport {
    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed_names(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub(crate) fn push(&mut self, c: CheckResult) {
        self.checks.retain(|x| x.name != c.name);
        self.checks.push(c);
    }

    /// `{ name: { pass, applicable, worst, r_worst, tolerance } }` in check order.
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for c in &self.checks {
            map.insert(
                c.name.clone(),
                json!({
                    "pass": c.pass,
                    "applicable": c.applicable,
                    "worst": finite(c.worst),
                    "r_worst": finite(c.r_worst),
                    "tolerance": c.tolerance,
                }),
            );
        }
        Value::Object(map)
    }
}

fn finite(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else if x > 0.0 {
        f64::MAX
    } else {
        f64::MIN
    }
}
