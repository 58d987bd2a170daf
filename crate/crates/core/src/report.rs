//! Machine-readable reports: named checks with thresholds, conflict flags,
//! and a conventions block so every result is self-describing. Rendering is
//! deterministic for a fixed configuration and seed.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// The sign and ordering conventions every result depends on.
#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    pub metric_signature: &'static str,
    pub epsilon_orientation: &'static str,
    pub composition_table_order: &'static str,
    pub anticommutator_form: &'static str,
    pub surface_element: &'static str,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            metric_signature: "(+,-): box = d_t^2 - d_x^2, V^mu_;mu = d_t V_t - d_x V_x",
            epsilon_orientation: "epsilon_123 = +1",
            composition_table_order:
                "composition table cell (column a, row b) holds Omega^(a) applied after Omega^(b)",
            anticommutator_form:
                "B_j = -(i/2)(a_j q_k - a_k q_j) delta^{jk}-contracted half-weight \
                 antisymmetrization; fitted constant (0, -1/2)",
            surface_element: "dSigma^mu = (dx, 0) on constant-time slices",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub conventions: Conventions,
    pub checks: Vec<Check>,
    /// places where an independently computed result contradicts a catalogued
    /// reference value; informational, not a failure
    pub conflicts: Vec<String>,
    pub details: std::collections::BTreeMap<String, serde_json::Value>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str, seed: u64, config: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            seed,
            config,
            conventions: Conventions::default(),
            checks: Vec::new(),
            conflicts: Vec::new(),
            details: std::collections::BTreeMap::new(),
            pass: true,
        }
    }

    /// Records a check that passes when `value <= threshold`.
    pub fn check(&mut self, name: &str, value: f64, threshold: f64) -> bool {
        let pass = value.is_finite() && value <= threshold;
        self.checks.push(Check {
            name: name.to_string(),
            value,
            threshold,
            pass,
        });
        self.pass &= pass;
        pass
    }

    /// Records a boolean check (value 1 = hold, threshold 0 = must hold).
    pub fn check_bool(&mut self, name: &str, holds: bool) -> bool {
        self.check(name, if holds { 0.0 } else { 1.0 }, 0.0)
    }

    pub fn conflict(&mut self, message: impl Into<String>) {
        self.conflicts.push(message.into());
    }

    pub fn detail(&mut self, key: &str, value: serde_json::Value) {
        self.details.insert(key.to_string(), value);
    }

    /// Deterministic JSON body (no timestamps or wall-clock data).
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per check, for terminal use.
    pub fn summary_lines(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {:<55} value {:.3e}  threshold {:.3e}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.threshold
            ));
        }
        for msg in &self.conflicts {
            out.push_str(&format!("NOTE reference conflict: {msg}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_tracking_and_determinism() {
        let mk = || {
            let mut r = Report::new("demo", 0, serde_json::json!({"n": 4}));
            r.check("small_residual", 1e-14, 1e-10);
            r.check_bool("exact_identity", true);
            r.conflict("printed value differs");
            r.detail("table", serde_json::json!([1, 2, 3]));
            r
        };
        let r = mk();
        assert!(r.pass);
        assert_eq!(r.render(), mk().render());
        let mut r2 = mk();
        r2.check("failing", 1.0, 0.5);
        assert!(!r2.pass);
        assert!(r2.summary_lines().contains("FAIL failing"));
    }

    #[test]
    fn nan_values_fail() {
        let mut r = Report::new("demo", 0, serde_json::Value::Null);
        r.check("nan", f64::NAN, 1.0);
        assert!(!r.pass);
    }
}
