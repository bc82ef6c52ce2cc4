use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// One named numerical check: a residual compared against a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Named checks plus an overall verdict (the conjunction of the checks).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CertificationReport {
    pub verdict: bool,
    pub checks: Vec<Check>,
    pub witnesses: Map<String, Value>,
}

impl CertificationReport {
    pub fn new() -> Self {
        Self {
            verdict: true,
            checks: Vec::new(),
            witnesses: Map::new(),
        }
    }

    /// Records `residual <= tol` as a check.
    pub fn check(&mut self, name: impl Into<String>, residual: f64, tol: f64) -> bool {
        let pass = residual.is_finite() && residual <= tol;
        self.push(name, residual, tol, pass)
    }

    /// Records a check whose pass flag was decided by the caller.
    pub fn push(&mut self, name: impl Into<String>, residual: f64, tol: f64, pass: bool) -> bool {
        self.verdict &= pass;
        self.checks.push(Check {
            name: name.into(),
            residual,
            tol,
            pass,
        });
        pass
    }

    /// Records an informational value that does not affect the verdict.
    pub fn witness(&mut self, key: impl Into<String>, value: impl Serialize) {
        let value = serde_json::to_value(value).unwrap_or(Value::Null);
        self.witnesses.insert(key.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self, name: &str) -> bool {
        self.get(name).is_some_and(|c| c.pass)
    }

    /// Appends another report's checks under a name prefix.
    pub fn merge(&mut self, prefix: &str, other: &CertificationReport) {
        for c in &other.checks {
            self.push(format!("{prefix}.{}", c.name), c.residual, c.tol, c.pass);
        }
        for (k, v) in &other.witnesses {
            self.witnesses.insert(format!("{prefix}.{k}"), v.clone());
        }
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_is_conjunction() {
        let mut r = CertificationReport::new();
        assert!(r.verdict);
        r.check("a", 1e-12, 1e-9);
        assert!(r.verdict);
        r.check("b", 1e-3, 1e-9);
        assert!(!r.verdict);
        assert!(r.passed("a"));
        assert!(!r.passed("b"));
        assert_eq!(r.failed_checks().count(), 1);
    }

    #[test]
    fn nan_residual_fails() {
        let mut r = CertificationReport::new();
        assert!(!r.check("nan", f64::NAN, 1.0));
        assert!(!r.verdict);
    }
}
