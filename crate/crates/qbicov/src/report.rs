//! Structured pass/fail reports for the verification suites. Checks never
//! panic on an identity violation; they record the first offending index
//! tuple and residual so the CLI can aggregate and exit nonzero.

use std::fmt;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// First offending index tuple / residual, when the check failed.
    pub witness: Option<String>,
    /// Set for checks that are supposed to fail (counterexample guards).
    pub expected_failure: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn new(suite: &str) -> Report {
        Report {
            suite: suite.to_string(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, pass: bool, witness: Option<String>) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            pass,
            witness,
            expected_failure: false,
        });
    }

    /// Record a counterexample guard: the check passes when the underlying
    /// identity fails as expected.
    pub fn push_expected_failure(&mut self, name: &str, identity_failed: bool) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            pass: identity_failed,
            witness: if identity_failed {
                None
            } else {
                Some("identity unexpectedly holds".to_string())
            },
            expected_failure: true,
        });
    }

    pub fn merge(&mut self, other: Report) {
        for mut c in other.checks {
            c.name = format!("{}/{}", other.suite, c.name);
            self.checks.push(c);
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "suite": self.suite,
            "pass": self.all_pass(),
            "checks": self.checks.iter().map(|c| serde_json::json!({
                "name": c.name,
                "pass": c.pass,
                "expected_failure": c.expected_failure,
                "witness": c.witness,
            })).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "[{}] {}",
            if self.all_pass() { "PASS" } else { "FAIL" },
            self.suite
        )?;
        for c in &self.checks {
            write!(
                f,
                "  [{}] {}",
                if c.pass { "pass" } else { "FAIL" },
                c.name
            )?;
            if let Some(w) = &c.witness {
                write!(f, "  ({w})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
