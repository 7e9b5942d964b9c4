use serde::{Deserialize, Serialize};

/// One named predicate and its verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub verdict: bool,
    pub details: String,
}

impl Check {
    pub fn new(name: impl Into<String>, verdict: bool, details: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            verdict,
            details: details.into(),
        }
    }
}

/// Ordered list of checks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn push(&mut self, name: impl Into<String>, verdict: bool, details: impl Into<String>) {
        self.checks.push(Check::new(name, verdict, details));
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.verdict)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.verdict)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.verdict)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }
}
