//! Machine-readable verification reports.
//!
//! A report is a named suite, an echo of its configuration, and an ordered
//! list of checks. Checks are sorted by name before serialization and the
//! config echo is a sorted map, so identical configurations always produce
//! byte-identical JSON.

use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

/// One verification check. Failures always carry a witness: the inputs and
/// both sides of the violated identity, serialized as text.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub config: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub passed: bool,
}

impl Report {
    pub fn new(suite: impl Into<String>) -> Report {
        Report {
            suite: suite.into(),
            config: BTreeMap::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            passed: true,
        }
    }

    pub fn set_config(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.config.insert(key.into(), value.into());
    }

    pub fn pass(&mut self, name: impl Into<String>) {
        self.push(name, Status::Pass, None);
    }

    pub fn fail(&mut self, name: impl Into<String>, witness: impl Into<String>) {
        self.push(name, Status::Fail, Some(witness.into()));
    }

    pub fn error(&mut self, name: impl Into<String>, witness: impl Into<String>) {
        self.push(name, Status::Error, Some(witness.into()));
    }

    pub fn push(&mut self, name: impl Into<String>, status: Status, witness: Option<String>) {
        if status != Status::Pass {
            self.passed = false;
        }
        self.checks.push(Check {
            name: name.into(),
            status,
            witness,
        });
    }

    /// Record a check from a boolean outcome.
    pub fn check(&mut self, name: impl Into<String>, ok: bool, witness: impl FnOnce() -> String) {
        if ok {
            self.pass(name);
        } else {
            self.fail(name, witness());
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Merge another report's checks under a prefix.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for c in other.checks {
            self.push(format!("{}/{}", prefix, c.name), c.status, c.witness);
        }
        for n in other.notes {
            self.note(n);
        }
    }

    /// Sort checks by name for a stable serialization order.
    pub fn finalize(mut self) -> Report {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let mut pass = 0;
        let mut fail = 0;
        let mut error = 0;
        for c in &self.checks {
            match c.status {
                Status::Pass => pass += 1,
                Status::Fail => fail += 1,
                Status::Error => error += 1,
            }
        }
        (pass, fail, error)
    }
}
