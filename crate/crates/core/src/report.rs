//! Validation reports shared by the axiom checkers.
//!
//! A report is a flat list of violations. Each violation carries a short
//! stable rule slug (safe to match on in tests and CLI output) and a
//! human-readable witness describing the offending elements.

use std::fmt;

/// One violated law together with a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Stable slug for the violated rule, e.g. `"associativity"`.
    pub rule: String,
    /// Witness data: the elements demonstrating the violation.
    pub witness: String,
}

impl Violation {
    pub fn new(rule: impl Into<String>, witness: impl Into<String>) -> Self {
        Violation {
            rule: rule.into(),
            witness: witness.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.witness)
    }
}

/// Outcome of an axiom check. Empty means every law holds.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn new() -> Self {
        ValidationReport::default()
    }

    pub fn push(&mut self, rule: impl Into<String>, witness: impl Into<String>) {
        self.violations.push(Violation::new(rule, witness));
    }

    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    /// Violations for one rule slug.
    pub fn of_rule<'a>(&'a self, rule: &'a str) -> impl Iterator<Item = &'a Violation> {
        self.violations.iter().filter(move |v| v.rule == rule)
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "ok")
        } else {
            for (i, v) in self.violations.iter().enumerate() {
                if i > 0 {
                    writeln!(f)?;
                }
                write!(f, "{v}")?;
            }
            Ok(())
        }
    }
}
