//! Deterministic check reports with a human-readable and a
//! machine-readable rendering. Identical inputs yield byte-identical
//! output: record order follows document order and every enumeration
//! upstream is canonical.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Human,
    Machine,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub witness: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub command: String,
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            records: Vec::new(),
        }
    }

    pub fn pass(&mut self, name: impl Into<String>, witness: impl Into<String>) {
        self.records.push(CheckRecord {
            name: name.into(),
            passed: true,
            witness: witness.into(),
        });
    }

    pub fn fail(&mut self, name: impl Into<String>, witness: impl Into<String>) {
        self.records.push(CheckRecord {
            name: name.into(),
            passed: false,
            witness: witness.into(),
        });
    }

    pub fn record(&mut self, name: impl Into<String>, passed: bool, witness: impl Into<String>) {
        self.records.push(CheckRecord {
            name: name.into(),
            passed,
            witness: witness.into(),
        });
    }

    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn failure_count(&self) -> usize {
        self.records.iter().filter(|r| !r.passed).count()
    }

    /// Process exit status: 0 when every check passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Human => {
                let mut out = format!("command: {}\n", self.command);
                for r in &self.records {
                    let status = if r.passed { "PASS" } else { "FAIL" };
                    if r.witness.is_empty() {
                        out.push_str(&format!("[{status}] {}\n", r.name));
                    } else {
                        out.push_str(&format!("[{status}] {}: {}\n", r.name, r.witness));
                    }
                }
                out.push_str(&format!(
                    "summary: {} checks, {} failures\n",
                    self.records.len(),
                    self.failure_count()
                ));
                out
            }
            ReportFormat::Machine => {
                // one record per line: check name, status, witness
                let mut out = format!("command {}\n", self.command);
                for r in &self.records {
                    let status = if r.passed { "PASS" } else { "FAIL" };
                    let witness = if r.witness.is_empty() {
                        "-"
                    } else {
                        &r.witness
                    };
                    out.push_str(&format!("record {} {status} {witness}\n", r.name));
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_both_formats() {
        let mut r = Report::new("k0");
        r.pass("E.k0", "free rank 1, no torsion");
        r.fail("E.axioms", "split-missing");
        assert_eq!(r.exit_code(), 1);
        let human = r.render(ReportFormat::Human);
        assert!(human.contains("[PASS] E.k0"));
        assert!(human.contains("summary: 2 checks, 1 failures"));
        let machine = r.render(ReportFormat::Machine);
        assert!(machine.starts_with("command k0\n"));
        assert!(machine.contains("record E.k0 PASS free rank 1, no torsion"));
    }
}
