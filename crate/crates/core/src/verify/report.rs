use std::fmt::Write as _;

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Subject {
    pub process: Option<String>,
    pub filling: Option<String>,
    pub n: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// The assumption or bound this check tests.
    pub anchor: String,
    pub pass: bool,
    /// Distance to the threshold; positive means inside.
    pub margin: f64,
    pub details: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub subject: Subject,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new(subject: Subject) -> Self {
        VerificationReport {
            subject,
            checks: Vec::new(),
        }
    }

    pub fn push(
        &mut self,
        name: &str,
        anchor: &str,
        pass: bool,
        margin: f64,
        details: impl Into<String>,
    ) {
        self.checks.push(Check {
            name: name.to_string(),
            anchor: anchor.to_string(),
            pass,
            margin,
            details: details.into(),
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let s = &self.subject;
        let _ = writeln!(
            out,
            "subject: process={} filling={} n={}",
            s.process.as_deref().unwrap_or("-"),
            s.filling.as_deref().unwrap_or("-"),
            s.n.map_or("-".to_string(), |n| n.to_string())
        );
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let _ = writeln!(out, "{:<width$}  {:<4}  {:>12}  details", "check", "pass", "margin");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<width$}  {:<4}  {:>12.4e}  {}",
                c.name,
                if c.pass { "ok" } else { "FAIL" },
                c.margin,
                c.details
            );
        }
        out
    }
}
