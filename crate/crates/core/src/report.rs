//! Check-line reports shared by every verification surface.

use serde::{Deserialize, Serialize};
use std::fmt;

/// One verified claim: a name, a pass flag, and the worst residual observed.
///
/// Exact checks report a residual of `0.0` on success and the actual
/// coefficient gap on failure; float checks report the maximum relative
/// residual either way.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl CheckLine {
    pub fn pass(name: impl Into<String>, residual: f64) -> Self {
        CheckLine {
            name: name.into(),
            pass: true,
            residual,
            detail: String::new(),
        }
    }

    pub fn fail(name: impl Into<String>, residual: f64, detail: impl Into<String>) -> Self {
        CheckLine {
            name: name.into(),
            pass: false,
            residual,
            detail: detail.into(),
        }
    }

    pub fn from_residual(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        let name = name.into();
        if residual <= tol {
            CheckLine::pass(name, residual)
        } else {
            CheckLine::fail(name, residual, format!("residual {residual:.3e} > {tol:.1e}"))
        }
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "pass" } else { "FAIL" };
        write!(f, "[{tag}] {:<46} residual {:.3e}", self.name, self.residual)?;
        if !self.detail.is_empty() {
            write!(f, "  ({})", self.detail)?;
        }
        Ok(())
    }
}

/// Named list of check lines.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Report {
    pub title: String,
    pub lines: Vec<CheckLine>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            lines: Vec::new(),
        }
    }

    pub fn push(&mut self, line: CheckLine) {
        self.lines.push(line);
    }

    pub fn extend(&mut self, lines: impl IntoIterator<Item = CheckLine>) {
        self.lines.extend(lines);
    }

    pub fn all_pass(&self) -> bool {
        self.lines.iter().all(|l| l.pass)
    }

    pub fn first_failure(&self) -> Option<&CheckLine> {
        self.lines.iter().find(|l| !l.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.lines.iter().map(|l| l.residual).fold(0.0, f64::max)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "== {} ==", self.title)?;
        for line in &self.lines {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Collapses per-instance residuals of one identity into a single line.
#[derive(Debug)]
pub struct ResidualAccumulator {
    name: String,
    max: f64,
    worst_detail: String,
    tol: f64,
}

impl ResidualAccumulator {
    pub fn new(name: impl Into<String>, tol: f64) -> Self {
        ResidualAccumulator {
            name: name.into(),
            max: 0.0,
            worst_detail: String::new(),
            tol,
        }
    }

    pub fn record(&mut self, residual: f64, detail: impl FnOnce() -> String) {
        if residual > self.max {
            self.max = residual;
            if residual > self.tol {
                self.worst_detail = detail();
            }
        }
    }

    pub fn record_bool(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.record(if ok { 0.0 } else { 1.0 }, detail);
    }

    pub fn finish(self) -> CheckLine {
        if self.max <= self.tol {
            CheckLine::pass(self.name, self.max)
        } else {
            CheckLine::fail(self.name, self.max, self.worst_detail)
        }
    }
}
