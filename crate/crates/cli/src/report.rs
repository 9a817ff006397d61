//! Plain-text and JSON reports.

use std::fmt;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
            Status::Info => "INFO",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Line {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub title: String,
    pub lines: Vec<Line>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            lines: Vec::new(),
        }
    }

    pub fn push(
        &mut self,
        name: impl Into<String>,
        status: Status,
        residual: Option<f64>,
        detail: impl Into<String>,
    ) {
        self.lines.push(Line {
            name: name.into(),
            status,
            residual,
            detail: detail.into(),
        });
    }

    /// A pass/fail line from a residual and its threshold.
    pub fn measure(
        &mut self,
        name: impl Into<String>,
        residual: f64,
        threshold: f64,
        detail: impl Into<String>,
    ) {
        let status = if residual <= threshold {
            Status::Pass
        } else {
            Status::Fail
        };
        self.push(name, status, Some(residual), detail);
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.status != Status::Fail)
    }

    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["passed"] = serde_json::Value::Bool(self.passed());
        serde_json::to_string_pretty(&v).expect("report serializes") + "\n"
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        let width = self.lines.iter().map(|l| l.name.len()).max().unwrap_or(0);
        for l in &self.lines {
            write!(f, "{}  {:<width$}", l.status, l.name)?;
            if let Some(r) = l.residual {
                write!(f, "  residual {r:.3e}")?;
            }
            if !l.detail.is_empty() {
                write!(f, "  {}", l.detail)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
