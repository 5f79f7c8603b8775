//! Line-delimited check reports.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub params: String,
    pub status: Status,
    pub detail: String,
}

impl fmt::Display for CheckRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
        };
        write!(f, "{s} {} [{}] {}", self.check, self.params, self.detail)
    }
}

/// Pass records summarize a block of cases; every failing case gets its own record.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, check: &str, params: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.records.push(CheckRecord {
            check: check.to_string(),
            params: params.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        });
    }

    pub fn fail(&mut self, check: &str, params: impl Into<String>, detail: impl Into<String>) {
        self.push(check, params, false, detail);
    }

    pub fn pass(&mut self, check: &str, params: impl Into<String>, detail: impl Into<String>) {
        self.push(check, params, true, detail);
    }

    pub fn extend(&mut self, other: Report) {
        self.records.extend(other.records);
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.status == Status::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| r.status == Status::Fail)
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.records {
            let line = serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Counts cases for one check and records failures as they happen.
pub(crate) struct Tally<'a> {
    report: &'a mut Report,
    check: &'static str,
    params: String,
    cases: u64,
    failed: u64,
}

impl<'a> Tally<'a> {
    pub fn new(report: &'a mut Report, check: &'static str, params: impl Into<String>) -> Self {
        Tally { report, check, params: params.into(), cases: 0, failed: 0 }
    }

    pub fn case(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failed += 1;
            // Cap the number of individual failure lines per block.
            if self.failed <= 20 {
                let d = detail();
                self.report.fail(self.check, self.params.clone(), d);
            }
        }
    }

    pub fn finish(self) {
        if self.failed == 0 {
            self.report.pass(self.check, self.params, format!("{} cases", self.cases));
        } else if self.failed > 20 {
            let msg = format!("{} of {} cases failed", self.failed, self.cases);
            self.report.fail(self.check, self.params, msg);
        }
    }
}
