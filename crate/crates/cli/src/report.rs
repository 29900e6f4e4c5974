//! Verification reports: JSON for machines, CSV for people.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::SuiteConfig;

/// How a record's value is compared with its oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// `|value - oracle| ≤ tol`.
    TwoSided,
    /// `value ≥ oracle - tol`.
    LowerBound,
}

impl Check {
    pub fn passes(self, value: f64, oracle: f64, tol: f64) -> bool {
        match self {
            Check::TwoSided => (value - oracle).abs() <= tol,
            Check::LowerBound => value >= oracle - tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub suite: String,
    pub inputs: Value,
    pub value: Option<f64>,
    pub oracle: Option<f64>,
    pub err_est: Option<f64>,
    pub tol: Option<f64>,
    pub check: Check,
    pub pass: bool,
    pub ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl Record {
    pub fn measured(id: String, suite: &str, inputs: Value, m: Measured) -> Self {
        let pass = m.value.is_finite() && m.check.passes(m.value, m.oracle, m.tol);
        Record {
            id,
            suite: suite.to_string(),
            inputs,
            value: Some(m.value),
            oracle: Some(m.oracle),
            err_est: Some(m.err_est),
            tol: Some(m.tol),
            check: m.check,
            pass,
            ms: 0.0,
            diagnostic: None,
        }
    }

    pub fn failed(id: String, suite: &str, inputs: Value, diagnostic: String) -> Self {
        Record {
            id,
            suite: suite.to_string(),
            inputs,
            value: None,
            oracle: None,
            err_est: None,
            tol: None,
            check: Check::TwoSided,
            pass: false,
            ms: 0.0,
            diagnostic: Some(diagnostic),
        }
    }
}

/// Outcome of one numerical check before it becomes a [`Record`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measured {
    pub value: f64,
    pub oracle: f64,
    pub err_est: f64,
    pub tol: f64,
    pub check: Check,
}

impl Measured {
    pub fn two_sided(value: f64, oracle: f64, err_est: f64, tol: f64) -> Self {
        Measured {
            value,
            oracle,
            err_est,
            tol,
            check: Check::TwoSided,
        }
    }

    pub fn lower_bound(value: f64, oracle: f64, err_est: f64, tol: f64) -> Self {
        Measured {
            value,
            oracle,
            err_est,
            tol,
            check: Check::LowerBound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub config: SuiteConfig,
    pub records: Vec<Record>,
    pub summary: Summary,
}

impl Report {
    pub fn new(config: SuiteConfig, mut records: Vec<Record>) -> Self {
        records.sort_by(|a, b| a.id.cmp(&b.id));
        let passed = records.iter().filter(|r| r.pass).count();
        Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            summary: Summary {
                total: records.len(),
                passed,
                failed: records.len() - passed,
            },
            records,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "id",
            "suite",
            "value",
            "oracle",
            "err_est",
            "tol",
            "check",
            "pass",
            "ms",
            "diagnostic",
        ])?;
        let num = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.records {
            w.write_record([
                r.id.clone(),
                r.suite.clone(),
                num(r.value),
                num(r.oracle),
                num(r.err_est),
                num(r.tol),
                match r.check {
                    Check::TwoSided => "two-sided".into(),
                    Check::LowerBound => "lower-bound".into(),
                },
                r.pass.to_string(),
                format!("{:.3}", r.ms),
                r.diagnostic.clone().unwrap_or_default(),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    /// Writes `path` as JSON and the same stem with extension `csv`.
    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        std::fs::write(path, self.to_json()?)
            .with_context(|| format!("writing {}", path.display()))?;
        let csv_path = path.with_extension("csv");
        std::fs::write(&csv_path, self.to_csv()?)
            .with_context(|| format!("writing {}", csv_path.display()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Suite;

    #[test]
    fn checks() {
        assert!(Check::TwoSided.passes(1.0, 1.05, 0.1));
        assert!(!Check::TwoSided.passes(1.0, 1.2, 0.1));
        assert!(Check::LowerBound.passes(5.0, 1.0, 0.0));
        assert!(Check::LowerBound.passes(0.96, 1.0, 0.05));
        assert!(!Check::LowerBound.passes(0.9, 1.0, 0.05));
    }

    #[test]
    fn non_finite_values_fail() {
        let r = Record::measured(
            "a".into(),
            "norms",
            Value::Null,
            Measured::two_sided(f64::NAN, 0.0, 0.0, 1.0),
        );
        assert!(!r.pass);
    }

    #[test]
    fn records_are_sorted_and_counted() {
        let mk = |id: &str, pass: bool| {
            let m = Measured::two_sided(if pass { 0.0 } else { 2.0 }, 0.0, 0.0, 1.0);
            Record::measured(id.into(), "norms", Value::Null, m)
        };
        let rep = Report::new(
            SuiteConfig::new(Suite::Norms),
            vec![mk("b", true), mk("a", false), mk("c", true)],
        );
        let ids: Vec<&str> = rep.records.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert_eq!(
            rep.summary,
            Summary {
                total: 3,
                passed: 2,
                failed: 1
            }
        );
        let csv = rep.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("id,suite,value"));
    }
}
