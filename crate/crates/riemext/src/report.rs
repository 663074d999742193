//! Check reports: named verdicts with witnesses, serialized to a stable
//! JSON schema (`"schema": 1`).
//!
//! Statuses `fail` and `unknown` make a report failing (unverified claims
//! count as failures). `precondition-violated` marks checks whose
//! hypotheses the input does not meet; `erratum` entries document source
//! discrepancies. Neither affects the pass/fail outcome.

use serde_json::json;

use crate::expr::{Verdict, Witness, ZeroVerdict};
use crate::geometry::RicciConvention;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Unknown,
    PreconditionViolated,
    Erratum,
}

impl CheckStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Unknown => "unknown",
            CheckStatus::PreconditionViolated => "precondition-violated",
            CheckStatus::Erratum => "erratum",
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, CheckStatus::Fail | CheckStatus::Unknown)
    }
}

/// One verified identity (or documented discrepancy) in a report.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub witness: Option<Witness>,
    pub detail: Option<String>,
}

impl Check {
    pub fn from_verdict(name: impl Into<String>, verdict: ZeroVerdict) -> Check {
        let status = match verdict.verdict {
            Verdict::Zero => CheckStatus::Pass,
            Verdict::NonZero => CheckStatus::Fail,
            Verdict::Unknown => CheckStatus::Unknown,
        };
        Check { name: name.into(), status, witness: verdict.witness, detail: None }
    }

    pub fn pass(name: impl Into<String>) -> Check {
        Check { name: name.into(), status: CheckStatus::Pass, witness: None, detail: None }
    }

    pub fn precondition(name: impl Into<String>, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            status: CheckStatus::PreconditionViolated,
            witness: None,
            detail: Some(detail.into()),
        }
    }

    /// A documented source discrepancy: informational, never counted as a
    /// failure.
    pub fn erratum(
        name: impl Into<String>,
        detail: impl Into<String>,
        witness: Option<Witness>,
    ) -> Check {
        Check {
            name: name.into(),
            status: CheckStatus::Erratum,
            witness,
            detail: Some(detail.into()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Check {
        self.detail = Some(detail.into());
        self
    }
}

/// A named suite of checks run under one Ricci convention.
#[derive(Clone, Debug)]
pub struct Report {
    pub suite: String,
    pub convention: RicciConvention,
    pub checks: Vec<Check>,
    /// Base dimension for starred index display on extended charts.
    pub star_from: Option<usize>,
}

impl Report {
    pub fn new(suite: impl Into<String>, convention: RicciConvention) -> Report {
        Report { suite: suite.into(), convention, checks: Vec::new(), star_from: None }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| !c.status.is_failure())
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "schema": 1,
            "suite": self.suite,
            "convention": self.convention.as_str(),
            "passed": self.passed(),
            "checks": self
                .checks
                .iter()
                .map(|c| check_json(c, self.star_from))
                .collect::<Vec<_>>(),
        })
    }
}

fn check_json(check: &Check, star_from: Option<usize>) -> serde_json::Value {
    let mut obj = serde_json::Map::new();
    obj.insert("name".into(), json!(check.name));
    obj.insert("identity".into(), json!(check.name));
    obj.insert("status".into(), json!(check.status.as_str()));
    obj.insert(
        "witness".into(),
        match &check.witness {
            Some(w) => witness_json(w, star_from),
            None => serde_json::Value::Null,
        },
    );
    if let Some(detail) = &check.detail {
        obj.insert("detail".into(), json!(detail));
    }
    serde_json::Value::Object(obj)
}

pub fn witness_json(w: &Witness, star_from: Option<usize>) -> serde_json::Value {
    let point: serde_json::Map<String, serde_json::Value> = w
        .point
        .iter()
        .map(|(s, v)| (s.name().to_owned(), json!(v.to_string())))
        .collect();
    let mut obj = serde_json::Map::new();
    if let Some(component) = &w.component {
        obj.insert("component".into(), json!(component));
        if let Some(n) = star_from {
            obj.insert("component_display".into(), json!(starred_tuple(component, n)));
        }
    }
    obj.insert("point".into(), serde_json::Value::Object(point));
    obj.insert("value".into(), json!(w.value));
    serde_json::Value::Object(obj)
}

/// Formats an extended-chart tuple with starred fiber indices:
/// `[1, 2, 1*, 2]` for base dimension 2 means slot 3 held index n+1.
pub fn starred_tuple(idx: &[usize], base_dim: usize) -> String {
    let parts: Vec<String> = idx
        .iter()
        .map(|&i| {
            if i > base_dim {
                format!("{}*", i - base_dim)
            } else {
                i.to_string()
            }
        })
        .collect();
    format!("[{}]", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starred_display() {
        assert_eq!(starred_tuple(&[1, 3, 2, 4], 2), "[1,1*,2,2*]");
        assert_eq!(starred_tuple(&[2, 1], 2), "[2,1]");
    }

    #[test]
    fn failure_semantics() {
        let mut r = Report::new("demo", RicciConvention::Standard);
        r.push(Check::pass("a"));
        r.push(Check::precondition("b", "needs n >= 3"));
        r.push(Check::erratum("c", "printed coefficient differs", None));
        assert!(r.passed());
        r.push(Check {
            name: "d".into(),
            status: CheckStatus::Unknown,
            witness: None,
            detail: None,
        });
        assert!(!r.passed());
        let v = r.to_json();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["checks"][0]["identity"], "a");
        assert_eq!(v["checks"][1]["status"], "precondition-violated");
    }
}
