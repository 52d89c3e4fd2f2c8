//! Machine-readable results of a verification run.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

/// How `max_residual` relates to `tolerance`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    /// Exact check; both numbers are 0.
    Exact,
    /// Passes iff `max_residual < tolerance`.
    Below,
    /// Passes iff `max_residual ≥ tolerance`; the value is a smallest margin.
    AtLeast,
}

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub bound: Bound,
    /// Largest residual seen, or the smallest margin for [`Bound::AtLeast`].
    /// NaN is written as `null`.
    #[serde(deserialize_with = "nan_from_null")]
    pub max_residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn exact(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            bound: Bound::Exact,
            max_residual: 0.0,
            tolerance: 0.0,
            detail: detail.into(),
        }
    }

    /// Passes iff `max_residual < tolerance`; NaN fails.
    pub fn bounded(name: &str, max_residual: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: max_residual < tolerance,
            bound: Bound::Below,
            max_residual,
            tolerance,
            detail: detail.into(),
        }
    }

    /// Passes iff `margin >= minimum`; NaN fails.
    pub fn at_least(name: &str, margin: f64, minimum: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: margin >= minimum,
            bound: Bound::AtLeast,
            max_residual: margin,
            tolerance: minimum,
            detail: detail.into(),
        }
    }

    pub fn failed(name: &str, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: false,
            bound: Bound::Exact,
            max_residual: f64::NAN,
            tolerance: 0.0,
            detail: detail.into(),
        }
    }
}

fn nan_from_null<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Summary of a suite. Field order is part of the JSON format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub suite: String,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckResult>,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn new(suite: &str, checks: Vec<CheckResult>, wall_time_s: f64) -> Self {
        let passed = checks.iter().filter(|c| c.passed).count();
        Self {
            suite: suite.to_string(),
            passed,
            failed: checks.len() - passed,
            checks,
            wall_time_s,
        }
    }

    /// Runs `f` and times it.
    pub fn timed(suite: &str, f: impl FnOnce() -> Vec<CheckResult>) -> Self {
        let start = Instant::now();
        let checks = f();
        Self::new(suite, checks, start.elapsed().as_secs_f64())
    }

    /// Concatenates several reports under one suite name.
    pub fn merge(suite: &str, parts: Vec<RunReport>) -> Self {
        let wall = parts.iter().map(|r| r.wall_time_s).sum();
        let checks = parts
            .into_iter()
            .flat_map(|r| {
                let prefix = r.suite;
                r.checks.into_iter().map(move |mut c| {
                    c.name = format!("{prefix}/{}", c.name);
                    c
                })
            })
            .collect();
        Self::new(suite, checks, wall)
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::Error::Parse(format!("report: {e}")))
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            write!(f, "{tag} {}", c.name)?;
            match c.bound {
                Bound::Exact => {}
                Bound::Below => write!(f, "  max {:.3e} < {:.1e}", c.max_residual, c.tolerance)?,
                Bound::AtLeast => write!(f, "  min {:.3e} >= {:.1e}", c.max_residual, c.tolerance)?,
            }
            if !c.detail.is_empty() {
                write!(f, "  ({})", c.detail)?;
            }
            writeln!(f)?;
        }
        write!(
            f,
            "{}: {} passed, {} failed in {:.2}s",
            self.suite, self.passed, self.failed, self.wall_time_s
        )
    }
}
