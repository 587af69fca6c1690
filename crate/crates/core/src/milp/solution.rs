use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    Unbounded,
    TimeLimitNoIncumbent,
    NumericalFailure,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Feasible)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::TimeLimitNoIncumbent => "time-limit-no-incumbent",
            SolveStatus::NumericalFailure => "numerical-failure",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolveStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "optimal" => SolveStatus::Optimal,
            "feasible" => SolveStatus::Feasible,
            "infeasible" => SolveStatus::Infeasible,
            "unbounded" => SolveStatus::Unbounded,
            "time-limit-no-incumbent" => SolveStatus::TimeLimitNoIncumbent,
            "numerical-failure" => SolveStatus::NumericalFailure,
            other => return Err(format!("unknown status {other:?}")),
        })
    }
}

/// Outcome of an LP or MILP solve. `values` is indexed by variable id and is
/// empty unless the status carries a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    pub values: Vec<f64>,
    pub objective: Option<f64>,
    pub best_bound: Option<f64>,
    pub nodes: u64,
    pub elapsed: Duration,
}

impl Solution {
    pub fn without_point(status: SolveStatus, elapsed: Duration) -> Self {
        Self {
            status,
            values: Vec::new(),
            objective: None,
            best_bound: None,
            nodes: 0,
            elapsed,
        }
    }

    /// Relative gap between incumbent and bound, when both exist.
    pub fn gap(&self) -> Option<f64> {
        let (obj, bound) = (self.objective?, self.best_bound?);
        Some(((obj - bound) / obj.abs().max(1e-10)).max(0.0))
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LimitsError {
    #[error("time budget must be positive")]
    Budget,
    #[error("gap threshold must be nonnegative")]
    Gap,
    #[error("integrality tolerance must lie in (0, 0.5)")]
    IntTol,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveLimits {
    pub time_limit: Duration,
    pub gap: f64,
    pub int_tol: f64,
    pub node_limit: Option<u64>,
}

impl Default for SolveLimits {
    fn default() -> Self {
        Self {
            time_limit: Duration::from_secs(3600),
            gap: 1e-4,
            int_tol: 1e-6,
            node_limit: None,
        }
    }
}

impl SolveLimits {
    pub fn with_time_limit(time_limit: Duration) -> Self {
        Self {
            time_limit,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), LimitsError> {
        if self.time_limit.is_zero() {
            return Err(LimitsError::Budget);
        }
        if !(self.gap >= 0.0) {
            return Err(LimitsError::Gap);
        }
        if !(self.int_tol > 0.0 && self.int_tol < 0.5) {
            return Err(LimitsError::IntTol);
        }
        Ok(())
    }
}
