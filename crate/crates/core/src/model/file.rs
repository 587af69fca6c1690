//! JSON solution files: status, bounds, cost breakdown and every variable
//! family keyed by 1-based indices.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{CostBreakdown, Plan, VarMap, VarRef};
use crate::milp::SolveStatus;

pub const SOLUTION_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleValue {
    pub product: usize,
    pub machine: usize,
    pub subperiod: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcValue {
    pub from: usize,
    pub to: usize,
    pub machine: usize,
    pub subperiod: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodValue {
    pub product: usize,
    pub period: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub format: u32,
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub best_bound: Option<f64>,
    pub breakdown: Option<CostBreakdown>,
    pub q: Vec<TripleValue>,
    pub x: Vec<TripleValue>,
    pub y: Vec<ArcValue>,
    pub inventory: Vec<PeriodValue>,
    pub backorder: Vec<PeriodValue>,
}

#[derive(Debug, thiserror::Error)]
pub enum SolutionFileError {
    #[error("malformed solution file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported solution format {0}")]
    Format(u32),
    #[error("solution has status {0} and carries no schedule")]
    NoPoint(SolveStatus),
    #[error("solution does not match the instance: {0}")]
    Mismatch(String),
}

#[derive(PartialEq, Eq, Hash)]
enum Key {
    Q(usize, usize, usize),
    X(usize, usize, usize),
    Y(usize, usize, usize, usize),
    Plus(usize, usize),
    Minus(usize, usize),
}

fn key_of(r: VarRef) -> Key {
    match r {
        VarRef::Q(t) => Key::Q(t.product + 1, t.machine + 1, t.subperiod + 1),
        VarRef::X(t) => Key::X(t.product + 1, t.machine + 1, t.subperiod + 1),
        VarRef::Y {
            from,
            to,
            machine,
            subperiod,
        } => Key::Y(from + 1, to + 1, machine + 1, subperiod + 1),
        VarRef::InvPlus { product, period } => Key::Plus(product + 1, period + 1),
        VarRef::InvMinus { product, period } => Key::Minus(product + 1, period + 1),
    }
}

impl SolutionFile {
    pub fn from_plan(vm: &VarMap, plan: &Plan) -> Self {
        let mut out = SolutionFile {
            format: SOLUTION_FORMAT,
            status: plan.status,
            objective: plan.objective(),
            best_bound: plan.best_bound,
            breakdown: plan.breakdown,
            q: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
            inventory: Vec::new(),
            backorder: Vec::new(),
        };
        if plan.values.len() != vm.var_count() {
            return out;
        }
        for (k, &r) in vm.refs().iter().enumerate() {
            let value = plan.values[k];
            match r {
                VarRef::Q(t) => out.q.push(TripleValue {
                    product: t.product + 1,
                    machine: t.machine + 1,
                    subperiod: t.subperiod + 1,
                    value,
                }),
                VarRef::X(t) => out.x.push(TripleValue {
                    product: t.product + 1,
                    machine: t.machine + 1,
                    subperiod: t.subperiod + 1,
                    value,
                }),
                VarRef::Y {
                    from,
                    to,
                    machine,
                    subperiod,
                } => out.y.push(ArcValue {
                    from: from + 1,
                    to: to + 1,
                    machine: machine + 1,
                    subperiod: subperiod + 1,
                    value,
                }),
                VarRef::InvPlus { product, period } => out.inventory.push(PeriodValue {
                    product: product + 1,
                    period: period + 1,
                    value,
                }),
                VarRef::InvMinus { product, period } => out.backorder.push(PeriodValue {
                    product: product + 1,
                    period: period + 1,
                    value,
                }),
            }
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self, SolutionFileError> {
        let file: SolutionFile = serde_json::from_str(text)?;
        if file.format != SOLUTION_FORMAT {
            return Err(SolutionFileError::Format(file.format));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("solution serializes");
        s.push('\n');
        s
    }

    /// Values by model variable id. Every variable of the instance must be
    /// present exactly once and no foreign index may appear.
    pub fn to_values(&self, vm: &VarMap) -> Result<Vec<f64>, SolutionFileError> {
        if !self.status.has_solution() {
            return Err(SolutionFileError::NoPoint(self.status));
        }
        let index: HashMap<Key, usize> = vm
            .refs()
            .iter()
            .enumerate()
            .map(|(k, &r)| (key_of(r), k))
            .collect();
        let mut values = vec![f64::NAN; vm.var_count()];
        let mut put = |key: Key, value: f64, what: String| -> Result<(), SolutionFileError> {
            let k = *index
                .get(&key)
                .ok_or_else(|| SolutionFileError::Mismatch(format!("unknown variable {what}")))?;
            if !values[k].is_nan() {
                return Err(SolutionFileError::Mismatch(format!("duplicate variable {what}")));
            }
            values[k] = value;
            Ok(())
        };
        for e in &self.q {
            put(
                Key::Q(e.product, e.machine, e.subperiod),
                e.value,
                format!("q({},{},{})", e.product, e.machine, e.subperiod),
            )?;
        }
        for e in &self.x {
            put(
                Key::X(e.product, e.machine, e.subperiod),
                e.value,
                format!("x({},{},{})", e.product, e.machine, e.subperiod),
            )?;
        }
        for e in &self.y {
            put(
                Key::Y(e.from, e.to, e.machine, e.subperiod),
                e.value,
                format!("y({},{},{},{})", e.from, e.to, e.machine, e.subperiod),
            )?;
        }
        for e in &self.inventory {
            put(
                Key::Plus(e.product, e.period),
                e.value,
                format!("I+({},{})", e.product, e.period),
            )?;
        }
        for e in &self.backorder {
            put(
                Key::Minus(e.product, e.period),
                e.value,
                format!("I-({},{})", e.product, e.period),
            )?;
        }
        if let Some(k) = values.iter().position(|v| v.is_nan()) {
            return Err(SolutionFileError::Mismatch(format!(
                "missing variable {}",
                vm.refs()[k]
            )));
        }
        Ok(values)
    }
}
