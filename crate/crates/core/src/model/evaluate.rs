use serde::{Deserialize, Serialize};

use super::VarMap;
use crate::instance::Instance;
use crate::milp::{Solution, SolveStatus};

/// The four cost components of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostBreakdown {
    pub inventory: f64,
    pub backorder: f64,
    pub setup: f64,
    pub production: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.inventory + self.backorder + self.setup + self.production
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EvalError {
    #[error("solution carries {got} values, the model has {expected} variables")]
    MissingValues { expected: usize, got: usize },
    #[error("value of {0} is not finite")]
    NonFinite(String),
    #[error("setup state {triple} = {value} is not integral")]
    Fractional { triple: String, value: f64 },
}

/// Computes the cost breakdown directly from instance data.
pub fn evaluate_objective(
    inst: &Instance,
    vm: &VarMap,
    values: &[f64],
) -> Result<CostBreakdown, EvalError> {
    if values.len() != vm.var_count() {
        return Err(EvalError::MissingValues {
            expected: vm.var_count(),
            got: values.len(),
        });
    }
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite(vm.refs()[k].to_string()));
    }
    let mut out = CostBreakdown::default();
    for i in 0..inst.products() {
        for t in 0..inst.periods() {
            out.inventory += inst.holding_cost(i) * values[vm.inv_plus(i, t).0];
            out.backorder += inst.backorder_cost(i) * values[vm.inv_minus(i, t).0];
        }
    }
    for l in 0..inst.machines() {
        let mp = inst.machine(l);
        let k = mp.len();
        for s in 0..inst.subperiod_count(l) {
            for a in 0..k {
                let q = vm.q(mp.products[a], l, s).expect("eligible");
                out.production += mp.prod_cost[a] * values[q.0];
                for b in 0..k {
                    out.setup += mp.setup_cost(a, b) * values[vm.y_local(l, a, b, s).0];
                }
            }
        }
    }
    Ok(out)
}

/// An integral schedule decoded from a solver point, with setups recomputed
/// from the setup states.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub status: SolveStatus,
    pub values: Vec<f64>,
    pub breakdown: Option<CostBreakdown>,
    pub best_bound: Option<f64>,
}

impl Plan {
    pub fn objective(&self) -> Option<f64> {
        self.breakdown.map(|b| b.total())
    }

    pub fn without_point(status: SolveStatus) -> Self {
        Self {
            status,
            values: Vec::new(),
            breakdown: None,
            best_bound: None,
        }
    }
}

/// Rounds the setup states of an integral solution to exact 0/1 and sets every
/// `y` to its smallest admissible value `max(0, x_prev + x - 1)`. Since setup
/// times and costs are nonnegative this never breaks feasibility nor raises
/// the cost. Fails if a setup state is farther than `int_tol` from an integer.
pub fn plan_from_solution(
    inst: &Instance,
    vm: &VarMap,
    sol: &Solution,
    int_tol: f64,
) -> Result<Plan, EvalError> {
    if !sol.status.has_solution() {
        return Ok(Plan {
            best_bound: sol.best_bound,
            ..Plan::without_point(sol.status)
        });
    }
    let mut values = sol.values.clone();
    if values.len() != vm.var_count() {
        return Err(EvalError::MissingValues {
            expected: vm.var_count(),
            got: values.len(),
        });
    }
    for (k, &id) in vm.x_ids().iter().enumerate() {
        let v = values[id.0];
        let r = v.round();
        if (v - r).abs() > int_tol || !(r == 0.0 || r == 1.0) {
            return Err(EvalError::Fractional {
                triple: vm.triples()[k].to_string(),
                value: v,
            });
        }
        values[id.0] = r;
    }
    for l in 0..inst.machines() {
        let mp = inst.machine(l);
        let k = mp.len();
        for s in 0..inst.subperiod_count(l) {
            for a in 0..k {
                let prev = if s == 0 {
                    f64::from(u8::from(mp.init_setup[a]))
                } else {
                    values[vm.x(mp.products[a], l, s - 1).expect("eligible").0]
                };
                for b in 0..k {
                    let cur = values[vm.x(mp.products[b], l, s).expect("eligible").0];
                    values[vm.y_local(l, a, b, s).0] = (prev + cur - 1.0).max(0.0);
                }
            }
        }
    }
    for v in values.iter_mut() {
        // LP noise around zero on nonnegative variables.
        if *v < 0.0 && *v > -1e-9 {
            *v = 0.0;
        }
    }
    let breakdown = evaluate_objective(inst, vm, &values)?;
    Ok(Plan {
        status: sol.status,
        values,
        breakdown: Some(breakdown),
        best_bound: sol.best_bound,
    })
}
