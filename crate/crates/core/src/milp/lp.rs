//! LP relaxations through `microlp`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use microlp::{
    ComparisonOp, Error, LinearExpr, OptimizationDirection, Problem, ResumeOptions, SolveOptions,
    SolveOutcome,
};

use super::model::{MilpModel, Sense};
use super::solution::{Solution, SolveStatus};

/// Scaled row violation above which an LP point is rejected as a numerical
/// failure rather than reported optimal.
pub const LP_FEASIBILITY_TOL: f64 = 1e-6;

/// Longest stretch one simplex call runs before the caller's deadline is
/// looked at again. Every call made on a warm solution inherits it.
const SLICE: Duration = Duration::from_millis(200);

pub(crate) enum LpOutcome {
    Optimal(microlp::Solution),
    Infeasible,
    Unbounded,
    Failed,
    /// The deadline passed before the simplex finished.
    TimedOut,
}

/// Runs one LP call (a solve, fix or unfix) to completion in slices,
/// stopping once `deadline` has passed. Panics inside the solver count as
/// failures.
pub(crate) fn settle(
    call: impl FnOnce() -> Result<SolveOutcome, Error>,
    deadline: Option<Instant>,
) -> LpOutcome {
    let mut result = catch_unwind(AssertUnwindSafe(call));
    loop {
        let interrupted = match result {
            Err(_) => return LpOutcome::Failed,
            // An unbounded ray can come back as an "optimal" point with an
            // infinite objective.
            Ok(Ok(SolveOutcome::Solution(s))) if !s.objective().is_finite() => {
                return LpOutcome::Unbounded
            }
            Ok(Ok(SolveOutcome::Solution(s))) => return LpOutcome::Optimal(s),
            Ok(Ok(outcome @ SolveOutcome::Interrupted(_))) => outcome,
            Ok(Err(Error::Infeasible)) => return LpOutcome::Infeasible,
            Ok(Err(Error::Unbounded)) => return LpOutcome::Unbounded,
            Ok(Err(_)) => return LpOutcome::Failed,
        };
        let slice = match deadline {
            Some(d) => match d.checked_duration_since(Instant::now()) {
                Some(left) if !left.is_zero() => left.min(SLICE),
                _ => return LpOutcome::TimedOut,
            },
            None => SLICE,
        };
        let mut options = ResumeOptions::default();
        options.time_limit = Some(slice);
        result = catch_unwind(AssertUnwindSafe(move || interrupted.resume_with(options)));
    }
}

/// The LP relaxation of a model, ready to be solved and re-solved.
pub(crate) struct LpRelaxation {
    problem: Problem,
    vars: Vec<microlp::Variable>,
}

impl LpRelaxation {
    pub(crate) fn new(model: &MilpModel) -> Self {
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = model
            .vars()
            .iter()
            .map(|v| problem.add_var(v.objective, (v.lower, v.upper)))
            .collect();
        for row in model.rows() {
            let mut expr = LinearExpr::empty();
            for &(v, a) in &row.terms {
                expr.add(vars[v.0], a);
            }
            let op = match row.sense {
                Sense::Le => ComparisonOp::Le,
                Sense::Eq => ComparisonOp::Eq,
                Sense::Ge => ComparisonOp::Ge,
            };
            problem.add_constraint(expr, op, row.rhs);
        }
        Self { problem, vars }
    }

    pub(crate) fn var(&self, index: usize) -> microlp::Variable {
        self.vars[index]
    }

    pub(crate) fn solve(&self, deadline: Option<Instant>) -> LpOutcome {
        let mut options = SolveOptions::default();
        options.time_limit = Some(SLICE);
        settle(|| self.problem.solve_with(options), deadline)
    }

    pub(crate) fn values(&self, sol: &microlp::Solution) -> Vec<f64> {
        self.vars.iter().map(|&v| sol[v]).collect()
    }
}

/// Solves the LP relaxation of `model` (every binary relaxed to its bounds).
pub fn solve_lp(model: &MilpModel) -> Solution {
    let start = Instant::now();
    if model.var_count() == 0 {
        return Solution::without_point(SolveStatus::NumericalFailure, start.elapsed());
    }
    let lp = LpRelaxation::new(model);
    match lp.solve(None) {
        LpOutcome::Optimal(sol) => {
            let values = lp.values(&sol);
            if model.max_scaled_violation(&values) > LP_FEASIBILITY_TOL {
                return Solution::without_point(SolveStatus::NumericalFailure, start.elapsed());
            }
            let obj = model.objective_value(&values);
            Solution {
                status: SolveStatus::Optimal,
                values,
                objective: Some(obj),
                best_bound: Some(obj),
                nodes: 0,
                elapsed: start.elapsed(),
            }
        }
        LpOutcome::Infeasible => Solution::without_point(SolveStatus::Infeasible, start.elapsed()),
        LpOutcome::Unbounded => Solution::without_point(SolveStatus::Unbounded, start.elapsed()),
        LpOutcome::Failed | LpOutcome::TimedOut => {
            Solution::without_point(SolveStatus::NumericalFailure, start.elapsed())
        }
    }
}
