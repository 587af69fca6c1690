//! Generic MILP layer: model container, LP relaxation, branch-and-bound,
//! relax-and-fix stage bounds and the solver backend interface.

mod bnb;
mod lp;
pub mod lpfile;
mod model;
mod solution;
mod stage;

pub use bnb::solve_milp;
pub use lp::{solve_lp, LP_FEASIBILITY_TOL};
pub use lpfile::write_lp;
pub use model::{Constraint, MilpModel, ModelError, Sense, VarId, VarKind, Variable};
pub use solution::{LimitsError, Solution, SolveLimits, SolveStatus};
pub use stage::{apply_stage_bounds, StageBounds, StageError, XState};

/// A MILP solver: model and limits in, solution out. Implementations must not
/// mutate shared state, so distinct models can be solved concurrently.
pub trait MilpBackend: Send + Sync {
    fn name(&self) -> &str;

    fn solve(&self, model: &MilpModel, limits: &SolveLimits) -> Solution;
}

/// The embedded LP-based branch-and-bound engine.
#[derive(Debug, Clone, Copy, Default)]
pub struct BranchAndBound;

impl MilpBackend for BranchAndBound {
    fn name(&self) -> &str {
        "embedded-bnb"
    }

    fn solve(&self, model: &MilpModel, limits: &SolveLimits) -> Solution {
        solve_milp(model, limits)
    }
}

/// Installs a panic hook that silences panics raised inside the LP solver. The engine
/// catches those and recovers, so the default message is noise; any other
/// panic still goes to the previous hook.
pub fn quiet_solver_panics() {
    let previous = std::panic::take_hook();
    std::panic::set_hook(Box::new(move |info| {
        let from_solver = info
            .location()
            .is_some_and(|loc| loc.file().contains("microlp"));
        if from_solver {
            log::debug!("recovered solver panic: {info}");
        } else {
            previous(info);
        }
    }));
}
