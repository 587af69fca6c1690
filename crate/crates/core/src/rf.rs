//! Relax-and-fix: the setup-state triples are split into `K` subsets; stage
//! `k` fixes the subsets before it at the previous incumbent, keeps subset `k`
//! binary and relaxes the rest.

use std::fmt;
use std::time::{Duration, Instant};

use log::info;
use serde::{Deserialize, Serialize};

use crate::instance::{IndexTriple, Instance};
use crate::milp::{
    apply_stage_bounds, solve_lp, BranchAndBound, MilpBackend, SolveLimits,
    SolveStatus, StageBounds, XState,
};
use crate::model::{build_model, check_feasibility, plan_from_solution, Plan, VarMap};
use crate::strategy::{
    fractional_distance, make_partition, order_triples, subset_sizes, MetricTable, Strategy,
    StrategyError, StrategyId,
};

/// Feasibility tolerance for revalidating a final schedule.
pub const FINAL_CHECK_TOL: f64 = 1e-6;

/// Splits `total` seconds over `k` stages with weights decreasing linearly
/// from 2 to 1, so the first stage gets twice the time of the last.
pub fn allocate_time_budgets(total: f64, k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![total],
        _ => {
            let weights: Vec<f64> = (0..k)
                .map(|j| 2.0 - j as f64 / (k - 1) as f64)
                .collect();
            let sum: f64 = weights.iter().sum();
            weights.iter().map(|w| total * w / sum).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RfConfig {
    pub strategy: StrategyId,
    pub k: usize,
    pub time_limit: Duration,
    /// Gap, tolerance and node settings for every stage; its time limit is
    /// replaced by the stage budget.
    pub limits: SolveLimits,
    pub rollover: bool,
}

impl RfConfig {
    pub fn new(strategy: StrategyId, k: usize, time_limit: Duration) -> Self {
        Self {
            strategy,
            k,
            time_limit,
            limits: SolveLimits::default(),
            rollover: true,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RfError {
    #[error("the number of stages must be at least 1")]
    NoStages,
    #[error("the time budget must be positive")]
    NoBudget,
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("invalid solver limits: {0}")]
    Limits(#[from] crate::milp::LimitsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "stage", rename_all = "kebab-case")]
pub enum TerminalStatus {
    Completed,
    InfeasibleAtStage(usize),
    TimeoutAtStage(usize),
    /// The solver failed numerically, or its output did not survive
    /// decoding and revalidation.
    FailedAtStage(usize),
}

impl TerminalStatus {
    pub fn is_completed(self) -> bool {
        self == TerminalStatus::Completed
    }
}

impl fmt::Display for TerminalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TerminalStatus::Completed => f.write_str("completed"),
            TerminalStatus::InfeasibleAtStage(k) => write!(f, "infeasible-at-stage({k})"),
            TerminalStatus::TimeoutAtStage(k) => write!(f, "timeout-at-stage({k})"),
            TerminalStatus::FailedAtStage(k) => write!(f, "failed-at-stage({k})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    pub size: usize,
    /// Share of the total budget, in seconds.
    pub allocated: f64,
    /// Seconds actually granted, including time rolled over.
    pub budget: f64,
    pub elapsed: f64,
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub best_bound: Option<f64>,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfReport {
    pub strategy: String,
    pub k: usize,
    pub time_limit: f64,
    pub rollover: bool,
    pub budgets: Vec<f64>,
    /// Seconds spent on the initial LP relaxation (strategies using S10).
    pub lp_time: f64,
    pub stages: Vec<StageReport>,
    pub terminal: TerminalStatus,
    pub objective: Option<f64>,
    pub best_bound: Option<f64>,
    pub elapsed: f64,
    #[serde(skip)]
    pub plan: Option<Plan>,
}

impl RfReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `instance,strategy,K,budget,status,objective,gap` with empty fields for
    /// missing values.
    pub fn summary_line(&self, instance: &str, reference: Option<f64>) -> String {
        let objective = self.objective.map(|v| format!("{v:.6}")).unwrap_or_default();
        let gap = match (self.objective, reference) {
            (Some(f), Some(r)) => crate::bench::gap_percent(f, r)
                .map(|g| format!("{g:.2}"))
                .unwrap_or_default(),
            _ => String::new(),
        };
        format!(
            "{instance},{},{},{},{},{objective},{gap}",
            self.strategy, self.k, self.time_limit, self.terminal
        )
    }
}

/// Relax-and-fix with the embedded branch-and-bound engine.
pub fn relax_and_fix(inst: &Instance, cfg: &RfConfig) -> Result<RfReport, RfError> {
    relax_and_fix_with(inst, cfg, &BranchAndBound)
}

struct RunState<'a> {
    inst: &'a Instance,
    vm: &'a VarMap,
    cfg: &'a RfConfig,
    start: Instant,
}

impl RunState<'_> {
    fn finish(
        &self,
        budgets: Vec<f64>,
        lp_time: f64,
        stages: Vec<StageReport>,
        terminal: TerminalStatus,
        plan: Option<Plan>,
    ) -> RfReport {
        let report = RfReport {
            strategy: self.cfg.strategy.to_string(),
            k: self.cfg.k,
            time_limit: self.cfg.time_limit.as_secs_f64(),
            rollover: self.cfg.rollover,
            budgets,
            lp_time,
            stages,
            terminal,
            objective: plan.as_ref().and_then(Plan::objective),
            best_bound: plan.as_ref().and_then(|p| p.best_bound),
            elapsed: self.start.elapsed().as_secs_f64(),
            plan,
        };
        info!(
            "relax-and-fix {} K={}: {} objective {:?}",
            report.strategy, report.k, report.terminal, report.objective
        );
        report
    }
}

pub fn relax_and_fix_with(
    inst: &Instance,
    cfg: &RfConfig,
    backend: &dyn MilpBackend,
) -> Result<RfReport, RfError> {
    let start = Instant::now();
    if cfg.k == 0 {
        return Err(RfError::NoStages);
    }
    if cfg.time_limit.is_zero() {
        return Err(RfError::NoBudget);
    }
    cfg.limits.validate()?;
    let total = inst.triple_count();
    let sizes = subset_sizes(total, cfg.k)?;
    let (model, vm) = build_model(inst);
    let run = RunState {
        inst,
        vm: &vm,
        cfg,
        start,
    };
    let budgets = allocate_time_budgets(cfg.time_limit.as_secs_f64(), cfg.k);

    // Distances to integrality at the LP relaxation; its time is charged to
    // the first stage.
    let mut lp_time = 0.0;
    let lp_scores = if cfg.strategy.needs_lp_scores() {
        let lp = solve_lp(&model);
        lp_time = lp.elapsed.as_secs_f64();
        match lp.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => {
                return Ok(run.finish(budgets, lp_time, Vec::new(), TerminalStatus::InfeasibleAtStage(1), None))
            }
            _ => {
                return Ok(run.finish(budgets, lp_time, Vec::new(), TerminalStatus::FailedAtStage(1), None))
            }
        }
        let all: Vec<usize> = (0..total).collect();
        Some(fractional_distance(&lp.values, &vm, &all)?)
    } else {
        None
    };

    let metrics = MetricTable::compute(inst);
    let dynamic = cfg.strategy.strategy == Strategy::S10;
    let mut pending: Vec<Vec<IndexTriple>> = if dynamic {
        Vec::new()
    } else {
        let ordered = order_triples(inst, &metrics, cfg.strategy, lp_scores.as_deref())?;
        make_partition(ordered, cfg.k)?.subsets().to_vec()
    };
    pending.reverse();

    let mut bounds = StageBounds::uniform(total, XState::Relaxed);
    let mut assigned = vec![false; total];
    let mut scores = lp_scores.unwrap_or_default();
    let mut stages = Vec::with_capacity(cfg.k);
    let mut carry = -lp_time;
    let mut stage_one_bound = None;
    let mut last = None;

    for (k, &size) in sizes.iter().enumerate() {
        let stage = k + 1;
        let subset: Vec<usize> = if dynamic {
            let mut free: Vec<usize> = (0..total).filter(|&j| !assigned[j]).collect();
            free.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
            free.truncate(size);
            free
        } else {
            pending
                .pop()
                .expect("one subset per stage")
                .into_iter()
                .map(|t| vm.triple_index(t).expect("universe triple"))
                .collect()
        };
        for &j in &subset {
            assigned[j] = true;
            bounds.set(j, XState::Integer);
        }

        let stage_model = apply_stage_bounds(&model, &vm, &bounds).expect("bounds cover the x family");
        let granted = (budgets[k] + carry).max(1e-3);
        let limits = SolveLimits {
            time_limit: Duration::from_secs_f64(granted),
            ..cfg.limits.clone()
        };
        let sol = backend.solve(&stage_model, &limits);
        let elapsed = sol.elapsed.as_secs_f64();
        stages.push(StageReport {
            stage,
            size,
            allocated: budgets[k],
            budget: granted,
            elapsed,
            status: sol.status,
            objective: sol.objective,
            best_bound: sol.best_bound,
            nodes: sol.nodes,
        });
        info!("stage {stage}/{}: {} in {elapsed:.2}s", cfg.k, sol.status);
        let terminal = match sol.status {
            SolveStatus::Optimal | SolveStatus::Feasible => None,
            SolveStatus::Infeasible => Some(TerminalStatus::InfeasibleAtStage(stage)),
            SolveStatus::TimeLimitNoIncumbent => Some(TerminalStatus::TimeoutAtStage(stage)),
            SolveStatus::Unbounded | SolveStatus::NumericalFailure => {
                Some(TerminalStatus::FailedAtStage(stage))
            }
        };
        if let Some(t) = terminal {
            return Ok(run.finish(budgets, lp_time, stages, t, None));
        }
        if stage == 1 {
            stage_one_bound = sol.best_bound;
        }
        carry = if cfg.rollover {
            (granted - elapsed).max(0.0)
        } else {
            0.0
        };

        for &j in &subset {
            let v = sol.values[vm.x_ids()[j].0];
            let r = v.round();
            if (v - r).abs() > cfg.limits.int_tol || !(r == 0.0 || r == 1.0) {
                return Ok(run.finish(budgets, lp_time, stages, TerminalStatus::FailedAtStage(stage), None));
            }
            bounds.set(j, XState::Fixed(r));
        }
        if dynamic && stage < cfg.k {
            let free: Vec<usize> = (0..total).filter(|&j| !assigned[j]).collect();
            let d = fractional_distance(&sol.values, &vm, &free)?;
            scores = vec![0.0; total];
            for (&j, v) in free.iter().zip(d) {
                scores[j] = v;
            }
        }
        last = Some(sol);
    }

    let sol = last.expect("at least one stage");
    let k = cfg.k;
    let mut plan = match plan_from_solution(run.inst, run.vm, &sol, cfg.limits.int_tol) {
        Ok(p) => p,
        Err(_) => return Ok(run.finish(budgets, lp_time, stages, TerminalStatus::FailedAtStage(k), None)),
    };
    if !check_feasibility(run.inst, run.vm, &plan.values, FINAL_CHECK_TOL).is_feasible() {
        return Ok(run.finish(budgets, lp_time, stages, TerminalStatus::FailedAtStage(k), None));
    }
    // Only the unpartitioned run can prove optimality; the first stage is a
    // relaxation of the full model, so its bound stays valid.
    if k > 1 {
        plan.status = SolveStatus::Feasible;
    }
    plan.best_bound = stage_one_bound.map(|b| b.min(plan.objective().unwrap_or(b)));
    Ok(run.finish(budgets, lp_time, stages, TerminalStatus::Completed, Some(plan)))
}

/// Direct solve of the full model.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectReport {
    pub plan: Plan,
    pub nodes: u64,
    pub elapsed: f64,
}

impl DirectReport {
    pub fn status(&self) -> SolveStatus {
        self.plan.status
    }
}

pub fn solve_direct(inst: &Instance, limits: &SolveLimits, backend: &dyn MilpBackend) -> DirectReport {
    let (model, vm) = build_model(inst);
    let sol = backend.solve(&model, limits);
    let failed = || Plan::without_point(SolveStatus::NumericalFailure);
    let plan = match plan_from_solution(inst, &vm, &sol, limits.int_tol) {
        Ok(p) if p.values.is_empty() => p,
        Ok(p) if check_feasibility(inst, &vm, &p.values, FINAL_CHECK_TOL).is_feasible() => p,
        _ => failed(),
    };
    DirectReport {
        plan,
        nodes: sol.nodes,
        elapsed: sol.elapsed.as_secs_f64(),
    }
}
