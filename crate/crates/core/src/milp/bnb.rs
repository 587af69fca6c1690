//! LP-based branch-and-bound.
//!
//! Nodes are stored as sorted fixing lists. A single warm LP state is moved
//! between nodes by unfixing and fixing the variables that differ, so a plunge
//! into a child costs one dual re-optimization. Selection is best-bound first;
//! until an incumbent exists the search plunges depth-first into the child on
//! the rounding side of the branching variable. A rounding dive from the root
//! supplies the first incumbent on models where plunging is too slow.
//!
//! LP calls run in short slices so the time limit holds even inside a
//! stalling simplex. A warm re-solve that reports a node infeasible or fails
//! is confirmed by a cold solve before the node is dropped.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use log::debug;

use super::lp::{settle, LpOutcome, LpRelaxation, LP_FEASIBILITY_TOL};
use super::model::{MilpModel, VarId, VarKind};
use super::solution::{Solution, SolveLimits, SolveStatus};

type Fixings = Vec<(usize, bool)>;

#[derive(Debug)]
struct Node {
    bound: f64,
    seq: u64,
    fixings: Fixings,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap is a max-heap: the smallest bound, then the oldest node, wins.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct WarmLp<'a> {
    lp: &'a LpRelaxation,
    root: microlp::Solution,
    current: Option<(microlp::Solution, Fixings)>,
    deadline: Instant,
}

enum NodeLp {
    Solved,
    Infeasible,
    Failed,
    TimedOut,
}

impl<'a> WarmLp<'a> {
    /// Brings the warm state to `target`. Leaves `current` set on success.
    fn move_to(&mut self, target: &Fixings) -> NodeLp {
        let (mut sol, mut have) = match self.current.take() {
            Some(state) => state,
            None => (self.root.clone(), Vec::new()),
        };
        let stale: Vec<usize> = have
            .iter()
            .filter(|f| target.binary_search(f).is_err())
            .map(|f| f.0)
            .collect();
        let missing: Vec<(usize, bool)> = target
            .iter()
            .filter(|f| have.binary_search(f).is_err())
            .copied()
            .collect();
        if stale.len() + missing.len() > target.len() {
            return self.apply(self.root.clone(), Vec::new(), target.clone());
        }
        for var in stale {
            let v = self.lp.var(var);
            sol = match settle(|| sol.unfix_var(v).map(|(o, _)| o), Some(self.deadline)) {
                LpOutcome::Optimal(s) => s,
                LpOutcome::TimedOut => return NodeLp::TimedOut,
                _ => return NodeLp::Failed,
            };
        }
        have.retain(|f| target.binary_search(f).is_ok());
        self.apply(sol, have, missing)
    }

    fn apply(&mut self, mut sol: microlp::Solution, mut have: Fixings, add: Fixings) -> NodeLp {
        for &(var, up) in &add {
            let v = self.lp.var(var);
            sol = match settle(|| sol.fix_var(v, f64::from(u8::from(up))), Some(self.deadline)) {
                LpOutcome::Optimal(s) => s,
                LpOutcome::Infeasible => return NodeLp::Infeasible,
                LpOutcome::TimedOut => return NodeLp::TimedOut,
                _ => return NodeLp::Failed,
            };
        }
        have.extend(add);
        have.sort_unstable();
        self.current = Some((sol, have));
        NodeLp::Solved
    }

    fn solution(&self) -> &microlp::Solution {
        &self.current.as_ref().expect("node solved").0
    }
}

/// Rounding dive from the root LP: each step fixes the least fractional
/// binary at its nearest value, retrying the opposite side when that makes
/// the LP infeasible. Warm failures are rechecked by a cold solve, which the
/// dive then continues from (it never unfixes). Returns an integral point or
/// gives up; the tree search does not depend on it.
fn dive(
    model: &MilpModel,
    lp: &LpRelaxation,
    root: &microlp::Solution,
    int_vars: &[usize],
    limits: &SolveLimits,
    deadline: Instant,
) -> Option<(f64, Vec<f64>)> {
    let mut sol = root.clone();
    let mut fixings: Fixings = Vec::new();
    loop {
        if Instant::now() >= deadline {
            return None;
        }
        fixings.sort_unstable();
        let mut pick: Option<(usize, bool, f64)> = None;
        for &k in int_vars {
            let v = sol[lp.var(k)];
            let frac = (v - v.round()).abs();
            if frac > limits.int_tol
                && pick.is_none_or(|(_, _, f)| frac < f)
                && fixings.binary_search_by_key(&k, |f| f.0).is_err()
            {
                pick = Some((k, v >= 0.5, frac));
            }
        }
        let Some((k, side, _)) = pick else {
            let mut values = lp.values(&sol);
            for &k in int_vars {
                values[k] = values[k].round();
            }
            if model.max_scaled_violation(&values) > LP_FEASIBILITY_TOL {
                debug!("dive: rounded point violates rows");
                return None;
            }
            return Some((model.objective_value(&values), values));
        };
        let mut next = None;
        for up in [side, !side] {
            let mut attempt = fixings.clone();
            attempt.push((k, up));
            let value = f64::from(u8::from(up));
            match settle(|| sol.clone().fix_var(lp.var(k), value), Some(deadline)) {
                LpOutcome::Optimal(s) => {
                    next = Some((s, attempt));
                    break;
                }
                LpOutcome::TimedOut => return None,
                _ => {}
            }
            attempt.sort_unstable();
            match cold_solve(model, &attempt, deadline) {
                LpOutcome::Optimal(s) => {
                    next = Some((s, attempt));
                    break;
                }
                LpOutcome::TimedOut => return None,
                _ => {}
            }
        }
        match next {
            Some((s, f)) => {
                sol = s;
                fixings = f;
            }
            None => {
                debug!("dive: both sides infeasible after {} fixings", fixings.len());
                return None;
            }
        }
    }
}

fn cold_solve(model: &MilpModel, fixings: &Fixings, deadline: Instant) -> LpOutcome {
    let mut fixed = model.clone();
    for &(var, up) in fixings {
        let v = fixed.var_mut(VarId(var));
        v.lower = if up { 1.0 } else { 0.0 };
        v.upper = v.lower;
    }
    LpRelaxation::new(&fixed).solve(Some(deadline))
}

fn insert_sorted(fixings: &Fixings, var: usize, up: bool) -> Fixings {
    let mut out = fixings.clone();
    let pos = out.partition_point(|f| f.0 < var);
    out.insert(pos, (var, up));
    out
}

/// Branch-and-bound over the binary variables of `model`.
pub fn solve_milp(model: &MilpModel, limits: &SolveLimits) -> Solution {
    let start = Instant::now();
    let finish = |status: SolveStatus| Solution::without_point(status, start.elapsed());
    if limits.validate().is_err() || model.validate().is_err() || model.var_count() == 0 {
        return finish(SolveStatus::NumericalFailure);
    }
    let int_vars: Vec<usize> = model
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary && v.lower < v.upper)
        .map(|(k, _)| k)
        .collect();
    for v in model.vars().iter().filter(|v| v.kind == VarKind::Binary) {
        // Fixed binaries must sit on an integer.
        if v.lower == v.upper && (v.lower - v.lower.round()).abs() > limits.int_tol {
            return finish(SolveStatus::Infeasible);
        }
    }

    let deadline = start + limits.time_limit;
    let lp = LpRelaxation::new(model);
    let root = match lp.solve(Some(deadline)) {
        LpOutcome::Optimal(sol) => sol,
        LpOutcome::Infeasible => return finish(SolveStatus::Infeasible),
        LpOutcome::Unbounded => return finish(SolveStatus::Unbounded),
        LpOutcome::Failed => return finish(SolveStatus::NumericalFailure),
        LpOutcome::TimedOut => return finish(SolveStatus::TimeLimitNoIncumbent),
    };
    let root_bound = root.objective();
    let mut warm = WarmLp {
        lp: &lp,
        root,
        current: None,
        deadline,
    };

    let tiny = 1e-9;
    let cutoff_for = |inc: f64| inc - (limits.gap * inc.abs()).max(tiny * inc.abs().max(1.0));

    let mut incumbent: Option<(f64, Vec<f64>)> =
        dive(model, &lp, &warm.root, &int_vars, limits, deadline);
    debug!(
        "dive over {} binaries: {:?} after {:?}",
        int_vars.len(),
        incumbent.as_ref().map(|i| i.0),
        start.elapsed()
    );
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut nodes = 0u64;
    let mut dive: Option<Node> = Some(Node {
        bound: root_bound,
        seq,
        fixings: Vec::new(),
    });
    let mut stopped_early = false;
    let mut numerical = false;

    loop {
        if start.elapsed() >= limits.time_limit
            || limits.node_limit.is_some_and(|cap| nodes >= cap)
        {
            stopped_early = true;
            break;
        }
        let node = match dive.take() {
            Some(n) => n,
            None => match heap.pop() {
                Some(n) => n,
                None => break,
            },
        };
        if let Some((inc, _)) = &incumbent {
            if node.bound >= cutoff_for(*inc) {
                continue;
            }
        }
        nodes += 1;
        // A warm verdict of infeasibility (or a failure) is confirmed by a
        // cold solve with the fixings applied as bounds.
        let cold;
        let verdict = match warm.move_to(&node.fixings) {
            NodeLp::Solved => None,
            NodeLp::TimedOut => Some(LpOutcome::TimedOut),
            NodeLp::Infeasible | NodeLp::Failed => {
                warm.current = None;
                Some(cold_solve(model, &node.fixings, deadline))
            }
        };
        let sol = match verdict {
            None => warm.solution(),
            Some(LpOutcome::Optimal(s)) => {
                cold = s;
                &cold
            }
            Some(LpOutcome::Infeasible) => continue,
            Some(LpOutcome::TimedOut) => {
                warm.current = None;
                heap.push(node);
                stopped_early = true;
                break;
            }
            Some(LpOutcome::Unbounded | LpOutcome::Failed) => {
                numerical = true;
                continue;
            }
        };
        let obj = sol.objective();
        if let Some((inc, _)) = &incumbent {
            if obj >= cutoff_for(*inc) {
                continue;
            }
        }

        // Most fractional binary; ties go to the lowest id.
        let mut branch: Option<(usize, f64)> = None;
        let mut best_frac = limits.int_tol;
        for &k in &int_vars {
            let v = sol[lp.var(k)];
            let frac = (v - v.floor()).min(v.ceil() - v);
            if frac > best_frac {
                best_frac = frac;
                branch = Some((k, v));
            }
        }

        match branch {
            None => {
                let mut values = lp.values(sol);
                for &k in &int_vars {
                    values[k] = values[k].round();
                }
                let value = model.objective_value(&values);
                if model.max_scaled_violation(&values) > LP_FEASIBILITY_TOL {
                    numerical = true;
                    continue;
                }
                if incumbent.as_ref().is_none_or(|(inc, _)| value < *inc) {
                    debug!("incumbent {value} after {nodes} nodes");
                    incumbent = Some((value, values));
                }
            }
            Some((k, v)) => {
                let down = Node {
                    bound: obj,
                    seq: seq + 1,
                    fixings: insert_sorted(&node.fixings, k, false),
                };
                let up = Node {
                    bound: obj,
                    seq: seq + 2,
                    fixings: insert_sorted(&node.fixings, k, true),
                };
                seq += 2;
                let (near, far) = if v >= 0.5 { (up, down) } else { (down, up) };
                if incumbent.is_none() {
                    heap.push(far);
                    dive = Some(near);
                } else {
                    heap.push(near);
                    heap.push(far);
                }
            }
        }

        if let Some((inc, _)) = &incumbent {
            let frontier = heap.peek().map(|n| n.bound);
            if frontier.is_none_or(|b| b >= cutoff_for(*inc)) && dive.is_none() {
                heap.clear();
                break;
            }
        }
    }

    let open_bound = heap
        .iter()
        .map(|n| n.bound)
        .chain(dive.iter().map(|n| n.bound))
        .fold(f64::INFINITY, f64::min);
    let elapsed = start.elapsed();
    debug!("branch-and-bound: {nodes} nodes in {elapsed:?}");
    match incumbent {
        Some((value, values)) => {
            let exhausted = !stopped_early || open_bound >= cutoff_for(value);
            let bound = if exhausted { value } else { open_bound.min(value) };
            Solution {
                status: if exhausted {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::Feasible
                },
                values,
                objective: Some(value),
                best_bound: Some(bound),
                nodes,
                elapsed,
            }
        }
        None => {
            let status = if stopped_early {
                SolveStatus::TimeLimitNoIncumbent
            } else if numerical {
                SolveStatus::NumericalFailure
            } else {
                SolveStatus::Infeasible
            };
            Solution {
                best_bound: open_bound.is_finite().then_some(open_bound),
                nodes,
                ..Solution::without_point(status, elapsed)
            }
        }
    }
}
