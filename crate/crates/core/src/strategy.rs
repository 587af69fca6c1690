//! Orderings of the setup-state triples used to partition them into
//! relax-and-fix stages.
//!
//! Every ordering is total: a strategy's primary key, then the first
//! tie-break (S11 influence, or static S10 distances to integrality, both
//! decreasing), then lexicographic `(i, l, s)`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::instance::{IndexTriple, Instance};
use crate::model::VarMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
    S8,
    S9,
    S10,
    S11,
}

impl Strategy {
    pub const ALL: [Strategy; 11] = [
        Strategy::S1,
        Strategy::S2,
        Strategy::S3,
        Strategy::S4,
        Strategy::S5,
        Strategy::S6,
        Strategy::S7,
        Strategy::S8,
        Strategy::S9,
        Strategy::S10,
        Strategy::S11,
    ];

    /// S10 and S11 are standalone, problem-independent strategies.
    pub fn is_problem_dependent(self) -> bool {
        !matches!(self, Strategy::S10 | Strategy::S11)
    }

    pub fn number(self) -> usize {
        Strategy::ALL.iter().position(|&s| s == self).unwrap() + 1
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.number())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let number: usize = lower
            .strip_prefix('s')
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| format!("unknown strategy {s:?} (expected s1..s11)"))?;
        Strategy::ALL
            .get(number.wrapping_sub(1))
            .copied()
            .ok_or_else(|| format!("unknown strategy {s:?} (expected s1..s11)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum TieBreak {
    S10,
    #[default]
    S11,
}

impl fmt::Display for TieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieBreak::S10 => "s10",
            TieBreak::S11 => "s11",
        })
    }
}

impl FromStr for TieBreak {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "s10" => Ok(TieBreak::S10),
            "s11" => Ok(TieBreak::S11),
            _ => Err(format!("unknown tie-break {s:?} (expected s10 or s11)")),
        }
    }
}

/// A strategy with its first tie-break. The tie-break is ignored by the
/// standalone strategies S10 and S11.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrategyId {
    pub strategy: Strategy,
    pub tiebreak: TieBreak,
}

impl StrategyId {
    pub fn new(strategy: Strategy, tiebreak: TieBreak) -> Self {
        Self { strategy, tiebreak }
    }

    /// Whether ordering needs distances from the initial LP relaxation.
    pub fn needs_lp_scores(&self) -> bool {
        match self.strategy {
            Strategy::S10 => true,
            Strategy::S11 => false,
            _ => self.tiebreak == TieBreak::S10,
        }
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.strategy.is_problem_dependent() {
            write!(f, "{}+{}", self.strategy, self.tiebreak)
        } else {
            write!(f, "{}", self.strategy)
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StrategyError {
    #[error("strategy {0} needs distances to integrality from an LP relaxation")]
    MissingLpScores(StrategyId),
    #[error("expected {expected} LP scores, got {got}")]
    ScoreCount { expected: usize, got: usize },
    #[error("cannot split {total} triples into {k} subsets")]
    BadSubsetCount { total: usize, k: usize },
    #[error("no value for setup state {0}")]
    MissingValue(IndexTriple),
}

/// Demand `d_i` summed over the horizon.
pub fn product_demand(inst: &Instance, i: usize) -> f64 {
    (0..inst.periods()).map(|t| inst.demand(i, t)).sum()
}

/// Flexibility `f_i`: number of machines able to produce `i`.
pub fn product_flexibility(inst: &Instance, i: usize) -> usize {
    inst.machines_of(i).len()
}

/// Gap between the two smallest processing times of `i`; `+inf` when only
/// one machine can produce it.
pub fn product_discrepancy(inst: &Instance, i: usize) -> f64 {
    let mut times: Vec<f64> = inst
        .machines_of(i)
        .iter()
        .map(|&l| inst.proc_time(i, l).expect("eligible"))
        .collect();
    if times.len() < 2 {
        return f64::INFINITY;
    }
    times.sort_by(f64::total_cmp);
    times[1] - times[0]
}

/// Criticality `m - min f_i` over the machine's eligible products.
pub fn machine_criticality(inst: &Instance, l: usize) -> usize {
    let min_flex = inst
        .eligible(l)
        .iter()
        .map(|&i| product_flexibility(inst, i))
        .min()
        .expect("machines have at least one eligible product");
    inst.machines() - min_flex
}

/// Average of processing time plus unit production cost over the machine's
/// eligible products (hours and cost units are added as they stand).
pub fn machine_efficiency(inst: &Instance, l: usize) -> f64 {
    let mp = inst.machine(l);
    let sum: f64 = mp
        .proc_time
        .iter()
        .zip(&mp.prod_cost)
        .map(|(p, c)| p + c)
        .sum();
    sum / mp.len() as f64
}

/// Total demand `delta_t` of period `t`.
pub fn period_demand(inst: &Instance, t: usize) -> f64 {
    (0..inst.products()).map(|i| inst.demand(i, t)).sum()
}

/// Influence of `x(i, l, .)`: outgoing setup costs plus unit production cost.
/// Returns `None` for a non-eligible pair.
pub fn influence(inst: &Instance, i: usize, l: usize) -> Option<f64> {
    let mp = inst.machine(l);
    let a = mp.local_index(i)?;
    let setups: f64 = (0..mp.len()).map(|b| mp.setup_cost(a, b)).sum();
    Some(setups + mp.prod_cost[a])
}

/// Distance to integrality `min(v, 1 - v)` of each requested x-position.
pub fn fractional_distance(
    values: &[f64],
    vm: &VarMap,
    remaining: &[usize],
) -> Result<Vec<f64>, StrategyError> {
    remaining
        .iter()
        .map(|&k| {
            let v = vm
                .x_ids()
                .get(k)
                .and_then(|id| values.get(id.0))
                .copied()
                .filter(|v| v.is_finite())
                .ok_or(StrategyError::MissingValue(vm.triples()[k.min(vm.triples().len() - 1)]))?;
            Ok(v.min(1.0 - v).clamp(0.0, 0.5))
        })
        .collect()
}

/// All ordering metrics of an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub demand: Vec<f64>,
    pub flexibility: Vec<usize>,
    pub discrepancy: Vec<f64>,
    pub criticality: Vec<usize>,
    pub efficiency: Vec<f64>,
    pub period_demand: Vec<f64>,
    /// `[product][machine]`, `None` off the eligible pairs.
    pub influence: Vec<Vec<Option<f64>>>,
}

impl MetricTable {
    pub fn compute(inst: &Instance) -> Self {
        let n = inst.products();
        let m = inst.machines();
        Self {
            demand: (0..n).map(|i| product_demand(inst, i)).collect(),
            flexibility: (0..n).map(|i| product_flexibility(inst, i)).collect(),
            discrepancy: (0..n).map(|i| product_discrepancy(inst, i)).collect(),
            criticality: (0..m).map(|l| machine_criticality(inst, l)).collect(),
            efficiency: (0..m).map(|l| machine_efficiency(inst, l)).collect(),
            period_demand: (0..inst.periods()).map(|t| period_demand(inst, t)).collect(),
            influence: (0..n)
                .map(|i| (0..m).map(|l| influence(inst, i, l)).collect())
                .collect(),
        }
    }

    pub fn influence_of(&self, t: IndexTriple) -> f64 {
        self.influence[t.product][t.machine].expect("eligible")
    }
}

/// Ascending sort key of the strategy's primary criterion.
fn primary_key(inst: &Instance, metrics: &MetricTable, strategy: Strategy, t: IndexTriple) -> [f64; 2] {
    let period = inst.period_of(t.machine, t.subperiod);
    match strategy {
        Strategy::S1 => [period as f64, t.subperiod as f64],
        Strategy::S2 => [-metrics.period_demand[period], t.subperiod as f64],
        Strategy::S3 => [-metrics.demand[t.product], 0.0],
        Strategy::S4 => [metrics.demand[t.product], 0.0],
        Strategy::S5 => [metrics.flexibility[t.product] as f64, 0.0],
        Strategy::S6 => [-metrics.discrepancy[t.product], 0.0],
        Strategy::S7 => [metrics.efficiency[t.machine], 0.0],
        Strategy::S8 => [-metrics.efficiency[t.machine], 0.0],
        Strategy::S9 => [-(metrics.criticality[t.machine] as f64), 0.0],
        Strategy::S10 | Strategy::S11 => [0.0, 0.0],
    }
}

fn cmp_keys(a: &[f64; 2], b: &[f64; 2]) -> Ordering {
    a[0].total_cmp(&b[0]).then_with(|| a[1].total_cmp(&b[1]))
}

/// Orders the triple universe under `id`. `lp_scores` are distances to
/// integrality in universe order and are required exactly when
/// [`StrategyId::needs_lp_scores`] holds.
pub fn order_triples(
    inst: &Instance,
    metrics: &MetricTable,
    id: StrategyId,
    lp_scores: Option<&[f64]>,
) -> Result<Vec<IndexTriple>, StrategyError> {
    let universe = inst.triple_universe();
    let scores = match (id.needs_lp_scores(), lp_scores) {
        (true, None) => return Err(StrategyError::MissingLpScores(id)),
        (true, Some(s)) if s.len() != universe.len() => {
            return Err(StrategyError::ScoreCount {
                expected: universe.len(),
                got: s.len(),
            })
        }
        (true, Some(s)) => Some(s),
        (false, _) => None,
    };
    // Keys: primary, first tie-break (negated for decreasing order); the
    // lexicographic fallback is the universe position itself.
    let mut keyed: Vec<([f64; 2], f64, usize)> = universe
        .iter()
        .enumerate()
        .map(|(pos, &t)| {
            let primary = primary_key(inst, metrics, id.strategy, t);
            let secondary = match (id.strategy, id.tiebreak) {
                (Strategy::S10, _) => -scores.expect("checked")[pos],
                (Strategy::S11, _) | (_, TieBreak::S11) => -metrics.influence_of(t),
                (_, TieBreak::S10) => -scores.expect("checked")[pos],
            };
            (primary, secondary, pos)
        })
        .collect();
    keyed.sort_by(|a, b| {
        cmp_keys(&a.0, &b.0)
            .then_with(|| a.1.total_cmp(&b.1))
            .then_with(|| a.2.cmp(&b.2))
    });
    Ok(keyed.into_iter().map(|(_, _, pos)| universe[pos]).collect())
}

/// Subset sizes for splitting `total` items into `k` parts: the first
/// `total mod k` parts get one extra element.
pub fn subset_sizes(total: usize, k: usize) -> Result<Vec<usize>, StrategyError> {
    if k == 0 || k > total {
        return Err(StrategyError::BadSubsetCount { total, k });
    }
    let base = total / k;
    let r = total - k * base;
    Ok((0..k).map(|j| if j < r { base + 1 } else { base }).collect())
}

/// `K` disjoint consecutive subsets of an ordered triple list.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    subsets: Vec<Vec<IndexTriple>>,
}

impl Partition {
    pub fn subsets(&self) -> &[Vec<IndexTriple>] {
        &self.subsets
    }

    pub fn k(&self) -> usize {
        self.subsets.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.subsets.iter().map(Vec::len).collect()
    }
}

pub fn make_partition(ordered: Vec<IndexTriple>, k: usize) -> Result<Partition, StrategyError> {
    let sizes = subset_sizes(ordered.len(), k)?;
    let mut rest = ordered.into_iter();
    let subsets = sizes
        .into_iter()
        .map(|size| rest.by_ref().take(size).collect())
        .collect();
    Ok(Partition { subsets })
}
