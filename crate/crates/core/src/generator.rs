//! Seeded random instances for the five benchmark groups, plus tiny instances
//! small enough for exhaustive enumeration.
//!
//! Each parameter family draws from its own ChaCha8 stream derived from the
//! seed, so adding a family never changes the draws of the others.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::instance::{Instance, InstanceError, InstanceParts, MachineProducts};

/// Bumped whenever a change alters the instances produced for a given seed.
pub const GENERATOR_VERSION: u32 = 1;

pub const PERIODS: usize = 16;
pub const SUBPERIODS: usize = 7;
pub const MACHINE_HOURS: f64 = 160.0;
/// Hours of labour in one working shift.
pub const SHIFT_HOURS: f64 = 8.0;
pub const DEMAND_SHARE: (f64, f64) = (0.05, 0.9);
pub const BACKORDER_FACTOR: (f64, f64) = (10.0, 15.0);
pub const PROD_COST_FACTOR: (f64, f64) = (0.8, 1.2);

const MAX_ELIGIBILITY_DRAWS: usize = 1000;

mod stream {
    pub const ELIGIBILITY: u64 = 1;
    pub const PERIOD_DEMAND: u64 = 2;
    pub const DEMAND_SHARE: u64 = 3;
    pub const WAREHOUSE: u64 = 4;
    pub const HOLDING: u64 = 5;
    pub const BACKORDER: u64 = 6;
    pub const PROC_TIME: u64 = 7;
    pub const PROD_COST: u64 = 8;
    pub const MIN_LOT: u64 = 9;
    pub const SETUP_TIME: u64 = 10;
    pub const SETUP_COST: u64 = 11;
    pub const INIT_INVENTORY: u64 = 12;
    pub const INIT_BACKORDER: u64 = 13;
    pub const MICRO: u64 = 100;
}

fn rng_for(seed: u64, family: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(family);
    rng
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    A,
    B,
    C,
    D,
    E,
}

impl Group {
    pub const ALL: [Group; 5] = [Group::A, Group::B, Group::C, Group::D, Group::E];

    pub fn spec(self) -> GroupSpec {
        GroupSpec::of(self)
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Group::A),
            "B" => Ok(Group::B),
            "C" => Ok(Group::C),
            "D" => Ok(Group::D),
            "E" => Ok(Group::E),
            _ => Err(format!("unknown group {s:?} (expected A..E)")),
        }
    }
}

/// Generation ranges of one group. Quantities are in units (the thousand-unit
/// table entries are already multiplied out).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    pub group: Group,
    pub m: usize,
    pub n: usize,
    pub eligible: (usize, usize),
    pub period_demand: (f64, f64),
    pub warehouse: (f64, f64),
    pub holding: (f64, f64),
    pub proc_time: (f64, f64),
    /// Working shifts.
    pub min_lot_shifts: (f64, f64),
    pub setup_time: (f64, f64),
    pub setup_cost_scale: (f64, f64),
    pub init_inventory: (f64, f64),
    pub init_backorder: (f64, f64),
}

impl GroupSpec {
    pub fn of(group: Group) -> Self {
        let k = 1000.0;
        match group {
            Group::A => GroupSpec {
                group,
                m: 2,
                n: 8,
                eligible: (5, 8),
                period_demand: (9.0 * k, 13.0 * k),
                warehouse: (10.0 * k, 14.0 * k),
                holding: (0.27, 0.54),
                proc_time: (0.012, 0.04),
                min_lot_shifts: (1.0, 9.0),
                setup_time: (2.0, 6.0),
                setup_cost_scale: (80.0, 100.0),
                init_inventory: (0.0, 4000.0),
                init_backorder: (0.0, 500.0),
            },
            Group::B => GroupSpec {
                group,
                m: 3,
                n: 12,
                eligible: (3, 9),
                period_demand: (16.0 * k, 24.0 * k),
                warehouse: (14.0 * k, 18.0 * k),
                holding: (0.02, 0.034),
                proc_time: (0.008, 0.05),
                min_lot_shifts: (3.0, 6.0),
                setup_time: (5.0, 9.0),
                setup_cost_scale: (100.0, 200.0),
                init_inventory: (0.0, 4000.0),
                init_backorder: (0.0, 500.0),
            },
            Group::C => GroupSpec {
                group,
                m: 4,
                n: 16,
                eligible: (4, 10),
                period_demand: (19.0 * k, 78.0 * k),
                warehouse: (40.0 * k, 48.0 * k),
                holding: (0.03, 0.08),
                proc_time: (0.007, 0.017),
                min_lot_shifts: (3.0, 6.0),
                setup_time: (2.0, 6.0),
                setup_cost_scale: (100.0, 200.0),
                init_inventory: (0.0, 20000.0),
                init_backorder: (0.0, 2000.0),
            },
            Group::D => GroupSpec {
                group,
                m: 5,
                n: 20,
                eligible: (5, 12),
                period_demand: (27.0 * k, 220.0 * k),
                warehouse: (180.0 * k, 220.0 * k),
                holding: (0.07, 0.21),
                proc_time: (0.003, 0.01),
                min_lot_shifts: (6.0, 9.0),
                setup_time: (1.0, 6.0),
                setup_cost_scale: (230.0, 1200.0),
                init_inventory: (0.0, 50000.0),
                init_backorder: (0.0, 4000.0),
            },
            Group::E => GroupSpec {
                group,
                m: 7,
                n: 28,
                eligible: (2, 12),
                period_demand: (65.0 * k, 100.0 * k),
                warehouse: (120.0 * k, 150.0 * k),
                holding: (0.087, 0.433),
                proc_time: (0.005, 0.028),
                min_lot_shifts: (3.0, 6.0),
                setup_time: (2.0, 8.0),
                setup_cost_scale: (150.0, 620.0),
                init_inventory: (0.0, 30000.0),
                init_backorder: (0.0, 4000.0),
            },
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GenerateError {
    #[error("no eligibility pattern covering every product after {0} draws")]
    Eligibility(usize),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Draws eligible product sets: a size per machine, then products without
/// replacement, then each orphan product goes to a random machine still below
/// the size cap. Re-draws when no such machine is left.
fn draw_eligibility(
    rng: &mut ChaCha8Rng,
    m: usize,
    n: usize,
    (lo, hi): (usize, usize),
) -> Result<Vec<Vec<usize>>, GenerateError> {
    let hi = hi.min(n);
    let lo = lo.min(hi).max(1);
    'draw: for _ in 0..MAX_ELIGIBILITY_DRAWS {
        let mut sets: Vec<Vec<usize>> = (0..m)
            .map(|_| {
                let size = rng.gen_range(lo..=hi);
                sample(rng, n, size).into_vec()
            })
            .collect();
        let mut covered = vec![false; n];
        for set in &sets {
            for &i in set {
                covered[i] = true;
            }
        }
        for i in 0..n {
            if covered[i] {
                continue;
            }
            let open: Vec<usize> = (0..m).filter(|&l| sets[l].len() < hi).collect();
            if open.is_empty() {
                continue 'draw;
            }
            let l = open[rng.gen_range(0..open.len())];
            sets[l].push(i);
        }
        for set in &mut sets {
            set.sort_unstable();
        }
        return Ok(sets);
    }
    Err(GenerateError::Eligibility(MAX_ELIGIBILITY_DRAWS))
}

/// Scales `stock` down proportionally until its sum fits in `capacity`.
fn fit_to_capacity(stock: &mut [f64], capacity: f64) {
    let stored: f64 = stock.iter().sum();
    if stored <= capacity {
        return;
    }
    let mut factor = capacity / stored;
    // Rounding can leave the scaled sum an ulp above the capacity.
    while stock.iter().map(|v| v * factor).sum::<f64>() > capacity {
        factor *= 1.0 - f64::EPSILON;
    }
    stock.iter_mut().for_each(|v| *v *= factor);
}

/// A random instance of `spec` for `seed`.
pub fn generate_instance(spec: &GroupSpec, seed: u64) -> Result<Instance, GenerateError> {
    let (m, n, periods) = (spec.m, spec.n, PERIODS);
    let eligible = draw_eligibility(&mut rng_for(seed, stream::ELIGIBILITY), m, n, spec.eligible)?;

    let mut rng = rng_for(seed, stream::PERIOD_DEMAND);
    let period_demand: Vec<f64> = (0..periods).map(|_| draw(&mut rng, spec.period_demand)).collect();
    let mut rng = rng_for(seed, stream::DEMAND_SHARE);
    let share: Vec<f64> = (0..n).map(|_| draw(&mut rng, DEMAND_SHARE)).collect();
    let share_sum: f64 = share.iter().sum();
    let demand: Vec<Vec<f64>> = share
        .iter()
        .map(|s| period_demand.iter().map(|d| d * s / share_sum).collect())
        .collect();

    let warehouse_capacity = draw(&mut rng_for(seed, stream::WAREHOUSE), spec.warehouse);
    let mut rng = rng_for(seed, stream::HOLDING);
    let holding_cost: Vec<f64> = (0..n).map(|_| draw(&mut rng, spec.holding)).collect();
    let mut rng = rng_for(seed, stream::BACKORDER);
    let backorder_cost: Vec<f64> = holding_cost
        .iter()
        .map(|h| draw(&mut rng, BACKORDER_FACTOR) * h)
        .collect();

    let mut proc_rng = rng_for(seed, stream::PROC_TIME);
    let mut cost_rng = rng_for(seed, stream::PROD_COST);
    let mut lot_rng = rng_for(seed, stream::MIN_LOT);
    let mut setup_rng = rng_for(seed, stream::SETUP_TIME);
    let mut blocks = Vec::with_capacity(m);
    for products in eligible {
        let k = products.len();
        let proc_time: Vec<f64> = (0..k).map(|_| draw(&mut proc_rng, spec.proc_time)).collect();
        let prod_cost = proc_time
            .iter()
            .map(|p| draw(&mut cost_rng, PROD_COST_FACTOR) * p)
            .collect();
        let min_lot = proc_time
            .iter()
            .map(|p| (SHIFT_HOURS * draw(&mut lot_rng, spec.min_lot_shifts) / p).floor())
            .collect();
        let mut setup_time = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                if a != b {
                    setup_time[a * k + b] = draw(&mut setup_rng, spec.setup_time);
                }
            }
        }
        blocks.push(MachineProducts {
            products,
            proc_time,
            prod_cost,
            min_lot,
            setup_cost: vec![0.0; k * k],
            setup_time,
            init_setup: vec![false; k],
        });
    }

    // Mean over the drawn (off-diagonal) setup times of all machines.
    let (sum, count) = blocks.iter().fold((0.0, 0usize), |(s, c), b| {
        let k = b.len();
        (s + b.setup_time.iter().sum::<f64>(), c + k * (k - 1))
    });
    let mean_setup = if count > 0 { sum / count as f64 } else { 1.0 };
    let mut rng = rng_for(seed, stream::SETUP_COST);
    for b in &mut blocks {
        let k = b.len();
        for a in 0..k {
            for c in 0..k {
                if a != c {
                    let e = b.setup_time[a * k + c];
                    b.setup_cost[a * k + c] = draw(&mut rng, spec.setup_cost_scale) * e / mean_setup;
                }
            }
        }
    }

    let mut rng = rng_for(seed, stream::INIT_INVENTORY);
    let mut init_inventory: Vec<f64> = (0..n).map(|_| draw(&mut rng, spec.init_inventory)).collect();
    fit_to_capacity(&mut init_inventory, warehouse_capacity);
    let mut rng = rng_for(seed, stream::INIT_BACKORDER);
    let init_backorder = (0..n).map(|_| draw(&mut rng, spec.init_backorder)).collect();

    Ok(Instance::new(InstanceParts {
        machines: m,
        products: n,
        periods,
        subperiods: vec![vec![SUBPERIODS; periods]; m],
        warehouse_capacity,
        machine_capacity: vec![vec![MACHINE_HOURS; periods]; m],
        demand,
        holding_cost,
        backorder_cost,
        init_inventory,
        init_backorder,
        machine_products: blocks,
    })?)
}

/// A tiny instance (m <= 2, n <= 3, T <= 2, w <= 2) meant for exhaustive
/// enumeration. Unlike the group generator, machines may start configured.
pub fn generate_micro(seed: u64) -> Instance {
    let mut rng = rng_for(seed, stream::MICRO);
    let m = rng.gen_range(1..=2);
    let n = rng.gen_range(2..=3);
    let periods = rng.gen_range(1..=2);
    let w = rng.gen_range(1..=2);
    let eligible = draw_eligibility(&mut rng, m, n, (2, n)).expect("caps never bind at n");
    let blocks = eligible
        .into_iter()
        .map(|products| {
            let k = products.len();
            let proc_time: Vec<f64> = (0..k).map(|_| draw(&mut rng, (0.5, 1.5))).collect();
            let prod_cost = (0..k).map(|_| draw(&mut rng, (1.0, 3.0))).collect();
            let min_lot = (0..k).map(|_| draw(&mut rng, (0.0, 20.0)).floor()).collect();
            let mut setup_time = vec![0.0; k * k];
            let mut setup_cost = vec![0.0; k * k];
            for a in 0..k {
                for b in 0..k {
                    if a != b {
                        setup_time[a * k + b] = draw(&mut rng, (1.0, 10.0));
                        setup_cost[a * k + b] = draw(&mut rng, (5.0, 50.0));
                    }
                }
            }
            let mut init_setup = vec![false; k];
            if rng.gen_bool(0.5) {
                init_setup[rng.gen_range(0..k)] = true;
            }
            MachineProducts {
                products,
                proc_time,
                prod_cost,
                min_lot,
                setup_time,
                setup_cost,
                init_setup,
            }
        })
        .collect();
    let warehouse_capacity = draw(&mut rng, (30.0, 150.0));
    let machine_capacity = (0..m)
        .map(|_| (0..periods).map(|_| draw(&mut rng, (40.0, 100.0))).collect())
        .collect();
    let demand = (0..n)
        .map(|_| (0..periods).map(|_| draw(&mut rng, (0.0, 60.0))).collect())
        .collect();
    let holding_cost: Vec<f64> = (0..n).map(|_| draw(&mut rng, (1.0, 3.0))).collect();
    let backorder_cost = holding_cost
        .iter()
        .map(|h| draw(&mut rng, BACKORDER_FACTOR) * h)
        .collect();
    let mut init_inventory: Vec<f64> = (0..n).map(|_| draw(&mut rng, (0.0, 20.0))).collect();
    fit_to_capacity(&mut init_inventory, warehouse_capacity);
    let init_backorder = (0..n).map(|_| draw(&mut rng, (0.0, 10.0))).collect();
    Instance::new(InstanceParts {
        machines: m,
        products: n,
        periods,
        subperiods: vec![vec![w; periods]; m],
        warehouse_capacity,
        machine_capacity,
        demand,
        holding_cost,
        backorder_cost,
        init_inventory,
        init_backorder,
        machine_products: blocks,
    })
    .expect("micro instances are valid by construction")
}
