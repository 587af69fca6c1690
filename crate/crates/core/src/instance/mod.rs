//! Instance data model for lot sizing and scheduling on unrelated parallel
//! machines with sequence-dependent setups.
//!
//! All indices are 0-based in memory. The file format (see [`file`]) and every
//! user-facing label use 1-based indices.

pub mod file;

use std::fmt;
use std::ops::Range;

pub use file::{load_instance, save_instance, InstanceFile, INSTANCE_FORMAT};

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed instance file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported instance format {0} (expected {INSTANCE_FORMAT})")]
    Format(u32),
    #[error("invalid instance: {0}")]
    Invalid(String),
}

/// Per-machine parameter block. Pair parameters are stored aligned with
/// `products` (the eligible set of the machine, strictly increasing); setup
/// matrices are row-major `from * k + to` over the same local indices.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineProducts {
    pub products: Vec<usize>,
    pub proc_time: Vec<f64>,
    pub prod_cost: Vec<f64>,
    pub min_lot: Vec<f64>,
    pub setup_time: Vec<f64>,
    pub setup_cost: Vec<f64>,
    pub init_setup: Vec<bool>,
}

impl MachineProducts {
    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }

    pub fn local_index(&self, product: usize) -> Option<usize> {
        self.products.binary_search(&product).ok()
    }

    pub fn setup_time(&self, from: usize, to: usize) -> f64 {
        self.setup_time[from * self.len() + to]
    }

    pub fn setup_cost(&self, from: usize, to: usize) -> f64 {
        self.setup_cost[from * self.len() + to]
    }

    /// Local index of the product the machine is prepared for at time 0.
    pub fn initial_product(&self) -> Option<usize> {
        self.init_setup.iter().position(|&b| b)
    }
}

/// Raw, 0-based instance contents. Turned into an [`Instance`] by
/// [`Instance::new`], which validates every invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceParts {
    pub machines: usize,
    pub products: usize,
    pub periods: usize,
    /// `[machine][period]` number of subperiods.
    pub subperiods: Vec<Vec<usize>>,
    pub warehouse_capacity: f64,
    /// `[machine][period]` available hours.
    pub machine_capacity: Vec<Vec<f64>>,
    /// `[product][period]`.
    pub demand: Vec<Vec<f64>>,
    pub holding_cost: Vec<f64>,
    pub backorder_cost: Vec<f64>,
    pub init_inventory: Vec<f64>,
    pub init_backorder: Vec<f64>,
    pub machine_products: Vec<MachineProducts>,
}

/// A validated, immutable problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    parts: InstanceParts,
    machines_of: Vec<Vec<usize>>,
    /// `[machine][period]` first global subperiod (0-based).
    period_start: Vec<Vec<usize>>,
    /// `[machine][subperiod]` owning period.
    period_of: Vec<Vec<usize>>,
}

/// One setup-state variable index `(i, l, s)`; ordering is lexicographic on
/// (product, machine, subperiod).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexTriple {
    pub product: usize,
    pub machine: usize,
    pub subperiod: usize,
}

impl IndexTriple {
    pub fn new(product: usize, machine: usize, subperiod: usize) -> Self {
        Self {
            product,
            machine,
            subperiod,
        }
    }
}

impl fmt::Display for IndexTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{})",
            self.product + 1,
            self.machine + 1,
            self.subperiod + 1
        )
    }
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, InstanceError> {
    Err(InstanceError::Invalid(msg.into()))
}

fn check_value(what: &str, v: f64) -> Result<(), InstanceError> {
    if !v.is_finite() || v < 0.0 {
        return invalid(format!("{what} must be finite and nonnegative, got {v}"));
    }
    Ok(())
}

impl Instance {
    pub fn new(mut parts: InstanceParts) -> Result<Self, InstanceError> {
        let (m, n, t_count) = (parts.machines, parts.products, parts.periods);
        if m == 0 || n == 0 || t_count == 0 {
            return invalid("m, n and T must all be at least 1");
        }
        let dims_ok = parts.subperiods.len() == m
            && parts.subperiods.iter().all(|r| r.len() == t_count)
            && parts.machine_capacity.len() == m
            && parts.machine_capacity.iter().all(|r| r.len() == t_count)
            && parts.demand.len() == n
            && parts.demand.iter().all(|r| r.len() == t_count)
            && parts.holding_cost.len() == n
            && parts.backorder_cost.len() == n
            && parts.init_inventory.len() == n
            && parts.init_backorder.len() == n
            && parts.machine_products.len() == m;
        if !dims_ok {
            return invalid("array dimensions do not match m, n, T");
        }
        for (l, row) in parts.subperiods.iter().enumerate() {
            if let Some(t) = row.iter().position(|&w| w == 0) {
                return invalid(format!(
                    "machine {} has no subperiods in period {}",
                    l + 1,
                    t + 1
                ));
            }
        }

        let mut machines_of = vec![Vec::new(); n];
        for (l, mp) in parts.machine_products.iter_mut().enumerate() {
            let k = mp.products.len();
            if k == 0 {
                return invalid(format!("machine {} has no eligible products", l + 1));
            }
            let sized = mp.proc_time.len() == k
                && mp.prod_cost.len() == k
                && mp.min_lot.len() == k
                && mp.init_setup.len() == k
                && mp.setup_time.len() == k * k
                && mp.setup_cost.len() == k * k;
            if !sized {
                return invalid(format!(
                    "machine {} pair parameters do not match its eligible set",
                    l + 1
                ));
            }
            if mp.products.windows(2).any(|w| w[0] >= w[1]) {
                return invalid(format!(
                    "machine {} eligible products must be strictly increasing",
                    l + 1
                ));
            }
            for &i in &mp.products {
                if i >= n {
                    return invalid(format!(
                        "machine {} lists unknown product {}",
                        l + 1,
                        i + 1
                    ));
                }
                machines_of[i].push(l);
            }
            if mp.init_setup.iter().filter(|&&b| b).count() > 1 {
                return invalid(format!(
                    "machine {} is prepared for more than one product at time 0",
                    l + 1
                ));
            }
        }
        if let Some(i) = machines_of.iter().position(|ls| ls.is_empty()) {
            return invalid(format!("orphan product {}", i + 1));
        }

        check_value("warehouse capacity", parts.warehouse_capacity)?;
        for (l, row) in parts.machine_capacity.iter().enumerate() {
            for (t, &c) in row.iter().enumerate() {
                check_value(&format!("capacity of machine {} period {}", l + 1, t + 1), c)?;
            }
        }
        for i in 0..n {
            for (t, &d) in parts.demand[i].iter().enumerate() {
                check_value(&format!("demand of product {} period {}", i + 1, t + 1), d)?;
            }
            check_value(&format!("holding cost of product {}", i + 1), parts.holding_cost[i])?;
            check_value(&format!("backorder cost of product {}", i + 1), parts.backorder_cost[i])?;
            check_value(&format!("initial inventory of product {}", i + 1), parts.init_inventory[i])?;
            check_value(&format!("initial backorder of product {}", i + 1), parts.init_backorder[i])?;
        }
        for (l, mp) in parts.machine_products.iter().enumerate() {
            let families = [
                ("processing time", &mp.proc_time),
                ("production cost", &mp.prod_cost),
                ("minimum lot", &mp.min_lot),
                ("setup time", &mp.setup_time),
                ("setup cost", &mp.setup_cost),
            ];
            for (what, values) in families {
                for &v in values.iter() {
                    check_value(&format!("{what} on machine {}", l + 1), v)?;
                }
            }
        }
        let init_total: f64 = parts.init_inventory.iter().sum();
        if init_total > parts.warehouse_capacity {
            return invalid(format!(
                "initial inventory {init_total} exceeds warehouse capacity {}",
                parts.warehouse_capacity
            ));
        }

        let mut period_start = Vec::with_capacity(m);
        let mut period_of = Vec::with_capacity(m);
        for row in &parts.subperiods {
            let mut starts = Vec::with_capacity(t_count);
            let mut owners = Vec::new();
            let mut acc = 0;
            for (t, &w) in row.iter().enumerate() {
                starts.push(acc);
                owners.extend(std::iter::repeat(t).take(w));
                acc += w;
            }
            period_start.push(starts);
            period_of.push(owners);
        }

        Ok(Self {
            parts,
            machines_of,
            period_start,
            period_of,
        })
    }

    pub fn parts(&self) -> &InstanceParts {
        &self.parts
    }

    pub fn machines(&self) -> usize {
        self.parts.machines
    }

    pub fn products(&self) -> usize {
        self.parts.products
    }

    pub fn periods(&self) -> usize {
        self.parts.periods
    }

    pub fn machine(&self, l: usize) -> &MachineProducts {
        &self.parts.machine_products[l]
    }

    /// Products machine `l` can produce (`I_l`).
    pub fn eligible(&self, l: usize) -> &[usize] {
        &self.parts.machine_products[l].products
    }

    /// Machines that can produce product `i` (`L_i`).
    pub fn machines_of(&self, i: usize) -> &[usize] {
        &self.machines_of[i]
    }

    /// Total subperiods `W_l` of machine `l`.
    pub fn subperiod_count(&self, l: usize) -> usize {
        self.period_of[l].len()
    }

    /// Global subperiods of machine `l` inside period `t`.
    pub fn subperiods_in(&self, l: usize, t: usize) -> Range<usize> {
        let start = self.period_start[l][t];
        start..start + self.parts.subperiods[l][t]
    }

    pub fn period_of(&self, l: usize, s: usize) -> usize {
        self.period_of[l][s]
    }

    pub fn demand(&self, i: usize, t: usize) -> f64 {
        self.parts.demand[i][t]
    }

    pub fn warehouse_capacity(&self) -> f64 {
        self.parts.warehouse_capacity
    }

    pub fn capacity(&self, l: usize, t: usize) -> f64 {
        self.parts.machine_capacity[l][t]
    }

    pub fn holding_cost(&self, i: usize) -> f64 {
        self.parts.holding_cost[i]
    }

    pub fn backorder_cost(&self, i: usize) -> f64 {
        self.parts.backorder_cost[i]
    }

    pub fn init_inventory(&self, i: usize) -> f64 {
        self.parts.init_inventory[i]
    }

    pub fn init_backorder(&self, i: usize) -> f64 {
        self.parts.init_backorder[i]
    }

    /// Processing time of product `i` on machine `l`, if eligible.
    pub fn proc_time(&self, i: usize, l: usize) -> Option<f64> {
        let mp = self.machine(l);
        mp.local_index(i).map(|a| mp.proc_time[a])
    }

    pub fn prod_cost(&self, i: usize, l: usize) -> Option<f64> {
        let mp = self.machine(l);
        mp.local_index(i).map(|a| mp.prod_cost[a])
    }

    /// Number of setup-state variables, `sum_l |I_l| * W_l`.
    pub fn triple_count(&self) -> usize {
        (0..self.machines())
            .map(|l| self.eligible(l).len() * self.subperiod_count(l))
            .sum()
    }

    /// Every valid `(i, l, s)` in lexicographic order.
    pub fn triple_universe(&self) -> Vec<IndexTriple> {
        let mut out = Vec::with_capacity(self.triple_count());
        for i in 0..self.products() {
            for &l in self.machines_of(i) {
                for s in 0..self.subperiod_count(l) {
                    out.push(IndexTriple::new(i, l, s));
                }
            }
        }
        out
    }
}
