//! The lot sizing and scheduling MILP: variable layout, row generation,
//! cost evaluation and an independent feasibility checker.
//!
//! Variable ids are laid out family by family: `q` and `x` in triple order,
//! then `y` per machine as `(from, to, subperiod)` blocks, then `I+` and `I-`
//! product-major over periods. Rows are emitted family by family in the order
//! balance, warehouse, capacity, link, minimum lot, single setup, setup arc,
//! each family index-lexicographic.

mod evaluate;
mod file;
mod validate;

use std::fmt;

pub use evaluate::{evaluate_objective, plan_from_solution, CostBreakdown, EvalError, Plan};
pub use file::{SolutionFile, SolutionFileError, SOLUTION_FORMAT};
pub use validate::{check_feasibility, ConstraintFamily, FeasibilityReport, Violation};

use crate::instance::{IndexTriple, Instance};
use crate::milp::{MilpModel, Sense, VarId, VarKind};

/// What a variable id stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRef {
    Q(IndexTriple),
    X(IndexTriple),
    Y {
        from: usize,
        to: usize,
        machine: usize,
        subperiod: usize,
    },
    InvPlus {
        product: usize,
        period: usize,
    },
    InvMinus {
        product: usize,
        period: usize,
    },
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VarRef::Q(t) => write!(f, "q{t}"),
            VarRef::X(t) => write!(f, "x{t}"),
            VarRef::Y {
                from,
                to,
                machine,
                subperiod,
            } => write!(f, "y({},{},{},{})", from + 1, to + 1, machine + 1, subperiod + 1),
            VarRef::InvPlus { product, period } => write!(f, "I+({},{})", product + 1, period + 1),
            VarRef::InvMinus { product, period } => write!(f, "I-({},{})", product + 1, period + 1),
        }
    }
}

/// Bidirectional map between model variable ids and the semantic families.
#[derive(Debug, Clone, PartialEq)]
pub struct VarMap {
    triples: Vec<IndexTriple>,
    /// `[product][machine]` position of `(i, l, 0)` in `triples`.
    pair_offset: Vec<Vec<Option<usize>>>,
    q: Vec<VarId>,
    x: Vec<VarId>,
    y_base: Vec<usize>,
    machine_k: Vec<usize>,
    machine_w: Vec<usize>,
    inv_plus_base: usize,
    inv_minus_base: usize,
    periods: usize,
    refs: Vec<VarRef>,
}

impl VarMap {
    fn new(inst: &Instance) -> Self {
        let triples = inst.triple_universe();
        let xcount = triples.len();
        let (n, m, t_count) = (inst.products(), inst.machines(), inst.periods());
        let mut pair_offset = vec![vec![None; m]; n];
        for (pos, t) in triples.iter().enumerate() {
            if t.subperiod == 0 {
                pair_offset[t.product][t.machine] = Some(pos);
            }
        }
        let mut refs = Vec::new();
        refs.extend(triples.iter().map(|&t| VarRef::Q(t)));
        refs.extend(triples.iter().map(|&t| VarRef::X(t)));
        let q = (0..xcount).map(VarId).collect();
        let x = (xcount..2 * xcount).map(VarId).collect();
        let mut y_base = Vec::with_capacity(m);
        let mut machine_k = Vec::with_capacity(m);
        let mut machine_w = Vec::with_capacity(m);
        for l in 0..m {
            let prods = inst.eligible(l);
            let w = inst.subperiod_count(l);
            y_base.push(refs.len());
            machine_k.push(prods.len());
            machine_w.push(w);
            for &from in prods {
                for &to in prods {
                    for subperiod in 0..w {
                        refs.push(VarRef::Y {
                            from,
                            to,
                            machine: l,
                            subperiod,
                        });
                    }
                }
            }
        }
        let inv_plus_base = refs.len();
        for product in 0..n {
            for period in 0..t_count {
                refs.push(VarRef::InvPlus { product, period });
            }
        }
        let inv_minus_base = refs.len();
        for product in 0..n {
            for period in 0..t_count {
                refs.push(VarRef::InvMinus { product, period });
            }
        }
        Self {
            triples,
            pair_offset,
            q,
            x,
            y_base,
            machine_k,
            machine_w,
            inv_plus_base,
            inv_minus_base,
            periods: t_count,
            refs,
        }
    }

    pub fn var_count(&self) -> usize {
        self.refs.len()
    }

    pub fn triples(&self) -> &[IndexTriple] {
        &self.triples
    }

    /// Position of a triple in the universe order, if valid.
    pub fn triple_index(&self, t: IndexTriple) -> Option<usize> {
        let off = (*self.pair_offset.get(t.product)?.get(t.machine)?)?;
        (t.subperiod < self.machine_w[t.machine]).then_some(off + t.subperiod)
    }

    pub fn x_ids(&self) -> &[VarId] {
        &self.x
    }

    pub fn q_ids(&self) -> &[VarId] {
        &self.q
    }

    pub fn x(&self, i: usize, l: usize, s: usize) -> Option<VarId> {
        self.triple_index(IndexTriple::new(i, l, s)).map(|k| self.x[k])
    }

    pub fn q(&self, i: usize, l: usize, s: usize) -> Option<VarId> {
        self.triple_index(IndexTriple::new(i, l, s)).map(|k| self.q[k])
    }

    /// `y` by machine-local product indices.
    pub fn y_local(&self, l: usize, from: usize, to: usize, s: usize) -> VarId {
        let k = self.machine_k[l];
        VarId(self.y_base[l] + (from * k + to) * self.machine_w[l] + s)
    }

    pub fn y_count(&self) -> usize {
        self.inv_plus_base - self.y_base.first().copied().unwrap_or(self.inv_plus_base)
    }

    pub fn inv_plus(&self, i: usize, t: usize) -> VarId {
        VarId(self.inv_plus_base + i * self.periods + t)
    }

    pub fn inv_minus(&self, i: usize, t: usize) -> VarId {
        VarId(self.inv_minus_base + i * self.periods + t)
    }

    pub fn var_ref(&self, id: VarId) -> VarRef {
        self.refs[id.0]
    }

    pub fn refs(&self) -> &[VarRef] {
        &self.refs
    }

    /// Current `x` values in triple order.
    pub fn x_values(&self, values: &[f64]) -> Vec<f64> {
        self.x.iter().map(|v| values[v.0]).collect()
    }
}

fn label_triple(prefix: &str, i: usize, l: usize, s: usize) -> String {
    format!("{prefix}_{}_{}_{}", i + 1, l + 1, s + 1)
}

/// Builds the full MILP for `inst`.
pub fn build_model(inst: &Instance) -> (MilpModel, VarMap) {
    let vm = VarMap::new(inst);
    let mut model = MilpModel::new();
    let (n, m, t_count) = (inst.products(), inst.machines(), inst.periods());

    for t in vm.triples() {
        let cp = inst.prod_cost(t.product, t.machine).expect("eligible");
        model.add_var(
            label_triple("q", t.product, t.machine, t.subperiod),
            VarKind::Continuous,
            0.0,
            f64::INFINITY,
            cp,
        );
    }
    for t in vm.triples() {
        model.add_var(
            label_triple("x", t.product, t.machine, t.subperiod),
            VarKind::Binary,
            0.0,
            1.0,
            0.0,
        );
    }
    for l in 0..m {
        let mp = inst.machine(l);
        for (a, &i) in mp.products.iter().enumerate() {
            for (b, &j) in mp.products.iter().enumerate() {
                for s in 0..inst.subperiod_count(l) {
                    model.add_var(
                        format!("y_{}_{}_{}_{}", i + 1, j + 1, l + 1, s + 1),
                        VarKind::Continuous,
                        0.0,
                        f64::INFINITY,
                        mp.setup_cost(a, b),
                    );
                }
            }
        }
    }
    for i in 0..n {
        for t in 0..t_count {
            model.add_var(
                format!("Ip_{}_{}", i + 1, t + 1),
                VarKind::Continuous,
                0.0,
                f64::INFINITY,
                inst.holding_cost(i),
            );
        }
    }
    for i in 0..n {
        for t in 0..t_count {
            model.add_var(
                format!("Im_{}_{}", i + 1, t + 1),
                VarKind::Continuous,
                0.0,
                f64::INFINITY,
                inst.backorder_cost(i),
            );
        }
    }
    debug_assert_eq!(model.var_count(), vm.var_count());

    let add = |model: &mut MilpModel, name: String, terms, sense, rhs| {
        model
            .add_row(name, terms, sense, rhs)
            .expect("builder emits well-formed rows");
    };

    // Inventory and backorder balance.
    for i in 0..n {
        for t in 0..t_count {
            let mut terms = Vec::new();
            let mut rhs = inst.demand(i, t);
            if t == 0 {
                rhs -= inst.init_inventory(i) - inst.init_backorder(i);
            } else {
                terms.push((vm.inv_plus(i, t - 1), 1.0));
                terms.push((vm.inv_minus(i, t - 1), -1.0));
            }
            for &l in inst.machines_of(i) {
                for s in inst.subperiods_in(l, t) {
                    terms.push((vm.q(i, l, s).expect("eligible"), 1.0));
                }
            }
            terms.push((vm.inv_plus(i, t), -1.0));
            terms.push((vm.inv_minus(i, t), 1.0));
            add(&mut model, format!("bal_{}_{}", i + 1, t + 1), terms, Sense::Eq, rhs);
        }
    }

    // Warehouse capacity.
    for t in 0..t_count {
        let terms = (0..n).map(|i| (vm.inv_plus(i, t), 1.0)).collect();
        add(
            &mut model,
            format!("wh_{}", t + 1),
            terms,
            Sense::Le,
            inst.warehouse_capacity(),
        );
    }

    // Machine time: production plus setups.
    for l in 0..m {
        let mp = inst.machine(l);
        let k = mp.len();
        for t in 0..t_count {
            let mut terms = Vec::new();
            for s in inst.subperiods_in(l, t) {
                for a in 0..k {
                    terms.push((vm.q(mp.products[a], l, s).expect("eligible"), mp.proc_time[a]));
                    for b in 0..k {
                        terms.push((vm.y_local(l, a, b, s), mp.setup_time(a, b)));
                    }
                }
            }
            add(
                &mut model,
                format!("cap_{}_{}", l + 1, t + 1),
                terms,
                Sense::Le,
                inst.capacity(l, t),
            );
        }
    }

    // Production only in a prepared state.
    for l in 0..m {
        let mp = inst.machine(l);
        for s in 0..inst.subperiod_count(l) {
            let cap = inst.capacity(l, inst.period_of(l, s));
            for (a, &i) in mp.products.iter().enumerate() {
                let terms = vec![
                    (vm.q(i, l, s).expect("eligible"), mp.proc_time[a]),
                    (vm.x(i, l, s).expect("eligible"), -cap),
                ];
                add(&mut model, label_triple("link", i, l, s), terms, Sense::Le, 0.0);
            }
        }
    }

    // Minimum lot on a switch into a product.
    for l in 0..m {
        let mp = inst.machine(l);
        for s in 0..inst.subperiod_count(l) {
            for (a, &i) in mp.products.iter().enumerate() {
                let lot = mp.min_lot[a];
                let mut terms = vec![
                    (vm.q(i, l, s).expect("eligible"), 1.0),
                    (vm.x(i, l, s).expect("eligible"), -lot),
                ];
                let mut rhs = 0.0;
                if s == 0 {
                    if mp.init_setup[a] {
                        rhs = -lot;
                    }
                } else {
                    terms.push((vm.x(i, l, s - 1).expect("eligible"), lot));
                }
                add(&mut model, label_triple("lot", i, l, s), terms, Sense::Ge, rhs);
            }
        }
    }

    // Exactly one prepared product per machine and subperiod.
    for l in 0..m {
        let prods = inst.eligible(l);
        for s in 0..inst.subperiod_count(l) {
            let terms = prods
                .iter()
                .map(|&i| (vm.x(i, l, s).expect("eligible"), 1.0))
                .collect();
            add(&mut model, format!("one_{}_{}", l + 1, s + 1), terms, Sense::Eq, 1.0);
        }
    }

    // Setup arcs. At the first subperiod the previous state is the initial
    // configuration; an unconfigured machine makes every such row vacuous,
    // so none is emitted.
    for l in 0..m {
        let mp = inst.machine(l);
        let configured = mp.initial_product().is_some();
        for s in 0..inst.subperiod_count(l) {
            if s == 0 && !configured {
                continue;
            }
            for (a, &i) in mp.products.iter().enumerate() {
                for (b, &j) in mp.products.iter().enumerate() {
                    let mut terms = vec![
                        (vm.y_local(l, a, b, s), 1.0),
                        (vm.x(j, l, s).expect("eligible"), -1.0),
                    ];
                    let rhs = if s == 0 {
                        if mp.init_setup[a] {
                            0.0
                        } else {
                            -1.0
                        }
                    } else {
                        terms.push((vm.x(i, l, s - 1).expect("eligible"), -1.0));
                        -1.0
                    };
                    add(
                        &mut model,
                        format!("setup_{}_{}_{}_{}", i + 1, j + 1, l + 1, s + 1),
                        terms,
                        Sense::Ge,
                        rhs,
                    );
                }
            }
        }
    }

    (model, vm)
}

#[cfg(test)]
mod tests;
