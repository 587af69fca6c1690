//! Feasibility checking straight from instance data. Nothing here reads the
//! generated rows, so a builder bug cannot hide a broken schedule.

use std::fmt;

use super::VarMap;
use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintFamily {
    Balance,
    Warehouse,
    Capacity,
    Link,
    MinLot,
    SingleSetup,
    SetupArc,
    Domain,
    SetupIntegrality,
    ArcIntegrality,
}

impl fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintFamily::Balance => "inventory balance",
            ConstraintFamily::Warehouse => "warehouse capacity",
            ConstraintFamily::Capacity => "machine capacity",
            ConstraintFamily::Link => "production without setup",
            ConstraintFamily::MinLot => "minimum lot",
            ConstraintFamily::SingleSetup => "single setup state",
            ConstraintFamily::SetupArc => "setup arc",
            ConstraintFamily::Domain => "variable domain",
            ConstraintFamily::SetupIntegrality => "setup state integrality",
            ConstraintFamily::ArcIntegrality => "setup arc integrality",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub family: ConstraintFamily,
    pub label: String,
    pub amount: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: violated by {:.6e}", self.family, self.label, self.amount)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, family: ConstraintFamily) -> usize {
        self.violations.iter().filter(|v| v.family == family).count()
    }
}

struct Checker {
    tol: f64,
    report: FeasibilityReport,
}

impl Checker {
    /// Records a violation when `amount > tol * max(1, scale)`.
    fn check(&mut self, family: ConstraintFamily, amount: f64, scale: f64, label: impl FnOnce() -> String) {
        if amount > self.tol * scale.abs().max(1.0) || amount.is_nan() {
            self.report.violations.push(Violation {
                family,
                label: label(),
                amount,
            });
        }
    }
}

/// Lists every constraint of the model violated by `values` beyond `tol`
/// (relative to `max(1, |rhs|)`), plus integrality of setup states and arcs.
///
/// `values` must have one entry per model variable; a short vector is
/// reported as a single domain violation.
pub fn check_feasibility(
    inst: &Instance,
    vm: &VarMap,
    values: &[f64],
    tol: f64,
) -> FeasibilityReport {
    let mut c = Checker {
        tol,
        report: FeasibilityReport::default(),
    };
    if values.len() != vm.var_count() {
        c.report.violations.push(Violation {
            family: ConstraintFamily::Domain,
            label: format!("{} values for {} variables", values.len(), vm.var_count()),
            amount: f64::INFINITY,
        });
        return c.report;
    }
    let v = |id: crate::milp::VarId| values[id.0];
    let (n, t_count) = (inst.products(), inst.periods());

    for (k, &r) in vm.refs().iter().enumerate() {
        let x = values[k];
        c.check(ConstraintFamily::Domain, -x, 1.0, || format!("{r} >= 0"));
    }
    for (k, &id) in vm.x_ids().iter().enumerate() {
        let x = v(id);
        let t = vm.triples()[k];
        c.check(ConstraintFamily::Domain, x - 1.0, 1.0, || format!("x{t} <= 1"));
        c.check(ConstraintFamily::SetupIntegrality, (x - x.round()).abs(), 1.0, || {
            format!("x{t} = {x}")
        });
    }

    for i in 0..n {
        for t in 0..t_count {
            let (prev_plus, prev_minus) = if t == 0 {
                (inst.init_inventory(i), inst.init_backorder(i))
            } else {
                (v(vm.inv_plus(i, t - 1)), v(vm.inv_minus(i, t - 1)))
            };
            let mut produced = 0.0;
            for &l in inst.machines_of(i) {
                for s in inst.subperiods_in(l, t) {
                    produced += v(vm.q(i, l, s).expect("eligible"));
                }
            }
            let lhs = prev_plus - prev_minus + produced - v(vm.inv_plus(i, t)) + v(vm.inv_minus(i, t));
            let d = inst.demand(i, t);
            c.check(ConstraintFamily::Balance, (lhs - d).abs(), d, || {
                format!("(i={}, t={})", i + 1, t + 1)
            });
        }
    }

    for t in 0..t_count {
        let stored: f64 = (0..n).map(|i| v(vm.inv_plus(i, t))).sum();
        let cap = inst.warehouse_capacity();
        c.check(ConstraintFamily::Warehouse, stored - cap, cap, || format!("(t={})", t + 1));
    }

    for l in 0..inst.machines() {
        let mp = inst.machine(l);
        let k = mp.len();
        for t in 0..t_count {
            let mut used = 0.0;
            for s in inst.subperiods_in(l, t) {
                for a in 0..k {
                    used += mp.proc_time[a] * v(vm.q(mp.products[a], l, s).expect("eligible"));
                    for b in 0..k {
                        used += mp.setup_time(a, b) * v(vm.y_local(l, a, b, s));
                    }
                }
            }
            let cap = inst.capacity(l, t);
            c.check(ConstraintFamily::Capacity, used - cap, cap, || {
                format!("(l={}, t={})", l + 1, t + 1)
            });
        }

        for s in 0..inst.subperiod_count(l) {
            let cap = inst.capacity(l, inst.period_of(l, s));
            let x_of = |a: usize, s: usize| v(vm.x(mp.products[a], l, s).expect("eligible"));
            let prev_of = |a: usize| {
                if s == 0 {
                    f64::from(u8::from(mp.init_setup[a]))
                } else {
                    x_of(a, s - 1)
                }
            };
            let mut states = 0.0;
            for a in 0..k {
                let i = mp.products[a];
                let q = v(vm.q(i, l, s).expect("eligible"));
                let x = x_of(a, s);
                states += x;
                c.check(ConstraintFamily::Link, mp.proc_time[a] * q - cap * x, cap, || {
                    format!("(i={}, l={}, s={})", i + 1, l + 1, s + 1)
                });
                let lot = mp.min_lot[a];
                c.check(ConstraintFamily::MinLot, lot * (x - prev_of(a)) - q, lot, || {
                    format!("(i={}, l={}, s={})", i + 1, l + 1, s + 1)
                });
                for b in 0..k {
                    let y = v(vm.y_local(l, a, b, s));
                    let need = prev_of(a) + x_of(b, s) - 1.0;
                    let label = || {
                        format!(
                            "(i={}, j={}, l={}, s={})",
                            i + 1,
                            mp.products[b] + 1,
                            l + 1,
                            s + 1
                        )
                    };
                    c.check(ConstraintFamily::SetupArc, need - y, 1.0, label);
                    c.check(ConstraintFamily::ArcIntegrality, (y - y.round()).abs(), 1.0, label);
                }
            }
            c.check(ConstraintFamily::SingleSetup, (states - 1.0).abs(), 1.0, || {
                format!("(l={}, s={})", l + 1, s + 1)
            });
        }
    }
    c.report
}
