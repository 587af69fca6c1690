use super::*;
use crate::instance::tests::minimal_parts;
use crate::instance::{InstanceParts, MachineProducts};
use crate::milp::{write_lp, Sense, VarKind};

fn block(products: Vec<usize>, min_lot: f64) -> MachineProducts {
    let k = products.len();
    let mut setup_cost = vec![0.0; k * k];
    let mut setup_time = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            if a != b {
                setup_cost[a * k + b] = 10.0 * (a + 1) as f64 + b as f64;
                setup_time[a * k + b] = 1.0 + a as f64;
            }
        }
    }
    MachineProducts {
        products,
        proc_time: vec![1.0; k],
        prod_cost: vec![2.0; k],
        min_lot: vec![min_lot; k],
        setup_time,
        setup_cost,
        init_setup: vec![false; k],
    }
}

/// One machine, `n` products, demand given per product and period.
fn single_machine(demand: Vec<Vec<f64>>, w: usize, init_inventory: Vec<f64>) -> Instance {
    let n = demand.len();
    let periods = demand[0].len();
    Instance::new(InstanceParts {
        machines: 1,
        products: n,
        periods,
        subperiods: vec![vec![w; periods]],
        warehouse_capacity: 100.0,
        machine_capacity: vec![vec![50.0; periods]],
        demand,
        holding_cost: (0..n).map(|i| 1.0 + i as f64).collect(),
        backorder_cost: vec![20.0; n],
        init_inventory,
        init_backorder: vec![0.0; n],
        machine_products: vec![block((0..n).collect(), 0.0)],
    })
    .unwrap()
}

/// Produces nothing and keeps product 0 set up on every machine, with
/// inventory and backorders propagated from the initial state.
fn idle_values(inst: &Instance, vm: &VarMap) -> Vec<f64> {
    let mut v = vec![0.0; vm.var_count()];
    for l in 0..inst.machines() {
        let first = inst.eligible(l)[0];
        for s in 0..inst.subperiod_count(l) {
            v[vm.x(first, l, s).unwrap().0] = 1.0;
            if s > 0 {
                v[vm.y_local(l, 0, 0, s).0] = 1.0;
            }
        }
    }
    for i in 0..inst.products() {
        let mut net = inst.init_inventory(i) - inst.init_backorder(i);
        for t in 0..inst.periods() {
            net -= inst.demand(i, t);
            v[vm.inv_plus(i, t).0] = net.max(0.0);
            v[vm.inv_minus(i, t).0] = (-net).max(0.0);
        }
    }
    v
}

#[test]
fn micro_model_counts() {
    let inst = Instance::new(minimal_parts()).unwrap();
    let (model, vm) = build_model(&inst);
    // q, x, y(1,1,1,1), I+, I-; no setup row at s = 1 on an unconfigured machine.
    assert_eq!(model.var_count(), 5);
    assert_eq!(vm.x_ids().len(), 1);
    assert_eq!(vm.q_ids().len(), 1);
    assert_eq!(vm.y_count(), 1);
    assert_eq!(model.binary_count(), 1);
    let names: Vec<&str> = model.rows().iter().map(|r| r.name.as_str()).collect();
    assert_eq!(names, ["bal_1_1", "wh_1", "cap_1_1", "link_1_1_1", "lot_1_1_1", "one_1_1"]);
    let one = &model.rows()[5];
    assert_eq!((one.sense, one.rhs), (Sense::Eq, 1.0));
    assert_eq!(one.terms, vec![(vm.x_ids()[0], 1.0)]);
}

#[test]
fn configured_machine_keeps_first_setup_rows() {
    let mut p = minimal_parts();
    p.machine_products[0].init_setup = vec![true];
    let inst = Instance::new(p).unwrap();
    let (model, _) = build_model(&inst);
    assert_eq!(model.row_count(), 7);
    let setup = model.rows().last().unwrap();
    assert_eq!(setup.name, "setup_1_1_1_1");
    assert_eq!(setup.rhs, 0.0);
    let lot = model.rows().iter().find(|r| r.name == "lot_1_1_1").unwrap();
    assert_eq!(lot.rhs, -1.0);
}

#[test]
fn p1_dimensions_give_2016_binaries() {
    let sets = [vec![0, 1, 2, 3, 4], vec![4, 5, 6, 7, 8], vec![0, 2, 4, 6], vec![1, 3, 5, 7]];
    let n = 9;
    let periods = 16;
    let inst = Instance::new(InstanceParts {
        machines: 4,
        products: n,
        periods,
        subperiods: vec![vec![7; periods]; 4],
        warehouse_capacity: 1e5,
        machine_capacity: vec![vec![160.0; periods]; 4],
        demand: vec![vec![10.0; periods]; n],
        holding_cost: vec![1.0; n],
        backorder_cost: vec![10.0; n],
        init_inventory: vec![0.0; n],
        init_backorder: vec![0.0; n],
        machine_products: sets.iter().map(|s| block(s.clone(), 5.0)).collect(),
    })
    .unwrap();
    let (model, vm) = build_model(&inst);
    assert_eq!(model.binary_count(), 2016);
    assert_eq!(vm.x_ids().len(), 112 * 18);
    assert_eq!(vm.y_count(), 112 * (25 + 25 + 16 + 16));
    assert_eq!(vm.var_count(), 2 * 2016 + vm.y_count() + 2 * n * periods);
}

#[test]
fn count_identities_on_generated_instances() {
    for seed in 0..20 {
        let inst = crate::generator::generate_micro(seed);
        let (model, vm) = build_model(&inst);
        let x: usize = (0..inst.machines())
            .map(|l| inst.eligible(l).len() * inst.subperiod_count(l))
            .sum();
        let y: usize = (0..inst.machines())
            .map(|l| inst.eligible(l).len().pow(2) * inst.subperiod_count(l))
            .sum();
        assert_eq!(vm.x_ids().len(), x);
        assert_eq!(vm.q_ids().len(), x);
        assert_eq!(vm.y_count(), y);
        assert_eq!(vm.var_count(), 2 * x + y + 2 * inst.products() * inst.periods());
        assert_eq!(model.binary_count(), x);
        let binaries: Vec<VarId> = (0..model.var_count())
            .map(VarId)
            .filter(|&id| model.var(id).kind == VarKind::Binary)
            .collect();
        assert_eq!(binaries, vm.x_ids());
    }
}

#[test]
fn var_map_round_trips_references() {
    let inst = crate::generator::generate_micro(3);
    let (_, vm) = build_model(&inst);
    for (k, &t) in vm.triples().iter().enumerate() {
        assert_eq!(vm.triple_index(t), Some(k));
        assert_eq!(vm.var_ref(vm.x_ids()[k]), VarRef::X(t));
        assert_eq!(vm.var_ref(vm.q_ids()[k]), VarRef::Q(t));
    }
}

#[test]
fn zero_production_costs_follow_closed_form() {
    let inst = single_machine(vec![vec![5.0, 10.0, 15.0], vec![2.0, 0.0, 1.0]], 2, vec![20.0, 1.0]);
    let (_, vm) = build_model(&inst);
    let v = idle_values(&inst, &vm);
    // Product 0 stock 15, 5, 0 then a backorder of 10; product 1 goes short
    // by 1 in period 1 and stays short.
    let b = evaluate_objective(&inst, &vm, &v).unwrap();
    assert_eq!(b.inventory, 1.0 * (15.0 + 5.0));
    assert_eq!(b.backorder, 20.0 * (10.0 + 1.0 + 1.0 + 2.0));
    assert_eq!(b.setup, 0.0);
    assert_eq!(b.production, 0.0);
    assert_eq!(b.total(), 20.0 + 280.0);
    assert!(check_feasibility(&inst, &vm, &v, 1e-6).is_feasible());
}

#[test]
fn single_changeover_costs_one_setup() {
    let inst = single_machine(vec![vec![0.0], vec![0.0]], 2, vec![0.0, 0.0]);
    let (_, vm) = build_model(&inst);
    let mut v = vec![0.0; vm.var_count()];
    v[vm.x(0, 0, 0).unwrap().0] = 1.0;
    v[vm.x(1, 0, 1).unwrap().0] = 1.0;
    v[vm.y_local(0, 0, 1, 1).0] = 1.0;
    let b = evaluate_objective(&inst, &vm, &v).unwrap();
    assert_eq!(b.setup, inst.machine(0).setup_cost(0, 1));
    assert_eq!(b.total(), b.setup);
    assert!(check_feasibility(&inst, &vm, &v, 1e-6).is_feasible());
    // Without the arc the changeover is unpaid.
    v[vm.y_local(0, 0, 1, 1).0] = 0.0;
    let r = check_feasibility(&inst, &vm, &v, 1e-6);
    assert_eq!(r.count(ConstraintFamily::SetupArc), 1);
    assert_eq!(r.violations.len(), 1);
}

#[test]
fn warehouse_overflow_is_one_violation() {
    let inst = single_machine(vec![vec![5.0, 5.0], vec![0.0, 0.0]], 1, vec![0.0, 0.0]);
    let (_, vm) = build_model(&inst);
    let mut v = idle_values(&inst, &vm);
    // Store C^W + 1 in the last period; the matching backorder keeps the
    // balance row intact.
    let extra = inst.warehouse_capacity() + 1.0;
    v[vm.inv_plus(0, 1).0] += extra;
    v[vm.inv_minus(0, 1).0] += extra;
    let r = check_feasibility(&inst, &vm, &v, 1e-6);
    assert_eq!(r.violations.len(), 1, "{:?}", r.violations);
    assert_eq!(r.count(ConstraintFamily::Warehouse), 1);
    assert_eq!(r.violations[0].label, "(t=2)");
}

#[test]
fn double_setup_state_is_flagged() {
    let inst = single_machine(vec![vec![0.0], vec![0.0]], 2, vec![0.0, 0.0]);
    let (_, vm) = build_model(&inst);
    let mut v = idle_values(&inst, &vm);
    v[vm.x(1, 0, 1).unwrap().0] = 1.0;
    let r = check_feasibility(&inst, &vm, &v, 1e-6);
    let single: Vec<&Violation> = r
        .violations
        .iter()
        .filter(|x| x.family == ConstraintFamily::SingleSetup)
        .collect();
    assert_eq!(single.len(), 1);
    assert_eq!(single[0].label, "(l=1, s=2)");
}

#[test]
fn short_value_vector_reported() {
    let inst = Instance::new(minimal_parts()).unwrap();
    let (_, vm) = build_model(&inst);
    let r = check_feasibility(&inst, &vm, &[0.0; 2], 1e-6);
    assert_eq!(r.count(ConstraintFamily::Domain), 1);
    assert!(evaluate_objective(&inst, &vm, &[0.0; 2]).is_err());
}

#[test]
fn plan_recomputes_setup_arcs() {
    let inst = single_machine(vec![vec![0.0], vec![0.0]], 2, vec![0.0, 0.0]);
    let (_, vm) = build_model(&inst);
    let mut v = vec![0.0; vm.var_count()];
    v[vm.x(0, 0, 0).unwrap().0] = 1.0 - 1e-9;
    v[vm.x(1, 0, 1).unwrap().0] = 1.0;
    // A loose solver point: y above its minimum everywhere.
    for a in 0..2 {
        for b in 0..2 {
            v[vm.y_local(0, a, b, 1).0] = 0.7;
        }
    }
    let sol = crate::milp::Solution {
        status: crate::milp::SolveStatus::Feasible,
        values: v,
        objective: None,
        best_bound: None,
        nodes: 0,
        elapsed: Default::default(),
    };
    let plan = plan_from_solution(&inst, &vm, &sol, 1e-6).unwrap();
    assert_eq!(plan.values[vm.x(0, 0, 0).unwrap().0], 1.0);
    assert_eq!(plan.values[vm.y_local(0, 0, 1, 1).0], 1.0);
    assert_eq!(plan.values[vm.y_local(0, 1, 0, 1).0], 0.0);
    assert_eq!(plan.objective(), Some(inst.machine(0).setup_cost(0, 1)));

    let mut frac = sol.clone();
    frac.values[vm.x(0, 0, 0).unwrap().0] = 0.6;
    assert!(matches!(
        plan_from_solution(&inst, &vm, &frac, 1e-6),
        Err(EvalError::Fractional { .. })
    ));
}

#[test]
fn lp_export_is_deterministic() {
    let inst = crate::generator::generate_micro(11);
    let a = write_lp(&build_model(&inst).0);
    let b = write_lp(&build_model(&inst).0);
    assert_eq!(a, b);
    assert!(a.starts_with("\\") || a.starts_with("Minimize"));
    assert!(a.contains("Binaries") && a.trim_end().ends_with("End"));
}

#[test]
fn solution_file_round_trip() {
    let inst = single_machine(vec![vec![5.0, 10.0], vec![2.0, 0.0]], 2, vec![20.0, 1.0]);
    let (_, vm) = build_model(&inst);
    let values = idle_values(&inst, &vm);
    let plan = Plan {
        status: crate::milp::SolveStatus::Feasible,
        breakdown: Some(evaluate_objective(&inst, &vm, &values).unwrap()),
        values,
        best_bound: Some(1.0),
    };
    let file = SolutionFile::from_plan(&vm, &plan);
    let back = SolutionFile::from_json(&file.to_json()).unwrap();
    assert_eq!(back, file);
    assert_eq!(back.to_values(&vm).unwrap(), plan.values);

    let mut missing = back.clone();
    missing.q.pop();
    assert!(matches!(missing.to_values(&vm), Err(SolutionFileError::Mismatch(_))));
    let mut dup = back.clone();
    dup.x.push(dup.x[0].clone());
    assert!(matches!(dup.to_values(&vm), Err(SolutionFileError::Mismatch(_))));
    let mut foreign = back;
    foreign.x[0].machine = 9;
    assert!(matches!(foreign.to_values(&vm), Err(SolutionFileError::Mismatch(_))));
}
