use std::path::Path;
use std::process::{Command, Output};

use glsppl::instance::{InstanceParts, MachineProducts};
use glsppl::{save_instance, Instance};
use serde_json::Value;

fn glsppl(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glsppl"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn micro(dir: &Path, seed: u64) -> String {
    let name = format!("m{seed}.json");
    let o = glsppl(&["generate", "--micro", "--seed", &seed.to_string(), "--out", &name], dir);
    assert!(o.status.success());
    name
}

fn objective_field(line: &str) -> f64 {
    line.trim().split(',').nth(5).unwrap().parse().unwrap()
}

#[test]
fn milp_and_single_stage_rf_agree() {
    let dir = tempfile::tempdir().unwrap();
    let inst = micro(dir.path(), 3);
    let milp = glsppl(&["solve", &inst, "--method", "milp", "--gap", "0", "--out-dir", "milp"], dir.path());
    let rf = glsppl(&["solve", &inst, "--method", "rf", "-K", "1", "--gap", "0", "--out-dir", "rf"], dir.path());
    assert_eq!(milp.status.code(), Some(0));
    assert_eq!(rf.status.code(), Some(0));
    let (a, b) = (stdout(&milp), stdout(&rf));
    assert!(a.starts_with("m3,milp,,3600,optimal,"), "{a}");
    assert!(b.starts_with("m3,rf:s11,1,3600,completed,"), "{b}");
    assert_eq!(objective_field(&a), objective_field(&b));
    for f in ["milp/m3.solution.json", "milp/m3.summary.csv", "rf/m3.report.json", "rf/m3.solution.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let v = glsppl(&["validate", &inst, "rf/m3.solution.json"], dir.path());
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).contains("feasible"));
}

#[test]
fn unknown_strategy_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let inst = micro(dir.path(), 1);
    let o = glsppl(&["solve", &inst, "--strategy", "s12", "--out-dir", "out"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn exit_codes_for_infeasible_and_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let o = glsppl(&["solve", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    std::fs::write(dir.path().join("bad.json"), "{").unwrap();
    assert_eq!(glsppl(&["solve", "bad.json"], dir.path()).status.code(), Some(1));

    // Any setup of product 1 overflows the warehouse; the relaxed first stage
    // never sees it, so stage 2 is stuck.
    let k = 4;
    let inst = Instance::new(InstanceParts {
        machines: 1,
        products: k,
        periods: 1,
        subperiods: vec![vec![1]],
        warehouse_capacity: 50.0,
        machine_capacity: vec![vec![120.0]],
        demand: vec![vec![30.0], vec![30.0], vec![0.0], vec![0.0]],
        holding_cost: vec![1.0; k],
        backorder_cost: vec![20.0; k],
        init_inventory: vec![0.0; k],
        init_backorder: vec![0.0; k],
        machine_products: vec![MachineProducts {
            products: vec![0, 1, 2, 3],
            proc_time: vec![1.0; k],
            prod_cost: vec![1.0, 1.0, 1000.0, 1000.0],
            min_lot: vec![100.0, 100.0, 10.0, 10.0],
            setup_time: vec![0.0; k * k],
            setup_cost: vec![0.0; k * k],
            init_setup: vec![false; k],
        }],
    })
    .unwrap();
    save_instance(&inst, dir.path().join("trap.json")).unwrap();
    let o = glsppl(&["solve", "trap.json", "-K", "2", "--gap", "0", "--out-dir", "out"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("infeasible-at-stage(2)"));
    assert!(!dir.path().join("out/trap.solution.json").exists());
    assert!(dir.path().join("out/trap.report.json").exists());
}

fn tampered(dir: &Path, inst: &str, edit: impl Fn(&mut Value)) -> Output {
    let o = glsppl(&["solve", inst, "--method", "milp", "--gap", "0"], dir);
    assert!(o.status.success());
    let id = inst.trim_end_matches(".json");
    let path = dir.join(format!("{id}.solution.json"));
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    edit(&mut v);
    std::fs::write(dir.join("tampered.json"), v.to_string()).unwrap();
    glsppl(&["validate", inst, "tampered.json"], dir)
}

#[test]
fn flipped_setup_is_rejected_with_its_slot() {
    let dir = tempfile::tempdir().unwrap();
    let inst = micro(dir.path(), 3);
    let o = tampered(dir.path(), &inst, |v| {
        let x = v["x"].as_array_mut().unwrap();
        let on = x.iter_mut().find(|e| e["value"].as_f64() == Some(1.0)).unwrap();
        on["value"] = Value::from(0.0);
    });
    assert_eq!(o.status.code(), Some(5));
    let out = stdout(&o);
    assert!(out.contains("violation:"), "{out}");
    assert!(out.contains("(l=") && out.contains("s="), "{out}");
}

#[test]
fn tampered_objective_warns() {
    let dir = tempfile::tempdir().unwrap();
    let inst = micro(dir.path(), 3);
    let o = tampered(dir.path(), &inst, |v| {
        let obj = v["objective"].as_f64().unwrap();
        v["objective"] = Value::from(obj * 1.5 + 1.0);
    });
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn generate_corpus_writes_digests() {
    let dir = tempfile::tempdir().unwrap();
    let o = glsppl(&["generate", "--group", "A", "--seed", "5", "--count", "2", "--out-dir", "corpus"], dir.path());
    assert!(o.status.success());
    let corpus: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("corpus/corpus.json")).unwrap()).unwrap();
    let list = corpus["instances"].as_array().unwrap();
    assert_eq!(list.len(), 2);
    assert_eq!(list[1]["seed"], 6);
    assert_eq!(list[0]["sha256"].as_str().unwrap().len(), 64);
    assert!(dir.path().join("corpus/A-6.json").exists());
}

#[test]
fn benchmark_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let a = micro(dir.path(), 3);
    let b = micro(dir.path(), 5);
    std::fs::write(dir.path().join("refs.json"), r#"{"m3": 2000.0}"#).unwrap();
    let manifest = format!(
        r#"{{"instances": ["{a}", "{b}"], "methods": ["milp", "rf:s1+s11:2", "rf:s11+s11:1"], "time_limit": 30}}"#
    );
    std::fs::write(dir.path().join("bench.json"), manifest).unwrap();
    let o = glsppl(&["benchmark", "bench.json", "--out-dir", "out", "--plots"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/benchmark.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6, "{csv}");
    assert!(stdout(&o).contains("rf:s1+s11:2"));
    assert!(dir.path().join("out/m3-objective-vs-k.svg").exists());

    let r = glsppl(
        &["report", "out/benchmark.csv", "--references", "refs.json", "--out-dir", "rep"],
        dir.path(),
    );
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let report = std::fs::read_to_string(dir.path().join("rep/report.csv")).unwrap();
    let header: Vec<&str> = report.lines().next().unwrap().split(',').collect();
    let gap_col = header.iter().position(|h| *h == "gap_percent").unwrap();
    let m3 = report.lines().find(|l| l.starts_with("m3,milp")).unwrap();
    assert!(!m3.split(',').nth(gap_col).unwrap().is_empty(), "{m3}");
}
