//! JSON instance files.
//!
//! Top-level keys mirror the instance fields one to one. Dense tables are
//! nested arrays (`[machine][period]`, `[product][period]`); pair and setup
//! parameters are entry lists with explicit 1-based indices. Unknown keys are
//! rejected and the `format` field is mandatory.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Instance, InstanceError, InstanceParts, MachineProducts};

pub const INSTANCE_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairEntry {
    pub product: usize,
    pub machine: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupEntry {
    pub from: usize,
    pub to: usize,
    pub machine: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupStateEntry {
    pub product: usize,
    pub machine: usize,
    pub value: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub format: u32,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub subperiods_per_period: Vec<Vec<usize>>,
    pub eligible_products: Vec<Vec<usize>>,
    pub warehouse_capacity: f64,
    pub machine_capacity: Vec<Vec<f64>>,
    pub demand: Vec<Vec<f64>>,
    pub holding_cost: Vec<f64>,
    pub backorder_cost: Vec<f64>,
    pub proc_time: Vec<PairEntry>,
    pub prod_cost: Vec<PairEntry>,
    pub min_lot: Vec<PairEntry>,
    pub setup_time: Vec<SetupEntry>,
    pub setup_cost: Vec<SetupEntry>,
    pub init_inventory: Vec<f64>,
    pub init_backorder: Vec<f64>,
    pub init_setup: Vec<SetupStateEntry>,
}

fn invalid<T>(msg: String) -> Result<T, InstanceError> {
    Err(InstanceError::Invalid(msg))
}

/// Scatters a pair-entry list onto per-machine arrays aligned with the
/// eligible sets; every eligible pair must appear exactly once.
fn scatter_pairs(
    name: &str,
    entries: &[PairEntry],
    eligible: &[Vec<usize>],
) -> Result<Vec<Vec<f64>>, InstanceError> {
    let mut seen: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in entries {
        let key = (e.product, e.machine);
        if seen.insert(key, e.value).is_some() {
            return invalid(format!(
                "{name}: duplicate entry for product {} machine {}",
                e.product, e.machine
            ));
        }
    }
    let mut out = Vec::with_capacity(eligible.len());
    for (l, prods) in eligible.iter().enumerate() {
        let mut row = Vec::with_capacity(prods.len());
        for &i in prods {
            match seen.remove(&(i + 1, l + 1)) {
                Some(v) => row.push(v),
                None => {
                    return invalid(format!(
                        "{name}: missing entry for product {} machine {}",
                        i + 1,
                        l + 1
                    ))
                }
            }
        }
        out.push(row);
    }
    if let Some(((i, l), _)) = seen.into_iter().next() {
        return invalid(format!(
            "{name}: entry for non-eligible pair product {i} machine {l}"
        ));
    }
    Ok(out)
}

fn scatter_setups(
    name: &str,
    entries: &[SetupEntry],
    eligible: &[Vec<usize>],
) -> Result<Vec<Vec<f64>>, InstanceError> {
    let mut seen: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
    for e in entries {
        if seen.insert((e.from, e.to, e.machine), e.value).is_some() {
            return invalid(format!(
                "{name}: duplicate entry for ({}, {}) on machine {}",
                e.from, e.to, e.machine
            ));
        }
    }
    let mut out = Vec::with_capacity(eligible.len());
    for (l, prods) in eligible.iter().enumerate() {
        let mut matrix = Vec::with_capacity(prods.len() * prods.len());
        for &i in prods {
            for &j in prods {
                match seen.remove(&(i + 1, j + 1, l + 1)) {
                    Some(v) => matrix.push(v),
                    None => {
                        return invalid(format!(
                            "{name}: missing entry for ({}, {}) on machine {}",
                            i + 1,
                            j + 1,
                            l + 1
                        ))
                    }
                }
            }
        }
        out.push(matrix);
    }
    if let Some(((i, j, l), _)) = seen.into_iter().next() {
        return invalid(format!(
            "{name}: entry for non-eligible setup ({i}, {j}) on machine {l}"
        ));
    }
    Ok(out)
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance, InstanceError> {
        if self.format != INSTANCE_FORMAT {
            return Err(InstanceError::Format(self.format));
        }
        if self.eligible_products.len() != self.m {
            return invalid(format!(
                "eligible_products has {} rows, expected m = {}",
                self.eligible_products.len(),
                self.m
            ));
        }
        let mut eligible = Vec::with_capacity(self.m);
        for (l, row) in self.eligible_products.iter().enumerate() {
            let mut prods = Vec::with_capacity(row.len());
            for &i in row {
                if i == 0 || i > self.n {
                    return invalid(format!("machine {} lists unknown product {i}", l + 1));
                }
                prods.push(i - 1);
            }
            prods.sort_unstable();
            if prods.windows(2).any(|w| w[0] == w[1]) {
                return invalid(format!("machine {} lists a product twice", l + 1));
            }
            eligible.push(prods);
        }
        let proc_time = scatter_pairs("proc_time", &self.proc_time, &eligible)?;
        let prod_cost = scatter_pairs("prod_cost", &self.prod_cost, &eligible)?;
        let min_lot = scatter_pairs("min_lot", &self.min_lot, &eligible)?;
        let setup_time = scatter_setups("setup_time", &self.setup_time, &eligible)?;
        let setup_cost = scatter_setups("setup_cost", &self.setup_cost, &eligible)?;
        let as_pairs: Vec<PairEntry> = self
            .init_setup
            .iter()
            .map(|e| PairEntry {
                product: e.product,
                machine: e.machine,
                value: f64::from(e.value),
            })
            .collect();
        if let Some(e) = self.init_setup.iter().find(|e| e.value > 1) {
            return invalid(format!(
                "init_setup for product {} machine {} must be 0 or 1",
                e.product, e.machine
            ));
        }
        let init_setup = scatter_pairs("init_setup", &as_pairs, &eligible)?;

        let machine_products = eligible
            .into_iter()
            .enumerate()
            .map(|(l, products)| MachineProducts {
                products,
                proc_time: proc_time[l].clone(),
                prod_cost: prod_cost[l].clone(),
                min_lot: min_lot[l].clone(),
                setup_time: setup_time[l].clone(),
                setup_cost: setup_cost[l].clone(),
                init_setup: init_setup[l].iter().map(|&v| v > 0.5).collect(),
            })
            .collect();

        Instance::new(InstanceParts {
            machines: self.m,
            products: self.n,
            periods: self.t,
            subperiods: self.subperiods_per_period,
            warehouse_capacity: self.warehouse_capacity,
            machine_capacity: self.machine_capacity,
            demand: self.demand,
            holding_cost: self.holding_cost,
            backorder_cost: self.backorder_cost,
            init_inventory: self.init_inventory,
            init_backorder: self.init_backorder,
            machine_products,
        })
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let p = inst.parts();
        let mut proc_time = Vec::new();
        let mut prod_cost = Vec::new();
        let mut min_lot = Vec::new();
        let mut init_setup = Vec::new();
        let mut setup_time = Vec::new();
        let mut setup_cost = Vec::new();
        // Entries are emitted product-major so files read like the math.
        for i in 0..p.products {
            for &l in inst.machines_of(i) {
                let mp = &p.machine_products[l];
                let a = mp.local_index(i).expect("eligible");
                let pair = |value| PairEntry {
                    product: i + 1,
                    machine: l + 1,
                    value,
                };
                proc_time.push(pair(mp.proc_time[a]));
                prod_cost.push(pair(mp.prod_cost[a]));
                min_lot.push(pair(mp.min_lot[a]));
                init_setup.push(SetupStateEntry {
                    product: i + 1,
                    machine: l + 1,
                    value: u8::from(mp.init_setup[a]),
                });
            }
        }
        for (l, mp) in p.machine_products.iter().enumerate() {
            for (a, &i) in mp.products.iter().enumerate() {
                for (b, &j) in mp.products.iter().enumerate() {
                    let entry = |value| SetupEntry {
                        from: i + 1,
                        to: j + 1,
                        machine: l + 1,
                        value,
                    };
                    setup_time.push(entry(mp.setup_time(a, b)));
                    setup_cost.push(entry(mp.setup_cost(a, b)));
                }
            }
        }
        Self {
            format: INSTANCE_FORMAT,
            m: p.machines,
            n: p.products,
            t: p.periods,
            subperiods_per_period: p.subperiods.clone(),
            eligible_products: p
                .machine_products
                .iter()
                .map(|mp| mp.products.iter().map(|i| i + 1).collect())
                .collect(),
            warehouse_capacity: p.warehouse_capacity,
            machine_capacity: p.machine_capacity.clone(),
            demand: p.demand.clone(),
            holding_cost: p.holding_cost.clone(),
            backorder_cost: p.backorder_cost.clone(),
            proc_time,
            prod_cost,
            min_lot,
            setup_time,
            setup_cost,
            init_inventory: p.init_inventory.clone(),
            init_backorder: p.init_backorder.clone(),
            init_setup,
        }
    }
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Instance, InstanceError> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.into_instance()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&InstanceFile::from_instance(self))
            .expect("instance serializes");
        s.push('\n');
        s
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Instance::from_json(&text)
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    std::fs::write(path, inst.to_json()).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::minimal_parts;

    #[test]
    fn minimal_file_loads() {
        let text = r#"{
            "format": 1, "m": 1, "n": 1, "T": 1,
            "subperiods_per_period": [[1]],
            "eligible_products": [[1]],
            "warehouse_capacity": 10,
            "machine_capacity": [[8]],
            "demand": [[3]],
            "holding_cost": [1], "backorder_cost": [5],
            "proc_time": [{"product": 1, "machine": 1, "value": 0.5}],
            "prod_cost": [{"product": 1, "machine": 1, "value": 1}],
            "min_lot": [{"product": 1, "machine": 1, "value": 2}],
            "setup_time": [{"from": 1, "to": 1, "machine": 1, "value": 0}],
            "setup_cost": [{"from": 1, "to": 1, "machine": 1, "value": 0}],
            "init_inventory": [0], "init_backorder": [0],
            "init_setup": [{"product": 1, "machine": 1, "value": 0}]
        }"#;
        let inst = Instance::from_json(text).unwrap();
        assert_eq!(inst.triple_count(), 1);
        assert_eq!(inst.proc_time(0, 0), Some(0.5));
    }

    fn two_product_file() -> InstanceFile {
        let mut parts = minimal_parts();
        parts.products = 2;
        parts.demand.push(vec![1.0]);
        parts.holding_cost.push(1.0);
        parts.backorder_cost.push(2.0);
        parts.init_inventory.push(0.0);
        parts.init_backorder.push(0.0);
        parts.machine_products[0] = MachineProducts {
            products: vec![0, 1],
            proc_time: vec![1.0, 2.0],
            prod_cost: vec![1.0, 1.0],
            min_lot: vec![0.0, 0.0],
            setup_time: vec![0.0, 1.0, 1.0, 0.0],
            setup_cost: vec![0.0, 3.0, 4.0, 0.0],
            init_setup: vec![false, true],
        };
        InstanceFile::from_instance(&Instance::new(parts).unwrap())
    }

    #[test]
    fn orphan_product_is_named() {
        let mut file = two_product_file();
        file.eligible_products = vec![vec![1]];
        file.proc_time.retain(|e| e.product == 1);
        file.prod_cost.retain(|e| e.product == 1);
        file.min_lot.retain(|e| e.product == 1);
        file.init_setup.retain(|e| e.product == 1);
        file.setup_time.retain(|e| e.from == 1 && e.to == 1);
        file.setup_cost.retain(|e| e.from == 1 && e.to == 1);
        let err = file.into_instance().unwrap_err().to_string();
        assert!(err.contains("orphan product 2"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v = serde_json::to_value(two_product_file()).unwrap();
        v["colour"] = serde_json::json!("blue");
        let err = Instance::from_json(&v.to_string()).unwrap_err();
        assert!(matches!(err, InstanceError::Parse(_)));
    }

    #[test]
    fn format_is_mandatory_and_checked() {
        let mut v = serde_json::to_value(two_product_file()).unwrap();
        v.as_object_mut().unwrap().remove("format");
        assert!(matches!(
            Instance::from_json(&v.to_string()),
            Err(InstanceError::Parse(_))
        ));
        v["format"] = serde_json::json!(2);
        assert!(matches!(
            Instance::from_json(&v.to_string()),
            Err(InstanceError::Format(2))
        ));
    }

    #[test]
    fn pair_entries_must_cover_eligible_pairs_exactly() {
        let mut file = two_product_file();
        file.min_lot.pop();
        assert!(file.into_instance().unwrap_err().to_string().contains("missing"));

        let mut file = two_product_file();
        file.prod_cost.push(PairEntry {
            product: 1,
            machine: 1,
            value: 9.0,
        });
        assert!(file.into_instance().unwrap_err().to_string().contains("duplicate"));
    }

    #[test]
    fn loader_accepts_nonzero_setup_diagonal() {
        let mut file = two_product_file();
        for e in file.setup_time.iter_mut().filter(|e| e.from == e.to) {
            e.value = 0.5;
        }
        let inst = file.into_instance().unwrap();
        assert_eq!(inst.machine(0).setup_time(0, 0), 0.5);
    }

    #[test]
    fn json_round_trip() {
        let file = two_product_file();
        let inst = file.clone().into_instance().unwrap();
        let back = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(inst, back);
        assert_eq!(back.machine(0).initial_product(), Some(1));
    }
}
