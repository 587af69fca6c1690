//! Range and identity checks for generated group instances, written from the
//! generation table rather than the generator code.

use glsppl::generator::{GroupSpec, PERIODS, SUBPERIODS};
use glsppl::Instance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn within(v: f64, (lo, hi): (f64, f64)) -> bool {
    let slack = TOL * hi.abs().max(1.0);
    v >= lo - slack && v <= hi + slack
}

/// Period demands drawn independently from the documented RNG layout: one
/// ChaCha8 stream per parameter family, family 2 for period demand.
pub fn period_demands(spec: &GroupSpec, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    let (lo, hi) = spec.period_demand;
    (0..PERIODS).map(|_| rng.gen_range(lo..=hi)).collect()
}

/// Every failed check for `inst`, generated from `spec` with `seed`.
pub fn conformance(inst: &Instance, spec: &GroupSpec, seed: u64) -> Vec<String> {
    let mut bad = Vec::new();
    let mut check = |ok: bool, what: String| {
        if !ok {
            bad.push(what);
        }
    };
    let (m, n) = (inst.machines(), inst.products());
    check(m == spec.m && n == spec.n, format!("shape {m}x{n}"));
    check(inst.periods() == PERIODS, "periods".into());
    check(
        within(inst.warehouse_capacity(), spec.warehouse),
        format!("warehouse {}", inst.warehouse_capacity()),
    );

    let d_t = period_demands(spec, seed);
    for (t, &want) in d_t.iter().enumerate() {
        let got: f64 = (0..n).map(|i| inst.demand(i, t)).sum();
        check((got - want).abs() <= 1e-9 * want, format!("sum_i d(i,{t}) = {got} vs {want}"));
        check(within(want, spec.period_demand), format!("d_{t} = {want}"));
    }
    // Shares are fixed per product: d(i,t) / d_t is the same in every period,
    // and the raw shares lie in [0.05, 0.9], so no ratio exceeds 18.
    let shares: Vec<f64> = (0..n).map(|i| inst.demand(i, 0) / d_t[0]).collect();
    for i in 0..n {
        for t in 1..PERIODS {
            let s = inst.demand(i, t) / d_t[t];
            check((s - shares[i]).abs() <= 1e-9, format!("share of product {i} drifts at t={t}"));
        }
    }
    let (smin, smax) = shares.iter().fold((f64::MAX, 0.0f64), |(a, b), &s| (a.min(s), b.max(s)));
    check(smax / smin <= 18.0 + 1e-9, format!("share ratio {}", smax / smin));

    for i in 0..n {
        let h = inst.holding_cost(i);
        check(within(h, spec.holding), format!("h_{i} = {h}"));
        let ratio = inst.backorder_cost(i) / h;
        check(within(ratio, (10.0, 15.0)), format!("g/h for {i} = {ratio}"));
        check(within(inst.init_inventory(i), spec.init_inventory), format!("I+_{i}0"));
        check(within(inst.init_backorder(i), spec.init_backorder), format!("I-_{i}0"));
        check(!inst.machines_of(i).is_empty(), format!("product {i} unassigned"));
    }
    let stock: f64 = (0..n).map(|i| inst.init_inventory(i)).sum();
    check(stock <= inst.warehouse_capacity(), format!("initial stock {stock}"));

    let mut setup_sum = 0.0;
    let mut setup_count = 0usize;
    for l in 0..m {
        let mp = inst.machine(l);
        let k = mp.len();
        setup_sum += mp.setup_time.iter().sum::<f64>();
        setup_count += k * (k - 1);
    }
    let mean_setup = setup_sum / setup_count as f64;

    for l in 0..m {
        let mp = inst.machine(l);
        let k = mp.len();
        check(
            (spec.eligible.0..=spec.eligible.1).contains(&k),
            format!("|I_{l}| = {k}"),
        );
        check(inst.subperiod_count(l) == PERIODS * SUBPERIODS, format!("w on machine {l}"));
        for t in 0..PERIODS {
            check(inst.capacity(l, t) == 160.0, format!("C^P({l},{t})"));
        }
        check(mp.init_setup.iter().all(|&b| !b), format!("machine {l} starts configured"));
        for a in 0..k {
            let p = mp.proc_time[a];
            check(within(p, spec.proc_time), format!("p on {l}: {p}"));
            let r = mp.prod_cost[a] / p;
            check(within(r, (0.8, 1.2)), format!("c^P/p on {l}: {r}"));
            // Lot = floor(8 hours x shifts / p).
            let lot = mp.min_lot[a];
            check(lot == lot.floor(), format!("fractional lot {lot}"));
            let (lo, hi) = spec.min_lot_shifts;
            check(
                lot <= 8.0 * hi / p + TOL && lot > 8.0 * lo / p - 1.0 - TOL,
                format!("lot {lot} for p {p}"),
            );
            for b in 0..k {
                let e = mp.setup_time[a * k + b];
                let c = mp.setup_cost[a * k + b];
                if a == b {
                    check(e == 0.0 && c == 0.0, format!("diagonal setup on {l}"));
                } else {
                    check(within(e, spec.setup_time), format!("e on {l}: {e}"));
                    check(
                        within(c * mean_setup / e, spec.setup_cost_scale),
                        format!("c^S scale on {l}: {}", c * mean_setup / e),
                    );
                }
            }
        }
    }
    bad
}
