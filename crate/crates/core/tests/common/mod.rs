//! Test oracle: exhaustive enumeration of setup patterns with a dense
//! two-phase simplex (Bland's rule) pricing the continuous variables. Built
//! straight from instance data; nothing here touches the model builder or the
//! solver under test.
#![allow(dead_code)]

pub mod checks;

use glsppl::Instance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal { objective: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

const EPS: f64 = 1e-9;

struct Tableau {
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let row = self.t[r].clone();
        for (i, other) in self.t.iter_mut().enumerate() {
            if i != r {
                let f = other[c];
                if f != 0.0 {
                    for (o, v) in other.iter_mut().zip(&row) {
                        *o -= f * v;
                    }
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost` over the tableau; `allowed` filters entering columns.
    fn optimize(&mut self, cost: &[f64], allowed: &dyn Fn(usize) -> bool) -> bool {
        let rhs = self.cols;
        loop {
            // Reduced costs.
            let mut entering = None;
            for j in 0..self.cols {
                if !allowed(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut r = cost[j];
                for (i, &b) in self.basis.iter().enumerate() {
                    r -= cost[b] * self.t[i][j];
                }
                if r < -EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][c];
                if a > EPS {
                    let ratio = self.t[i][rhs] / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - EPS || (ratio <= lr + EPS && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

/// `min c.x` subject to `rows`, `x >= 0`.
pub fn simplex(c: &[f64], rows: &[(Vec<f64>, Rel, f64)]) -> LpResult {
    let n = c.len();
    let m = rows.len();
    let mut norm: Vec<(Vec<f64>, Rel, f64)> = rows
        .iter()
        .map(|(a, rel, b)| {
            if *b < 0.0 {
                let flipped = match rel {
                    Rel::Le => Rel::Ge,
                    Rel::Ge => Rel::Le,
                    Rel::Eq => Rel::Eq,
                };
                (a.iter().map(|v| -v).collect(), flipped, -b)
            } else {
                (a.clone(), *rel, *b)
            }
        })
        .collect();
    let slack_count = norm.iter().filter(|r| r.1 != Rel::Eq).count();
    let art_count = norm.iter().filter(|r| r.1 != Rel::Le).count();
    let cols = n + slack_count + art_count;
    let art_start = n + slack_count;
    let mut t = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    let (mut s, mut a) = (n, art_start);
    for (i, (row, rel, b)) in norm.iter_mut().enumerate() {
        t[i][..n].copy_from_slice(row);
        t[i][cols] = *b;
        match rel {
            Rel::Le => {
                t[i][s] = 1.0;
                basis[i] = s;
                s += 1;
            }
            Rel::Ge => {
                t[i][s] = -1.0;
                s += 1;
                t[i][a] = 1.0;
                basis[i] = a;
                a += 1;
            }
            Rel::Eq => {
                t[i][a] = 1.0;
                basis[i] = a;
                a += 1;
            }
        }
    }
    let mut tab = Tableau { t, basis, cols };

    let phase1: Vec<f64> = (0..cols).map(|j| if j >= art_start { 1.0 } else { 0.0 }).collect();
    tab.optimize(&phase1, &|_| true);
    let infeas: f64 = tab
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= art_start)
        .map(|(i, _)| tab.t[i][cols])
        .sum();
    let scale = rows.iter().map(|r| r.2.abs()).fold(1.0, f64::max);
    if infeas > 1e-7 * scale {
        return LpResult::Infeasible;
    }
    // Drive remaining (zero-valued) artificials out of the basis.
    for i in 0..m {
        if tab.basis[i] >= art_start {
            if let Some(j) = (0..art_start).find(|&j| tab.t[i][j].abs() > EPS && !tab.basis.contains(&j)) {
                tab.pivot(i, j);
            }
        }
    }
    let mut phase2 = vec![0.0; cols];
    phase2[..n].copy_from_slice(c);
    if !tab.optimize(&phase2, &|j| j < art_start) {
        return LpResult::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.t[i][cols];
        }
    }
    let objective = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    LpResult::Optimal { objective, x }
}

/// Setup pattern: for each machine, the chosen product (global index) in
/// every subperiod.
pub type Pattern = Vec<Vec<usize>>;

pub fn patterns(inst: &Instance) -> Vec<Pattern> {
    let slots: Vec<(usize, usize)> = (0..inst.machines())
        .flat_map(|l| (0..inst.subperiod_count(l)).map(move |s| (l, s)))
        .collect();
    let radix: Vec<usize> = slots.iter().map(|&(l, _)| inst.eligible(l).len()).collect();
    let total: usize = radix.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; slots.len()];
    for _ in 0..total {
        let mut p: Pattern = (0..inst.machines())
            .map(|l| vec![0; inst.subperiod_count(l)])
            .collect();
        for (k, &(l, s)) in slots.iter().enumerate() {
            p[l][s] = inst.eligible(l)[digits[k]];
        }
        out.push(p);
        for k in 0..digits.len() {
            digits[k] += 1;
            if digits[k] < radix[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    out
}

fn prev_product(inst: &Instance, pattern: &Pattern, l: usize, s: usize) -> Option<usize> {
    if s == 0 {
        let mp = inst.machine(l);
        mp.init_setup.iter().position(|&b| b).map(|a| mp.products[a])
    } else {
        Some(pattern[l][s - 1])
    }
}

fn local(inst: &Instance, l: usize, i: usize) -> usize {
    inst.eligible(l).iter().position(|&p| p == i).unwrap()
}

/// Optimal cost of a fixed setup pattern, or `None` if no production plan
/// fits it.
pub fn price_pattern(inst: &Instance, pattern: &Pattern) -> Option<f64> {
    let (n, periods) = (inst.products(), inst.periods());
    // Columns: q for every (l, s) slot, then I+ (i, t), then I- (i, t).
    let slots: Vec<(usize, usize)> = (0..inst.machines())
        .flat_map(|l| (0..inst.subperiod_count(l)).map(move |s| (l, s)))
        .collect();
    let q0 = 0;
    let ip = slots.len();
    let im = ip + n * periods;
    let cols = im + n * periods;
    let mut c = vec![0.0; cols];
    let mut constant = 0.0;
    let mut rows: Vec<(Vec<f64>, Rel, f64)> = Vec::new();
    let mut setup_hours = vec![vec![0.0; periods]; inst.machines()];

    for (k, &(l, s)) in slots.iter().enumerate() {
        let i = pattern[l][s];
        let mp = inst.machine(l);
        let a = local(inst, l, i);
        let t = inst.period_of(l, s);
        c[q0 + k] = mp.prod_cost[a];
        let prev = prev_product(inst, pattern, l, s);
        if let Some(j) = prev {
            let b = local(inst, l, j);
            constant += mp.setup_cost[b * mp.products.len() + a];
            setup_hours[l][t] += mp.setup_time[b * mp.products.len() + a];
        }
        let mut link = vec![0.0; cols];
        link[q0 + k] = mp.proc_time[a];
        rows.push((link, Rel::Le, inst.capacity(l, t)));
        if prev != Some(i) && mp.min_lot[a] > 0.0 {
            let mut lot = vec![0.0; cols];
            lot[q0 + k] = 1.0;
            rows.push((lot, Rel::Ge, mp.min_lot[a]));
        }
    }
    for l in 0..inst.machines() {
        let mp = inst.machine(l);
        for t in 0..periods {
            let mut row = vec![0.0; cols];
            for (k, &(ll, s)) in slots.iter().enumerate() {
                if ll == l && inst.period_of(l, s) == t {
                    row[q0 + k] = mp.proc_time[local(inst, l, pattern[l][s])];
                }
            }
            let room = inst.capacity(l, t) - setup_hours[l][t];
            if room < -1e-9 {
                return None;
            }
            rows.push((row, Rel::Le, room.max(0.0)));
        }
    }
    for i in 0..n {
        for t in 0..periods {
            c[ip + i * periods + t] = inst.holding_cost(i);
            c[im + i * periods + t] = inst.backorder_cost(i);
            let mut row = vec![0.0; cols];
            let mut rhs = inst.demand(i, t);
            if t == 0 {
                rhs -= inst.init_inventory(i) - inst.init_backorder(i);
            } else {
                row[ip + i * periods + t - 1] = 1.0;
                row[im + i * periods + t - 1] = -1.0;
            }
            for (k, &(l, s)) in slots.iter().enumerate() {
                if pattern[l][s] == i && inst.period_of(l, s) == t {
                    row[q0 + k] = 1.0;
                }
            }
            row[ip + i * periods + t] = -1.0;
            row[im + i * periods + t] = 1.0;
            rows.push((row, Rel::Eq, rhs));
        }
    }
    for t in 0..periods {
        let mut row = vec![0.0; cols];
        for i in 0..n {
            row[ip + i * periods + t] = 1.0;
        }
        rows.push((row, Rel::Le, inst.warehouse_capacity()));
    }
    match simplex(&c, &rows) {
        LpResult::Optimal { objective, .. } => Some(objective + constant),
        LpResult::Infeasible => None,
        LpResult::Unbounded => panic!("pattern LP cannot be unbounded"),
    }
}

/// Minimum over the patterns accepted by `keep`.
pub fn oracle_optimum_where(inst: &Instance, keep: impl Fn(&Pattern) -> bool) -> Option<f64> {
    patterns(inst)
        .iter()
        .filter(|p| keep(p))
        .filter_map(|p| price_pattern(inst, p))
        .min_by(f64::total_cmp)
}

pub fn oracle_optimum(inst: &Instance) -> Option<f64> {
    oracle_optimum_where(inst, |_| true)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
