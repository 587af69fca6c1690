//! Benchmark sweeps, gap arithmetic and CSV reports.

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::instance::{load_instance, Instance};
use crate::milp::{BranchAndBound, SolveLimits};
use crate::rf::{allocate_time_budgets, relax_and_fix, solve_direct, RfConfig};
use crate::strategy::{Strategy, StrategyId, TieBreak};

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("reference objective must be positive, got {0}")]
pub struct GapError(pub f64);

/// `100 * (method - reference) / reference`; negative means the method beats
/// the reference.
pub fn gap_percent(f_method: f64, f_reference: f64) -> Result<f64, GapError> {
    if !(f_reference > 0.0) || !f_reference.is_finite() {
        return Err(GapError(f_reference));
    }
    Ok(100.0 * (f_method - f_reference) / f_reference)
}

/// A solution method of a sweep: `milp` or `rf:<strategy>[+<tiebreak>]:<K>`,
/// e.g. `rf:s9+s11:8` or `rf:s10:4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Milp,
    Rf { strategy: StrategyId, k: usize },
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Milp => f.write_str("milp"),
            Method::Rf { strategy, k } => write!(f, "rf:{strategy}:{k}"),
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "milp" {
            return Ok(Method::Milp);
        }
        let bad = || format!("bad method {s:?} (expected milp or rf:<strategy>[+<tiebreak>]:<K>)");
        let mut parts = s.split(':');
        if parts.next() != Some("rf") {
            return Err(bad());
        }
        let strat = parts.next().ok_or_else(bad)?;
        let k: usize = parts.next().and_then(|k| k.parse().ok()).ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        let (name, tie) = match strat.split_once('+') {
            Some((a, b)) => (a, b.parse::<TieBreak>()?),
            None => (strat, TieBreak::default()),
        };
        let strategy = name.parse::<Strategy>()?;
        Ok(Method::Rf {
            strategy: StrategyId::new(strategy, tie),
            k,
        })
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One (instance, method) result. CSV columns follow the field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub instance: String,
    pub method: String,
    pub budget: f64,
    pub status: String,
    pub objective: Option<f64>,
    pub reference: Option<f64>,
    pub gap_percent: Option<f64>,
    pub wall_time: f64,
    /// Allocated stage budgets in seconds, `;`-separated.
    pub stage_budgets: String,
}

pub const CSV_COLUMNS: [&str; 9] = [
    "instance",
    "method",
    "budget",
    "status",
    "objective",
    "reference",
    "gap_percent",
    "wall_time",
    "stage_budgets",
];

impl BenchmarkRow {
    pub fn feasible(&self) -> bool {
        self.objective.is_some()
    }
}

pub fn write_csv<W: io::Write>(rows: &[BenchmarkRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<BenchmarkRow>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Instance id to reference objective.
pub type References = BTreeMap<String, f64>;

pub fn load_references(path: &Path) -> Result<References, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(path.to_path_buf(), e))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] io::Error),
    #[error("malformed manifest or reference file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("benchmark manifest lists no {0}")]
    Empty(&'static str),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

/// A sweep: instance files, methods and one wall-clock budget per solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub instances: Vec<PathBuf>,
    pub methods: Vec<Method>,
    pub time_limit: f64,
    #[serde(default)]
    pub references: Option<PathBuf>,
}

impl Manifest {
    /// Relative paths are taken against `base`.
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(path.to_path_buf(), e))?;
        let mut m: Manifest = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in m.instances.iter_mut().chain(m.references.iter_mut()) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(m)
    }
}

pub fn instance_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Solves one instance with one method. Failures land in the row's status.
pub fn run_method(inst: &Instance, id: &str, method: Method, time_limit: f64, reference: Option<f64>) -> BenchmarkRow {
    let start = Instant::now();
    let budget = Duration::from_secs_f64(time_limit.max(1e-3));
    let (status, objective, budgets) = match method {
        Method::Milp => {
            let r = solve_direct(inst, &SolveLimits::with_time_limit(budget), &BranchAndBound);
            (r.status().to_string(), r.plan.objective(), vec![time_limit])
        }
        Method::Rf { strategy, k } => {
            let cfg = RfConfig::new(strategy, k, budget);
            match relax_and_fix(inst, &cfg) {
                Ok(rep) => (rep.terminal.to_string(), rep.objective, rep.budgets),
                Err(e) => (format!("error: {e}"), None, allocate_time_budgets(time_limit, k)),
            }
        }
    };
    let gap = objective.zip(reference).and_then(|(f, r)| gap_percent(f, r).ok());
    BenchmarkRow {
        instance: id.to_string(),
        method: method.to_string(),
        budget: time_limit,
        status,
        objective,
        reference,
        gap_percent: gap,
        wall_time: start.elapsed().as_secs_f64(),
        stage_budgets: budgets
            .iter()
            .map(|b| format!("{b:.3}"))
            .collect::<Vec<_>>()
            .join(";"),
    }
}

/// Runs every (instance, method) pair on up to `jobs` threads. Rows come back
/// instance-major in manifest order regardless of scheduling.
pub fn run_benchmark(manifest: &Manifest, jobs: usize) -> Result<Vec<BenchmarkRow>, BenchError> {
    if manifest.instances.is_empty() {
        return Err(BenchError::Empty("instances"));
    }
    if manifest.methods.is_empty() {
        return Err(BenchError::Empty("methods"));
    }
    let references = match &manifest.references {
        Some(p) => load_references(p)?,
        None => References::new(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let cells: Vec<(usize, Method)> = (0..manifest.instances.len())
        .flat_map(|i| manifest.methods.iter().map(move |&m| (i, m)))
        .collect();
    let rows = pool.install(|| {
        cells
            .par_iter()
            .map(|&(i, method)| {
                let path = &manifest.instances[i];
                let id = instance_id(path);
                let reference = references.get(&id).copied();
                match load_instance(path) {
                    Ok(inst) => run_method(&inst, &id, method, manifest.time_limit, reference),
                    Err(e) => BenchmarkRow {
                        instance: id,
                        method: method.to_string(),
                        budget: manifest.time_limit,
                        status: format!("error: {e}"),
                        objective: None,
                        reference,
                        gap_percent: None,
                        wall_time: 0.0,
                        stage_budgets: String::new(),
                    },
                }
            })
            .collect()
    });
    Ok(rows)
}

/// Win/loss counts of a method against a baseline, over instances where both
/// found a solution. `avg_gap` averages the method's gap to the baseline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub method: String,
    pub compared: usize,
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    pub no_solution: usize,
    pub avg_gap: Option<f64>,
}

pub fn aggregate(rows: &[BenchmarkRow], baseline: &str) -> Vec<Aggregate> {
    let base: BTreeMap<&str, Option<f64>> = rows
        .iter()
        .filter(|r| r.method == baseline)
        .map(|r| (r.instance.as_str(), r.objective))
        .collect();
    let mut methods: Vec<&str> = Vec::new();
    for r in rows {
        if r.method != baseline && !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    methods
        .into_iter()
        .map(|method| {
            let mut a = Aggregate {
                method: method.to_string(),
                compared: 0,
                wins: 0,
                losses: 0,
                ties: 0,
                no_solution: 0,
                avg_gap: None,
            };
            let mut gaps = Vec::new();
            for r in rows.iter().filter(|r| r.method == method) {
                let Some(f) = r.objective else {
                    a.no_solution += 1;
                    continue;
                };
                let Some(Some(b)) = base.get(r.instance.as_str()) else {
                    continue;
                };
                a.compared += 1;
                match f.total_cmp(b) {
                    std::cmp::Ordering::Less => a.wins += 1,
                    std::cmp::Ordering::Greater => a.losses += 1,
                    std::cmp::Ordering::Equal => a.ties += 1,
                }
                if let Ok(g) = gap_percent(f, *b) {
                    gaps.push(g);
                }
            }
            if !gaps.is_empty() {
                a.avg_gap = Some(gaps.iter().sum::<f64>() / gaps.len() as f64);
            }
            a
        })
        .collect()
}

/// Text table with `W`, `L`, `T` and `G(%)` columns.
pub fn format_aggregates(aggs: &[Aggregate], baseline: &str) -> String {
    let mut out = format!("against {baseline}\n{:<24} {:>4} {:>4} {:>4} {:>5} {:>9}\n", "method", "W", "L", "T", "none", "G(%)");
    for a in aggs {
        let g = a.avg_gap.map(|g| format!("{g:.2}")).unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{:<24} {:>4} {:>4} {:>4} {:>5} {:>9}\n",
            a.method, a.wins, a.losses, a.ties, a.no_solution, g
        ));
    }
    out
}

fn svg_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Objective against K for the relax-and-fix rows of one instance, one
/// polyline per strategy. `None` when the instance has no such rows.
pub fn plot_objective_vs_k(rows: &[BenchmarkRow], instance: &str) -> Option<String> {
    let mut series: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.instance == instance) {
        if let (Ok(Method::Rf { strategy, k }), Some(f)) = (r.method.parse::<Method>(), r.objective) {
            series.entry(strategy.to_string()).or_default().push((k, f));
        }
    }
    if series.is_empty() {
        return None;
    }
    let pts = series.values().flatten();
    let (kmin, kmax) = pts.clone().fold((usize::MAX, 0), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (fmin, fmax) = pts.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let sx = |k: usize| pad + (k - kmin) as f64 / (kmax - kmin).max(1) as f64 * (w - 2.0 * pad);
    let sy = |f: f64| h - pad - (f - fmin) / (fmax - fmin).max(1e-9) * (h - 2.0 * pad);
    let colors = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n<text x=\"{pad}\" y=\"20\">{} objective vs K ({fmin:.0} to {fmax:.0})</text>\n",
        svg_escape(instance)
    );
    for (n, (name, mut line)) in series.into_iter().enumerate() {
        line.sort_by_key(|p| p.0);
        let color = colors[n % colors.len()];
        let points: Vec<String> = line.iter().map(|&(k, f)| format!("{:.1},{:.1}", sx(k), sy(f))).collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" points=\"{}\"/>\n<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{}</text>\n",
            points.join(" "),
            w - pad + 4.0,
            sy(line.last().unwrap().1),
            svg_escape(&name)
        ));
    }
    svg.push_str("</svg>\n");
    Some(svg)
}

/// Objective as a percentage of the reference, one bar per row with both.
pub fn plot_percent_of_reference(rows: &[BenchmarkRow]) -> Option<String> {
    let bars: Vec<(String, f64)> = rows
        .iter()
        .filter_map(|r| {
            let (f, reference) = (r.objective?, r.reference?);
            (reference > 0.0).then(|| (format!("{} {}", r.instance, r.method), 100.0 * f / reference))
        })
        .collect();
    if bars.is_empty() {
        return None;
    }
    let top = bars.iter().map(|b| b.1).fold(100.0, f64::max);
    let (bar_h, label_w, plot_w) = (18.0, 260.0, 360.0);
    let h = bar_h * bars.len() as f64 + 30.0;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{h}\">\n",
        label_w + plot_w + 60.0
    );
    for (n, (label, pct)) in bars.iter().enumerate() {
        let y = 10.0 + n as f64 * bar_h;
        svg.push_str(&format!(
            "<text x=\"0\" y=\"{:.1}\" font-size=\"11\">{}</text><rect x=\"{label_w}\" y=\"{y:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#7570b3\"/><text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\">{pct:.1}%</text>\n",
            y + 12.0,
            svg_escape(label),
            pct / top * plot_w,
            bar_h - 4.0,
            label_w + pct / top * plot_w + 4.0,
            y + 12.0
        ));
    }
    let x100 = label_w + 100.0 / top * plot_w;
    svg.push_str(&format!(
        "<line x1=\"{x100:.1}\" y1=\"0\" x2=\"{x100:.1}\" y2=\"{h}\" stroke=\"black\" stroke-dasharray=\"4\"/>\n</svg>\n"
    ));
    Some(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(instance: &str, method: &str, objective: Option<f64>) -> BenchmarkRow {
        BenchmarkRow {
            instance: instance.into(),
            method: method.into(),
            budget: 10.0,
            status: if objective.is_some() { "completed" } else { "infeasible-at-stage(2)" }.into(),
            objective,
            reference: None,
            gap_percent: None,
            wall_time: 1.5,
            stage_budgets: "10.000".into(),
        }
    }

    #[test]
    fn gap_of_equal_values_is_zero() {
        assert_eq!(gap_percent(5.0, 5.0).unwrap(), 0.0);
        assert!(gap_percent(1.0, 0.0).is_err());
        assert!(gap_percent(1.0, -3.0).is_err());
        assert!(gap_percent(4.0, 5.0).unwrap() < gap_percent(4.5, 5.0).unwrap());
    }

    #[test]
    fn method_tokens() {
        assert_eq!("milp".parse::<Method>().unwrap(), Method::Milp);
        let m: Method = "rf:s9+s10:8".parse().unwrap();
        assert_eq!(
            m,
            Method::Rf {
                strategy: StrategyId::new(Strategy::S9, TieBreak::S10),
                k: 8
            }
        );
        assert_eq!(m.to_string(), "rf:s9+s10:8");
        assert_eq!("rf:s1:2".parse::<Method>().unwrap().to_string(), "rf:s1+s11:2");
        assert_eq!("rf:s10:3".parse::<Method>().unwrap().to_string(), "rf:s10:3");
        for bad in ["rf", "rf:s1", "rf:s12:2", "rf:s1:x", "lp", "rf:s1:2:3"] {
            assert!(bad.parse::<Method>().is_err(), "{bad}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut rows = vec![row("A1", "milp", Some(1234.5678901234)), row("A1", "rf:s1+s11:8", None)];
        rows[0].reference = Some(2000.0);
        rows[0].gap_percent = Some(-38.27160549383);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(read_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn wins_go_to_lower_objective() {
        let rows = vec![row("A1", "milp", Some(10.0)), row("A1", "rf:s1+s11:8", Some(9.0))];
        let agg = aggregate(&rows, "milp");
        assert_eq!(agg.len(), 1);
        assert_eq!((agg[0].wins, agg[0].losses), (1, 0));
        assert!((agg[0].avg_gap.unwrap() + 10.0).abs() < 1e-12);
        let flipped = aggregate(&rows, "rf:s1+s11:8");
        assert_eq!((flipped[0].wins, flipped[0].losses), (0, 1));
    }

    #[test]
    fn rows_without_solution_are_not_compared() {
        let rows = vec![
            row("A1", "milp", Some(10.0)),
            row("A1", "rf:s2+s11:8", None),
            row("A2", "milp", None),
            row("A2", "rf:s2+s11:8", Some(3.0)),
        ];
        let agg = &aggregate(&rows, "milp")[0];
        assert_eq!((agg.compared, agg.wins, agg.losses, agg.no_solution), (0, 0, 0, 1));
        assert_eq!(agg.avg_gap, None);
    }

    #[test]
    fn plots_render() {
        let rows = vec![
            row("A1", "rf:s1+s11:2", Some(10.0)),
            row("A1", "rf:s1+s11:4", Some(8.0)),
            row("A1", "milp", Some(9.0)),
        ];
        let svg = plot_objective_vs_k(&rows, "A1").unwrap();
        assert!(svg.contains("<polyline") && svg.contains("s1+s11"));
        assert!(plot_objective_vs_k(&rows, "B1").is_none());
        assert!(plot_percent_of_reference(&rows).is_none());
    }
}
