//! `glsppl` command-line tool.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success (feasible solution, valid schedule) |
//! | 1 | runtime error: unreadable or malformed file, mismatched files |
//! | 2 | usage error (bad flags, unknown strategy) |
//! | 3 | infeasible: proven for the model or at a relax-and-fix stage |
//! | 4 | time limit reached without a feasible solution |
//! | 5 | `validate` found violated constraints |
//! | 6 | solver numerical failure |

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use glsppl::bench::{
    aggregate, format_aggregates, gap_percent, instance_id, load_references, plot_objective_vs_k,
    plot_percent_of_reference, read_csv, run_benchmark, write_csv, Manifest,
};
use glsppl::generator::{generate_instance, generate_micro, Group, GENERATOR_VERSION};
use glsppl::milp::{write_lp, BranchAndBound, SolveLimits, SolveStatus};
use glsppl::model::{build_model, check_feasibility, evaluate_objective, SolutionFile};
use glsppl::rf::{relax_and_fix, solve_direct, RfConfig, TerminalStatus};
use glsppl::strategy::{Strategy, StrategyId, TieBreak};
use glsppl::load_instance;

const EXIT_ERROR: u8 = 1;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_TIMEOUT: u8 = 4;
const EXIT_INVALID: u8 = 5;
const EXIT_NUMERICAL: u8 = 6;

#[derive(Parser)]
#[command(name = "glsppl", version, about = "Lot sizing and scheduling on parallel machines")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw random instances.
    Generate(GenerateArgs),
    /// Solve an instance directly or with relax-and-fix.
    Solve(SolveArgs),
    /// Check a solution file against an instance.
    Validate(ValidateArgs),
    /// Run every method of a manifest on every instance.
    Benchmark(BenchmarkArgs),
    /// Summarize a benchmark CSV.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Instance group A..E.
    #[arg(long, required_unless_present = "micro")]
    group: Option<Group>,
    /// Draw a tiny enumeration-sized instance instead of a group instance.
    #[arg(long, conflicts_with = "group")]
    micro: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of consecutive seeds; with more than one, files go to --out-dir
    /// together with a corpus manifest.
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Output file for a single instance.
    #[arg(long, conflicts_with = "out_dir")]
    out: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Milp,
    Rf,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "rf")]
    method: MethodArg,
    #[arg(long, default_value = "s11")]
    strategy: Strategy,
    #[arg(long, default_value = "s11")]
    tiebreak: TieBreak,
    /// Number of relax-and-fix stages.
    #[arg(short = 'K', long = "stages", default_value_t = 8)]
    k: usize,
    /// Wall-clock budget in seconds.
    #[arg(long, default_value_t = 3600.0)]
    time_limit: f64,
    /// Relative optimality gap at which a solve stops.
    #[arg(long, default_value_t = 1e-4)]
    gap: f64,
    /// Do not roll unused stage time over to the next stage.
    #[arg(long)]
    no_rollover: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Also write the model in LP format.
    #[arg(long)]
    export_lp: Option<PathBuf>,
    /// Reference objective for the gap column of the summary.
    #[arg(long)]
    reference: Option<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    instance: PathBuf,
    solution: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct BenchmarkArgs {
    manifest: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Overrides the manifest's per-solve budget.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Method the others are compared against.
    #[arg(long, default_value = "milp")]
    baseline: String,
    /// Write SVG plots next to the CSV.
    #[arg(long)]
    plots: bool,
}

#[derive(Args)]
struct ReportArgs {
    csv: PathBuf,
    #[arg(long, default_value = "milp")]
    baseline: String,
    /// Fill reference and gap columns from an id-to-objective JSON map.
    #[arg(long)]
    references: Option<PathBuf>,
    /// Write SVG plots and the updated CSV here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

type CmdResult = Result<ExitCode, String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    glsppl::milp::quiet_solver_panics();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    fs::write(path, contents).map_err(|e| format!("{}: {e}", path.display()))
}

#[derive(Serialize)]
struct CorpusEntry {
    group: String,
    seed: u64,
    file: String,
    sha256: String,
}

#[derive(Serialize)]
struct Corpus {
    generator_version: u32,
    instances: Vec<CorpusEntry>,
}

fn cmd_generate(a: GenerateArgs) -> CmdResult {
    let label = match a.group {
        Some(g) => g.to_string(),
        None => "micro".to_string(),
    };
    let make = |seed: u64| -> Result<String, String> {
        let inst = match a.group {
            Some(g) => generate_instance(&g.spec(), seed).map_err(|e| e.to_string())?,
            None => generate_micro(seed),
        };
        Ok(inst.to_json())
    };
    if a.count == 0 {
        return Err("--count must be at least 1".into());
    }
    if a.count == 1 && a.out_dir.is_none() {
        let text = make(a.seed)?;
        match &a.out {
            Some(path) => write_file(path, &text)?,
            None => print!("{text}"),
        }
        return Ok(ExitCode::SUCCESS);
    }
    let dir = a
        .out_dir
        .ok_or("several instances need --out-dir")?;
    let mut corpus = Corpus {
        generator_version: GENERATOR_VERSION,
        instances: Vec::new(),
    };
    for seed in a.seed..a.seed + a.count {
        let text = make(seed)?;
        let file = format!("{label}-{seed}.json");
        write_file(&dir.join(&file), &text)?;
        corpus.instances.push(CorpusEntry {
            group: label.clone(),
            seed,
            file,
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
        });
    }
    let manifest = serde_json::to_string_pretty(&corpus).expect("corpus serializes") + "\n";
    write_file(&dir.join("corpus.json"), &manifest)?;
    Ok(ExitCode::SUCCESS)
}

fn status_exit(status: SolveStatus) -> ExitCode {
    match status {
        SolveStatus::Optimal | SolveStatus::Feasible => ExitCode::SUCCESS,
        SolveStatus::Infeasible => ExitCode::from(EXIT_INFEASIBLE),
        SolveStatus::TimeLimitNoIncumbent => ExitCode::from(EXIT_TIMEOUT),
        SolveStatus::Unbounded | SolveStatus::NumericalFailure => ExitCode::from(EXIT_NUMERICAL),
    }
}

fn terminal_exit(t: TerminalStatus) -> ExitCode {
    match t {
        TerminalStatus::Completed => ExitCode::SUCCESS,
        TerminalStatus::InfeasibleAtStage(_) => ExitCode::from(EXIT_INFEASIBLE),
        TerminalStatus::TimeoutAtStage(_) => ExitCode::from(EXIT_TIMEOUT),
        TerminalStatus::FailedAtStage(_) => ExitCode::from(EXIT_NUMERICAL),
    }
}

const SUMMARY_HEADER: &str = "instance,method,K,budget,status,objective,gap_percent";

fn cmd_solve(a: SolveArgs) -> CmdResult {
    if !(a.time_limit > 0.0 && a.time_limit.is_finite()) {
        return Err("--time-limit must be a positive number of seconds".into());
    }
    let inst = load_instance(&a.instance).map_err(|e| e.to_string())?;
    let id = instance_id(&a.instance);
    let budget = Duration::from_secs_f64(a.time_limit);
    let limits = SolveLimits {
        gap: a.gap,
        ..SolveLimits::with_time_limit(budget)
    };
    limits.validate().map_err(|e| e.to_string())?;
    let (_, vm) = build_model(&inst);
    if let Some(path) = &a.export_lp {
        write_file(path, &write_lp(&build_model(&inst).0))?;
    }

    let fmt_opt = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
    let gap = |obj: Option<f64>| {
        obj.zip(a.reference)
            .and_then(|(f, r)| gap_percent(f, r).ok())
            .map(|g| format!("{g:.2}"))
            .unwrap_or_default()
    };
    let (plan, summary, code) = match a.method {
        MethodArg::Milp => {
            let r = solve_direct(&inst, &limits, &BranchAndBound);
            let obj = r.plan.objective();
            let line = format!(
                "{id},milp,,{},{},{},{}",
                a.time_limit,
                r.status(),
                fmt_opt(obj),
                gap(obj)
            );
            let code = status_exit(r.status());
            (r.plan, line, code)
        }
        MethodArg::Rf => {
            let cfg = RfConfig {
                limits,
                rollover: !a.no_rollover,
                ..RfConfig::new(StrategyId::new(a.strategy, a.tiebreak), a.k, budget)
            };
            let mut report = relax_and_fix(&inst, &cfg).map_err(|e| e.to_string())?;
            write_file(&a.out_dir.join(format!("{id}.report.json")), &report.to_json())?;
            let line = format!(
                "{id},rf:{},{},{},{},{},{}",
                report.strategy,
                report.k,
                a.time_limit,
                report.terminal,
                fmt_opt(report.objective),
                gap(report.objective)
            );
            let code = terminal_exit(report.terminal);
            let plan = report
                .plan
                .take()
                .unwrap_or_else(|| glsppl::model::Plan::without_point(SolveStatus::Infeasible));
            (plan, line, code)
        }
    };
    if !plan.values.is_empty() {
        let file = SolutionFile::from_plan(&vm, &plan);
        write_file(&a.out_dir.join(format!("{id}.solution.json")), &file.to_json())?;
    }
    write_file(
        &a.out_dir.join(format!("{id}.summary.csv")),
        &format!("{SUMMARY_HEADER}\n{summary}\n"),
    )?;
    println!("{summary}");
    Ok(code)
}

fn cmd_validate(a: ValidateArgs) -> CmdResult {
    let inst = load_instance(&a.instance).map_err(|e| e.to_string())?;
    let text = fs::read_to_string(&a.solution).map_err(|e| format!("{}: {e}", a.solution.display()))?;
    let file = SolutionFile::from_json(&text).map_err(|e| format!("{}: {e}", a.solution.display()))?;
    let (_, vm) = build_model(&inst);
    let values = file.to_values(&vm).map_err(|e| e.to_string())?;
    let report = check_feasibility(&inst, &vm, &values, a.tol);
    let mut out = std::io::stdout().lock();
    for v in &report.violations {
        let _ = writeln!(out, "violation: {v}");
    }
    match evaluate_objective(&inst, &vm, &values) {
        Ok(b) => {
            let _ = writeln!(
                out,
                "inventory {:.6}\nbackorder {:.6}\nsetup {:.6}\nproduction {:.6}\ntotal {:.6}",
                b.inventory,
                b.backorder,
                b.setup,
                b.production,
                b.total()
            );
            if let Some(claimed) = file.objective {
                let diff = (claimed - b.total()).abs() / b.total().abs().max(1.0);
                if diff > 1e-6 {
                    eprintln!(
                        "warning: recomputed objective {:.6} disagrees with the file's objective {claimed:.6}",
                        b.total()
                    );
                }
            }
        }
        Err(e) => eprintln!("warning: cannot evaluate the objective: {e}"),
    }
    if report.is_feasible() {
        let _ = writeln!(out, "feasible");
        Ok(ExitCode::SUCCESS)
    } else {
        let _ = writeln!(out, "infeasible: {} violated constraints", report.violations.len());
        Ok(ExitCode::from(EXIT_INVALID))
    }
}

fn write_plots(rows: &[glsppl::bench::BenchmarkRow], dir: &Path) -> Result<(), String> {
    let mut ids: Vec<&str> = rows.iter().map(|r| r.instance.as_str()).collect();
    ids.dedup();
    for id in ids {
        if let Some(svg) = plot_objective_vs_k(rows, id) {
            write_file(&dir.join(format!("{id}-objective-vs-k.svg")), &svg)?;
        }
    }
    if let Some(svg) = plot_percent_of_reference(rows) {
        write_file(&dir.join("percent-of-reference.svg"), &svg)?;
    }
    Ok(())
}

fn csv_text(rows: &[glsppl::bench::BenchmarkRow]) -> Result<String, String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).map_err(|e| e.to_string())?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

fn cmd_benchmark(a: BenchmarkArgs) -> CmdResult {
    let mut manifest = Manifest::load(&a.manifest).map_err(|e| e.to_string())?;
    if let Some(t) = a.time_limit {
        manifest.time_limit = t;
    }
    if !(manifest.time_limit > 0.0) {
        return Err("the time limit must be positive".into());
    }
    let rows = run_benchmark(&manifest, a.jobs).map_err(|e| e.to_string())?;
    write_file(&a.out_dir.join("benchmark.csv"), &csv_text(&rows)?)?;
    if a.plots {
        write_plots(&rows, &a.out_dir)?;
    }
    print!("{}", format_aggregates(&aggregate(&rows, &a.baseline), &a.baseline));
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(a: ReportArgs) -> CmdResult {
    let file = fs::File::open(&a.csv).map_err(|e| format!("{}: {e}", a.csv.display()))?;
    let mut rows = read_csv(file).map_err(|e| format!("{}: {e}", a.csv.display()))?;
    if let Some(path) = &a.references {
        let refs = load_references(path).map_err(|e| e.to_string())?;
        for r in &mut rows {
            r.reference = refs.get(&r.instance).copied();
            r.gap_percent = r
                .objective
                .zip(r.reference)
                .and_then(|(f, x)| gap_percent(f, x).ok());
        }
    }
    if let Some(dir) = &a.out_dir {
        write_file(&dir.join("report.csv"), &csv_text(&rows)?)?;
        write_plots(&rows, dir)?;
    }
    print!("{}", format_aggregates(&aggregate(&rows, &a.baseline), &a.baseline));
    Ok(ExitCode::SUCCESS)
}
