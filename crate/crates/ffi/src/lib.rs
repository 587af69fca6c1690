//! C ABI over `glsppl`.
//!
//! Instances and results are opaque heap handles owned by the caller and
//! released with their `_free` function. Every call returns a
//! [`GlspplError`]; on failure a message is available from
//! [`glsppl_last_error`] until the next failing call on the same thread.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Once;
use std::time::Duration;

use glsppl::bench::gap_percent;
use glsppl::generator::{generate_instance, generate_micro, Group};
use glsppl::milp::{BranchAndBound, SolveLimits, SolveStatus};
use glsppl::model::{build_model, SolutionFile};
use glsppl::rf::{relax_and_fix, solve_direct, RfConfig, TerminalStatus};
use glsppl::strategy::{Strategy, StrategyId, TieBreak};
use glsppl::{load_instance, save_instance, Instance};

/// Error codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlspplError {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    InvalidInstance = 4,
    /// The result carries no schedule (infeasible, timed out or failed).
    NoSolution = 5,
    Panic = 6,
}

/// Solve outcome of a result handle.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlspplStatus {
    Optimal = 0,
    Feasible = 1,
    Infeasible = 2,
    TimeLimitNoIncumbent = 3,
    Unbounded = 4,
    NumericalFailure = 5,
}

impl From<SolveStatus> for GlspplStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Optimal => GlspplStatus::Optimal,
            SolveStatus::Feasible => GlspplStatus::Feasible,
            SolveStatus::Infeasible => GlspplStatus::Infeasible,
            SolveStatus::TimeLimitNoIncumbent => GlspplStatus::TimeLimitNoIncumbent,
            SolveStatus::Unbounded => GlspplStatus::Unbounded,
            SolveStatus::NumericalFailure => GlspplStatus::NumericalFailure,
        }
    }
}

/// Opaque instance handle.
pub struct GlspplInstance(Instance);

/// Opaque result handle.
pub struct GlspplResult {
    status: GlspplStatus,
    /// Relax-and-fix stage that stopped the run; 0 when none did.
    stopped_at: usize,
    objective: Option<f64>,
    best_bound: Option<f64>,
    solution: Option<String>,
    report: Option<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn fail(code: GlspplError, msg: impl Into<String>) -> GlspplError {
    set_error(msg);
    code
}

/// Runs `f`, turning a panic into [`GlspplError::Panic`].
fn guard(f: impl FnOnce() -> GlspplError) -> GlspplError {
    static QUIET: Once = Once::new();
    QUIET.call_once(glsppl::milp::quiet_solver_panics);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => fail(GlspplError::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, GlspplError> {
    if p.is_null() {
        return Err(fail(GlspplError::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(GlspplError::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> GlspplError {
    *out = Box::into_raw(Box::new(value));
    GlspplError::Ok
}

fn instance_error(e: glsppl::InstanceError) -> GlspplError {
    match e {
        glsppl::InstanceError::Io { .. } => fail(GlspplError::Io, e.to_string()),
        _ => fail(GlspplError::InvalidInstance, e.to_string()),
    }
}

/// Message of the last failing call on this thread. The pointer stays valid
/// until the next failing call on the same thread; never free it.
#[no_mangle]
pub extern "C" fn glsppl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads an instance file.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glsppl_instance_load(
    path: *const c_char,
    out: *mut *mut GlspplInstance,
) -> GlspplError {
    guard(|| {
        if out.is_null() {
            return fail(GlspplError::NullPointer, "out is null");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(e) => return e,
        };
        match load_instance(path) {
            Ok(inst) => put(out, GlspplInstance(inst)),
            Err(e) => instance_error(e),
        }
    })
}

/// Parses an instance from JSON text.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glsppl_instance_from_json(
    json: *const c_char,
    out: *mut *mut GlspplInstance,
) -> GlspplError {
    guard(|| {
        if out.is_null() {
            return fail(GlspplError::NullPointer, "out is null");
        }
        let text = match str_arg(json, "json") {
            Ok(t) => t,
            Err(e) => return e,
        };
        match Instance::from_json(text) {
            Ok(inst) => put(out, GlspplInstance(inst)),
            Err(e) => instance_error(e),
        }
    })
}

/// Draws a group instance; `group` is one of 'A'..'E'.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glsppl_instance_generate(
    group: c_char,
    seed: u64,
    out: *mut *mut GlspplInstance,
) -> GlspplError {
    guard(|| {
        if out.is_null() {
            return fail(GlspplError::NullPointer, "out is null");
        }
        let name = (group as u8 as char).to_string();
        let Ok(group) = name.parse::<Group>() else {
            return fail(GlspplError::InvalidArgument, format!("unknown group {name:?}"));
        };
        match generate_instance(&group.spec(), seed) {
            Ok(inst) => put(out, GlspplInstance(inst)),
            Err(e) => fail(GlspplError::InvalidInstance, e.to_string()),
        }
    })
}

/// Draws a tiny instance small enough for exhaustive checks.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glsppl_instance_generate_micro(
    seed: u64,
    out: *mut *mut GlspplInstance,
) -> GlspplError {
    guard(|| {
        if out.is_null() {
            return fail(GlspplError::NullPointer, "out is null");
        }
        put(out, GlspplInstance(generate_micro(seed)))
    })
}

/// Writes an instance file.
///
/// # Safety
/// `inst` must come from this library; `path` must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn glsppl_instance_save(
    inst: *const GlspplInstance,
    path: *const c_char,
) -> GlspplError {
    guard(|| {
        let Some(inst) = inst.as_ref() else {
            return fail(GlspplError::NullPointer, "instance is null");
        };
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(e) => return e,
        };
        match save_instance(&inst.0, path) {
            Ok(()) => GlspplError::Ok,
            Err(e) => instance_error(e),
        }
    })
}

/// Number of setup-state triples (binary variables) of the instance.
///
/// # Safety
/// `inst` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glsppl_instance_triple_count(
    inst: *const GlspplInstance,
    out: *mut usize,
) -> GlspplError {
    guard(|| match (inst.as_ref(), out.as_mut()) {
        (Some(inst), Some(out)) => {
            *out = inst.0.triple_count();
            GlspplError::Ok
        }
        _ => fail(GlspplError::NullPointer, "instance or out is null"),
    })
}

/// Releases an instance. Null is ignored.
///
/// # Safety
/// `inst` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn glsppl_instance_free(inst: *mut GlspplInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

fn limits(time_limit: f64, gap: f64) -> Result<SolveLimits, GlspplError> {
    if !(time_limit > 0.0 && time_limit.is_finite()) {
        return Err(fail(GlspplError::InvalidArgument, "time limit must be positive"));
    }
    let limits = SolveLimits {
        gap,
        ..SolveLimits::with_time_limit(Duration::from_secs_f64(time_limit))
    };
    limits
        .validate()
        .map_err(|e| fail(GlspplError::InvalidArgument, e.to_string()))?;
    Ok(limits)
}

/// Solves the full model with the embedded branch-and-bound engine.
///
/// # Safety
/// `inst` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glsppl_solve_milp(
    inst: *const GlspplInstance,
    time_limit: f64,
    gap: f64,
    out: *mut *mut GlspplResult,
) -> GlspplError {
    guard(|| {
        let Some(inst) = inst.as_ref() else {
            return fail(GlspplError::NullPointer, "instance is null");
        };
        if out.is_null() {
            return fail(GlspplError::NullPointer, "out is null");
        }
        let limits = match limits(time_limit, gap) {
            Ok(l) => l,
            Err(e) => return e,
        };
        let r = solve_direct(&inst.0, &limits, &BranchAndBound);
        let (_, vm) = build_model(&inst.0);
        let solution = (!r.plan.values.is_empty()).then(|| SolutionFile::from_plan(&vm, &r.plan).to_json());
        put(
            out,
            GlspplResult {
                status: r.status().into(),
                stopped_at: 0,
                objective: r.plan.objective(),
                best_bound: r.plan.best_bound,
                solution,
                report: None,
            },
        )
    })
}

/// Runs relax-and-fix. `strategy` is a token `s1`..`s11`; `tiebreak` is
/// `s10`, `s11` or null for the default.
///
/// # Safety
/// `inst` must come from this library, strings must be nul-terminated and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glsppl_relax_and_fix(
    inst: *const GlspplInstance,
    strategy: *const c_char,
    tiebreak: *const c_char,
    k: usize,
    time_limit: f64,
    gap: f64,
    out: *mut *mut GlspplResult,
) -> GlspplError {
    guard(|| {
        let Some(inst) = inst.as_ref() else {
            return fail(GlspplError::NullPointer, "instance is null");
        };
        if out.is_null() {
            return fail(GlspplError::NullPointer, "out is null");
        }
        let strategy: Strategy = match str_arg(strategy, "strategy").map(str::parse) {
            Ok(Ok(s)) => s,
            Ok(Err(e)) => return fail(GlspplError::InvalidArgument, format!("{e}")),
            Err(e) => return e,
        };
        let tiebreak: TieBreak = if tiebreak.is_null() {
            TieBreak::default()
        } else {
            match str_arg(tiebreak, "tiebreak").map(str::parse) {
                Ok(Ok(t)) => t,
                Ok(Err(e)) => return fail(GlspplError::InvalidArgument, format!("{e}")),
                Err(e) => return e,
            }
        };
        let limits = match limits(time_limit, gap) {
            Ok(l) => l,
            Err(e) => return e,
        };
        let cfg = RfConfig {
            limits,
            ..RfConfig::new(StrategyId::new(strategy, tiebreak), k, Duration::from_secs_f64(time_limit))
        };
        let report = match relax_and_fix(&inst.0, &cfg) {
            Ok(r) => r,
            Err(e) => return fail(GlspplError::InvalidArgument, e.to_string()),
        };
        let (status, stopped_at) = match report.terminal {
            TerminalStatus::Completed => (
                report.plan.as_ref().map_or(GlspplStatus::Feasible, |p| p.status.into()),
                0,
            ),
            TerminalStatus::InfeasibleAtStage(s) => (GlspplStatus::Infeasible, s),
            TerminalStatus::TimeoutAtStage(s) => (GlspplStatus::TimeLimitNoIncumbent, s),
            TerminalStatus::FailedAtStage(s) => (GlspplStatus::NumericalFailure, s),
        };
        let (_, vm) = build_model(&inst.0);
        let solution = report.plan.as_ref().map(|p| SolutionFile::from_plan(&vm, p).to_json());
        let json = CString::new(report.to_json()).expect("JSON has no nul bytes");
        put(
            out,
            GlspplResult {
                status,
                stopped_at,
                objective: report.objective,
                best_bound: report.best_bound,
                solution,
                report: Some(json),
            },
        )
    })
}

/// Solve outcome.
///
/// # Safety
/// `res` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glsppl_result_status(
    res: *const GlspplResult,
    out: *mut GlspplStatus,
) -> GlspplError {
    guard(|| match (res.as_ref(), out.as_mut()) {
        (Some(res), Some(out)) => {
            *out = res.status;
            GlspplError::Ok
        }
        _ => fail(GlspplError::NullPointer, "result or out is null"),
    })
}

/// Relax-and-fix stage (1-based) that ended the run early; 0 otherwise.
///
/// # Safety
/// `res` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glsppl_result_stopped_at_stage(
    res: *const GlspplResult,
    out: *mut usize,
) -> GlspplError {
    guard(|| match (res.as_ref(), out.as_mut()) {
        (Some(res), Some(out)) => {
            *out = res.stopped_at;
            GlspplError::Ok
        }
        _ => fail(GlspplError::NullPointer, "result or out is null"),
    })
}

unsafe fn number(res: *const GlspplResult, out: *mut f64, pick: fn(&GlspplResult) -> Option<f64>) -> GlspplError {
    guard(|| match (res.as_ref(), out.as_mut()) {
        (Some(res), Some(out)) => match pick(res) {
            Some(v) => {
                *out = v;
                GlspplError::Ok
            }
            None => fail(GlspplError::NoSolution, "the result has no such value"),
        },
        _ => fail(GlspplError::NullPointer, "result or out is null"),
    })
}

/// Objective of the schedule; `NoSolution` when there is none.
///
/// # Safety
/// `res` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glsppl_result_objective(res: *const GlspplResult, out: *mut f64) -> GlspplError {
    number(res, out, |r| r.objective)
}

/// Proven lower bound; `NoSolution` when none is known.
///
/// # Safety
/// `res` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glsppl_result_best_bound(res: *const GlspplResult, out: *mut f64) -> GlspplError {
    number(res, out, |r| r.best_bound)
}

/// Writes the schedule as a JSON solution file.
///
/// # Safety
/// `res` must come from this library and `path` be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn glsppl_result_write_solution(
    res: *const GlspplResult,
    path: *const c_char,
) -> GlspplError {
    guard(|| {
        let Some(res) = res.as_ref() else {
            return fail(GlspplError::NullPointer, "result is null");
        };
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(e) => return e,
        };
        let Some(text) = &res.solution else {
            return fail(GlspplError::NoSolution, "the result has no schedule");
        };
        match std::fs::write(path, text) {
            Ok(()) => GlspplError::Ok,
            Err(e) => fail(GlspplError::Io, format!("{path}: {e}")),
        }
    })
}

/// Relax-and-fix run report as JSON, or null for direct solves. Owned by the
/// result; valid until it is freed.
///
/// # Safety
/// `res` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn glsppl_result_report_json(res: *const GlspplResult) -> *const c_char {
    match res.as_ref().and_then(|r| r.report.as_ref()) {
        Some(s) => s.as_ptr(),
        None => ptr::null(),
    }
}

/// Releases a result. Null is ignored.
///
/// # Safety
/// `res` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn glsppl_result_free(res: *mut GlspplResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Relative gap of `value` against a positive `reference`, in percent.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glsppl_gap_percent(value: f64, reference: f64, out: *mut f64) -> GlspplError {
    guard(|| {
        let Some(out) = out.as_mut() else {
            return fail(GlspplError::NullPointer, "out is null");
        };
        match gap_percent(value, reference) {
            Ok(g) => {
                *out = g;
                GlspplError::Ok
            }
            Err(e) => fail(GlspplError::InvalidArgument, e.to_string()),
        }
    })
}
