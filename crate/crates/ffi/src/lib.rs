//! C ABI for the simulator.
//!
//! Every call returns a [`HoampStatus`]; on failure the message is available
//! from [`hoamp_last_error`] on the same thread. Reports are opaque handles
//! released with their `_free` function. Strings returned to the caller are
//! released with [`hoamp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hoamp_core::dynamics::{overlap_weight, phase_delta, OscillatorParams};
use hoamp_core::factoring::{run_factoring, FactoringConfig, IterationRecord, RunReport};
use hoamp_core::schedule::AlphaSchedule;
use hoamp_core::search::{run_search, BlackBox, SearchConfig, SearchReport};
use hoamp_core::solver::{
    run_solver, ConstraintSystem, MarkerBank, SolverPolicy, SolverReport, WeightMode,
};
use hoamp_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoampStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    /// No factor in range, infeasible system or no solution found.
    Infeasible = 4,
    OutOfRange = 5,
    Runtime = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoampWeightMode {
    Max = 0,
    SumClipped = 1,
}

/// One factoring iteration.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HoampRecord {
    pub l: u64,
    pub t_l: f64,
    pub alpha: f64,
    pub pr_e: f64,
    pub c_l: f64,
    pub lambda_l: f64,
    pub fidelity: f64,
}

impl From<&IterationRecord> for HoampRecord {
    fn from(r: &IterationRecord) -> Self {
        Self {
            l: r.l as u64,
            t_l: r.t_l,
            alpha: r.alpha_mag,
            pr_e: r.pr_e,
            c_l: r.c_l,
            lambda_l: r.lambda_l,
            fidelity: r.fidelity,
        }
    }
}

pub struct HoampFactorReport(RunReport);
pub struct HoampSearchReport(SearchReport);
pub struct HoampSolveReport(SolverReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HoampStatus {
    match e {
        Error::EmptyRange(_)
        | Error::NoFactorInRange(_)
        | Error::InfeasibleSystem(_)
        | Error::NoSolutionFound { .. }
        | Error::ConditionedMassVanished(_) => HoampStatus::Infeasible,
        Error::InvalidConfig(_)
        | Error::InvalidParams(_)
        | Error::InvalidAmplitude(_)
        | Error::Parse(_) => HoampStatus::InvalidArgument,
        _ => HoampStatus::Runtime,
    }
}

/// Run `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), (HoampStatus, String)>) -> HoampStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HoampStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            HoampStatus::Panic
        }
    }
}

fn core<T>(r: hoamp_core::Result<T>) -> Result<T, (HoampStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (HoampStatus, String) {
    (HoampStatus::NullPointer, format!("{what} is null"))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

fn json<T: serde::Serialize>(
    value: &T,
    out: *mut *mut c_char,
) -> Result<(), (HoampStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let text = serde_json::to_string(value).map_err(|e| (HoampStatus::Runtime, e.to_string()))?;
    unsafe { *out = to_c_string(text) };
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn hoamp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn hoamp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hoamp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `|ε|²` for marker magnitude `alpha` and reduced phase difference `angle`.
#[no_mangle]
pub extern "C" fn hoamp_overlap_weight(alpha: f64, angle: f64) -> f64 {
    overlap_weight(alpha, angle)
}

/// Reduced phase `g·t·(target − trial)` in (−π, π].
///
/// # Safety
/// `angle` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hoamp_phase_delta(
    g: f64,
    target: i64,
    trial: i64,
    t: f64,
    angle: *mut f64,
) -> HoampStatus {
    guard(|| {
        if angle.is_null() {
            return Err(null("angle"));
        }
        let params = core(OscillatorParams::linear(g))?;
        let d = core(phase_delta(&params, target as i128, trial as i128, t))?;
        *angle = d.angle;
        Ok(())
    })
}

/// Factor `n` with random times, constant `|α|`, stopping at `stop_fidelity`
/// or after `l_max` iterations.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hoamp_factor(
    n: u64,
    seed: u64,
    alpha: f64,
    l_max: u32,
    stop_fidelity: f64,
    out: *mut *mut HoampFactorReport,
) -> HoampStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let config = FactoringConfig {
            alpha: AlphaSchedule::Constant(alpha),
            l_max: l_max as usize,
            stop_fidelity,
            ..FactoringConfig::new(n, seed)
        };
        let report = core(run_factoring(&config))?;
        *out = Box::into_raw(Box::new(HoampFactorReport(report)));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or come from [`hoamp_factor`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hoamp_factor_report_free(report: *mut HoampFactorReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of iterations performed; 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hoamp_factor_report_len(report: *const HoampFactorReport) -> u64 {
    report.as_ref().map_or(0, |r| r.0.records.len() as u64)
}

/// # Safety
/// `report` must be null or a live handle; `record` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hoamp_factor_report_record(
    report: *const HoampFactorReport,
    index: u64,
    record: *mut HoampRecord,
) -> HoampStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if record.is_null() {
            return Err(null("record"));
        }
        let rec =
            r.0.records
                .get(index as usize)
                .ok_or((HoampStatus::OutOfRange, format!("no record {index}")))?;
        *record = rec.into();
        Ok(())
    })
}

/// Final fidelity with the factor state; NaN for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hoamp_factor_report_fidelity(report: *const HoampFactorReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.0.final_fidelity)
}

/// The sampled pair. Returns `Infeasible` when its product is not `n`.
///
/// # Safety
/// `report` must be null or a live handle; `r` and `s` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hoamp_factor_report_factors(
    report: *const HoampFactorReport,
    r: *mut u64,
    s: *mut u64,
) -> HoampStatus {
    guard(|| {
        let rep = report.as_ref().ok_or_else(|| null("report"))?;
        if r.is_null() || s.is_null() {
            return Err(null("output"));
        }
        let pair = rep.0.sampled_pair.as_slice();
        *r = pair[0];
        *s = pair[1];
        match rep.0.sampled_factors {
            Some(_) => Ok(()),
            None => Err((
                HoampStatus::Infeasible,
                format!("sampled {} is not a factorization", rep.0.sampled_pair),
            )),
        }
    })
}

/// Full report as JSON; free with [`hoamp_string_free`].
///
/// # Safety
/// `report` must be null or a live handle; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hoamp_factor_report_json(
    report: *const HoampFactorReport,
    out: *mut *mut c_char,
) -> HoampStatus {
    guard(|| json(&report.as_ref().ok_or_else(|| null("report"))?.0, out))
}

/// Search `0..domain` for the `count` indices in `solutions`.
///
/// # Safety
/// `solutions` must point to `count` values (or be null when `count` is 0);
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hoamp_search(
    domain: u64,
    solutions: *const u64,
    count: u64,
    seed: u64,
    alpha: f64,
    out: *mut *mut HoampSearchReport,
) -> HoampStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let marked = if count == 0 {
            &[][..]
        } else if solutions.is_null() {
            return Err(null("solutions"));
        } else {
            std::slice::from_raw_parts(solutions, count as usize)
        };
        let bb = core(BlackBox::from_solutions(domain, marked))?;
        let config = SearchConfig {
            alpha: AlphaSchedule::Constant(alpha),
            seed,
            ..SearchConfig::default()
        };
        let report = core(run_search(&config, &bb))?;
        *out = Box::into_raw(Box::new(HoampSearchReport(report)));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or come from [`hoamp_search`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hoamp_search_report_free(report: *mut HoampSearchReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of reported solutions; 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hoamp_search_report_count(report: *const HoampSearchReport) -> u64 {
    report.as_ref().map_or(0, |r| r.0.solutions.len() as u64)
}

/// # Safety
/// `report` must be null or a live handle; `value` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hoamp_search_report_solution(
    report: *const HoampSearchReport,
    index: u64,
    value: *mut u64,
) -> HoampStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if value.is_null() {
            return Err(null("value"));
        }
        let s =
            r.0.solutions
                .get(index as usize)
                .ok_or((HoampStatus::OutOfRange, format!("no solution {index}")))?;
        *value = s.n;
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a live handle; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hoamp_search_report_json(
    report: *const HoampSearchReport,
    out: *mut *mut c_char,
) -> HoampStatus {
    guard(|| json(&report.as_ref().ok_or_else(|| null("report"))?.0, out))
}

/// Solve the constraint system given as JSON (`variables`, `constraints`).
///
/// # Safety
/// `system_json` must be a NUL-terminated string; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hoamp_solve(
    system_json: *const c_char,
    seed: u64,
    alpha: f64,
    mode: HoampWeightMode,
    out: *mut *mut HoampSolveReport,
) -> HoampStatus {
    guard(|| {
        if system_json.is_null() {
            return Err(null("system_json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(system_json)
            .to_str()
            .map_err(|e| (HoampStatus::InvalidUtf8, e.to_string()))?;
        let system = core(ConstraintSystem::from_json(text))?;
        let bank = core(MarkerBank::uniform(
            system.constraint_count(),
            AlphaSchedule::Constant(alpha),
        ))?;
        let policy = SolverPolicy {
            mode: match mode {
                HoampWeightMode::Max => WeightMode::Max,
                HoampWeightMode::SumClipped => WeightMode::SumClipped,
            },
            seed,
            ..SolverPolicy::default()
        };
        let report = core(run_solver(&system, &bank, &policy))?;
        *out = Box::into_raw(Box::new(HoampSolveReport(report)));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or come from [`hoamp_solve`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hoamp_solve_report_free(report: *mut HoampSolveReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of reported tuples; 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hoamp_solve_report_count(report: *const HoampSolveReport) -> u64 {
    report.as_ref().map_or(0, |r| r.0.solutions.len() as u64)
}

/// Copy tuple `index` into `values`, which holds `capacity` entries. The
/// tuple's arity is written to `arity` even when `capacity` is too small.
///
/// # Safety
/// `report` must be null or a live handle; `values` must hold `capacity`
/// entries; `arity` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hoamp_solve_report_tuple(
    report: *const HoampSolveReport,
    index: u64,
    values: *mut u64,
    capacity: u64,
    arity: *mut u64,
) -> HoampStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if arity.is_null() {
            return Err(null("arity"));
        }
        let t =
            r.0.solutions
                .get(index as usize)
                .ok_or((HoampStatus::OutOfRange, format!("no tuple {index}")))?;
        let t = t.tuple.as_slice();
        *arity = t.len() as u64;
        if (capacity as usize) < t.len() {
            return Err((
                HoampStatus::OutOfRange,
                format!("tuple needs {} entries", t.len()),
            ));
        }
        if values.is_null() {
            return Err(null("values"));
        }
        ptr::copy_nonoverlapping(t.as_ptr(), values, t.len());
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a live handle; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hoamp_solve_report_json(
    report: *const HoampSolveReport,
    out: *mut *mut c_char,
) -> HoampStatus {
    guard(|| json(&report.as_ref().ok_or_else(|| null("report"))?.0, out))
}
