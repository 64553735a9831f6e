//! C ABI for the descent library: opaque handles, integer status codes and
//! UTF-8 string outputs. The generated header lives in `include/descent.h`.
//!
//! Conventions:
//! - every fallible call returns a `DESCENT_STATUS_*` code; on failure the
//!   thread-local message from [`descent_last_error`] describes the cause;
//! - strings returned as `char*` are owned by the caller and must be
//!   released with [`descent_string_free`];
//! - handles must be released with their matching `_free` function and must
//!   not be used across a free.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use descent::analyze::StructureReport;
use descent::cli::write_trajectory_csv;
use descent::direct::{solve_direct, TranscriptionConfig};
use descent::indirect::{solve_indirect, IndirectOptions};
use descent::integrate::Trajectory;
use descent::scenario::{ScenarioFile, SolveMethod};

pub const DESCENT_STATUS_OK: i32 = 0;
pub const DESCENT_STATUS_SOLVER_FAILURE: i32 = 1;
pub const DESCENT_STATUS_STRUCTURE_FAIL: i32 = 2;
pub const DESCENT_STATUS_BAD_INPUT: i32 = 64;
pub const DESCENT_STATUS_PANIC: i32 = 70;

pub const DESCENT_METHOD_AUTO: i32 = 0;
pub const DESCENT_METHOD_INDIRECT: i32 = 1;
pub const DESCENT_METHOD_DIRECT: i32 = 2;

/// Opaque scenario handle.
pub struct DescentScenario {
    scenario: descent::model::Scenario,
    nodes: usize,
    steps: usize,
    seed: u64,
    method: SolveMethod,
}

/// Opaque solution handle: a trajectory plus its structure certificate.
pub struct DescentSolution {
    trajectory: Trajectory,
    report: StructureReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into();
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error message").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guarded<F: FnOnce() -> i32>(f: F) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic");
            DESCENT_STATUS_PANIC
        }
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn descent_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// The last error message on this thread, or null if none. Free with
/// [`descent_string_free`].
#[no_mangle]
pub extern "C" fn descent_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        Some(c) => c.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by a `descent_*` function that
/// documents this deallocator, and must not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn descent_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a scenario from its JSON document (same schema as the CLI files).
/// On success writes a handle to `out` and returns `DESCENT_STATUS_OK`.
///
/// # Safety
/// `json` must be a valid NUL-terminated UTF-8 string and `out` a valid
/// pointer to a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn descent_scenario_parse(
    json: *const c_char,
    out: *mut *mut DescentScenario,
) -> i32 {
    guarded(|| {
        clear_error();
        if json.is_null() || out.is_null() {
            set_error("null argument");
            return DESCENT_STATUS_BAD_INPUT;
        }
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("scenario JSON is not valid UTF-8");
                return DESCENT_STATUS_BAD_INPUT;
            }
        };
        let file = match ScenarioFile::from_json(text) {
            Ok(f) => f,
            Err(e) => {
                set_error(e.to_string());
                return DESCENT_STATUS_BAD_INPUT;
            }
        };
        let scenario = match file.to_scenario() {
            Ok(s) => s,
            Err(e) => {
                set_error(e.to_string());
                return DESCENT_STATUS_BAD_INPUT;
            }
        };
        let handle = Box::new(DescentScenario {
            scenario,
            nodes: file.solver.nodes.unwrap_or(100),
            steps: file.solver.steps.unwrap_or(400),
            seed: file.solver.seed.unwrap_or(0),
            method: file.solver.method,
        });
        unsafe { *out = Box::into_raw(handle) };
        DESCENT_STATUS_OK
    })
}

/// Release a scenario handle.
///
/// # Safety
/// `s` must come from [`descent_scenario_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn descent_scenario_free(s: *mut DescentScenario) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}

fn method_from(code: i32, fallback: SolveMethod) -> Option<SolveMethod> {
    match code {
        -1 => Some(fallback),
        DESCENT_METHOD_AUTO => Some(SolveMethod::Auto),
        DESCENT_METHOD_INDIRECT => Some(SolveMethod::Indirect),
        DESCENT_METHOD_DIRECT => Some(SolveMethod::Direct),
        _ => None,
    }
}

/// Solve a scenario. `method` is one of the `DESCENT_METHOD_*` codes, or -1
/// to use the scenario file's selection. `seed` drives the deterministic
/// retry ladder. On success (including a converged solve whose structure
/// checks fail) a solution handle is written to `out`; the return code is
/// `DESCENT_STATUS_OK` when all checks pass and
/// `DESCENT_STATUS_STRUCTURE_FAIL` otherwise.
///
/// # Safety
/// `scenario` must be a live handle from [`descent_scenario_parse`]; `out`
/// must be a valid pointer to a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn descent_solve(
    scenario: *const DescentScenario,
    method: i32,
    seed: u64,
    out: *mut *mut DescentSolution,
) -> i32 {
    guarded(|| {
        clear_error();
        if scenario.is_null() || out.is_null() {
            set_error("null argument");
            return DESCENT_STATUS_BAD_INPUT;
        }
        let handle = unsafe { &*scenario };
        let method = match method_from(method, handle.method) {
            Some(m) => m,
            None => {
                set_error(format!("unknown method code {method}"));
                return DESCENT_STATUS_BAD_INPUT;
            }
        };
        let ind_opts = IndirectOptions {
            n_steps: handle.steps,
            seed: seed ^ handle.seed,
            ..IndirectOptions::default()
        };
        let dir_cfg =
            TranscriptionConfig { n_nodes: handle.nodes, ..TranscriptionConfig::default() };

        let solved: Result<(Trajectory, StructureReport), String> = match method {
            SolveMethod::Indirect => solve_indirect(&handle.scenario, None, &ind_opts)
                .map(|s| (s.trajectory, s.report))
                .map_err(|e| e.to_string()),
            SolveMethod::Direct => match solve_direct(&handle.scenario, &dir_cfg, None) {
                Ok(s) if s.converged => Ok((s.trajectory, s.report)),
                Ok(s) => Err(format!(
                    "direct solver did not converge (feasibility {:.2e})",
                    s.feasibility
                )),
                Err(e) => Err(e.to_string()),
            },
            SolveMethod::Auto => match solve_indirect(&handle.scenario, None, &ind_opts) {
                Ok(s) => Ok((s.trajectory, s.report)),
                Err(_) => match solve_direct(&handle.scenario, &dir_cfg, None) {
                    Ok(s) if s.converged => Ok((s.trajectory, s.report)),
                    Ok(s) => Err(format!(
                        "direct solver did not converge (feasibility {:.2e})",
                        s.feasibility
                    )),
                    Err(e) => Err(e.to_string()),
                },
            },
        };
        match solved {
            Ok((trajectory, report)) => {
                let pass = report.overall_pass;
                let handle = Box::new(DescentSolution { trajectory, report });
                unsafe { *out = Box::into_raw(handle) };
                if pass {
                    DESCENT_STATUS_OK
                } else {
                    set_error("structure checks failed; see the report");
                    DESCENT_STATUS_STRUCTURE_FAIL
                }
            }
            Err(msg) => {
                set_error(msg);
                DESCENT_STATUS_SOLVER_FAILURE
            }
        }
    })
}

/// Release a solution handle.
///
/// # Safety
/// `s` must come from [`descent_solve`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn descent_solution_free(s: *mut DescentSolution) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Objective value of the solution (NaN for a null handle).
///
/// # Safety
/// `s` must be a live solution handle or null.
#[no_mangle]
pub unsafe extern "C" fn descent_solution_cost(s: *const DescentSolution) -> f64 {
    if s.is_null() {
        return f64::NAN;
    }
    unsafe { &*s }.trajectory.cost_value
}

/// Final time of the solution, s (NaN for a null handle).
///
/// # Safety
/// `s` must be a live solution handle or null.
#[no_mangle]
pub unsafe extern "C" fn descent_solution_final_time(s: *const DescentSolution) -> f64 {
    if s.is_null() {
        return f64::NAN;
    }
    unsafe { &*s }.trajectory.final_time()
}

/// 1 when every structure check passed, 0 otherwise (or for null handles).
///
/// # Safety
/// `s` must be a live solution handle or null.
#[no_mangle]
pub unsafe extern "C" fn descent_solution_overall_pass(s: *const DescentSolution) -> i32 {
    if s.is_null() {
        return 0;
    }
    unsafe { &*s }.report.overall_pass as i32
}

/// The trajectory in the documented CSV layout. Free with
/// [`descent_string_free`]; null on a null handle.
///
/// # Safety
/// `s` must be a live solution handle or null.
#[no_mangle]
pub unsafe extern "C" fn descent_solution_trajectory_csv(s: *const DescentSolution) -> *mut c_char {
    if s.is_null() {
        return std::ptr::null_mut();
    }
    let csv = write_trajectory_csv(&unsafe { &*s }.trajectory);
    CString::new(csv).map(CString::into_raw).unwrap_or(std::ptr::null_mut())
}

/// The structure certificate as a JSON document. Free with
/// [`descent_string_free`]; null on a null handle or serialization failure.
///
/// # Safety
/// `s` must be a live solution handle or null.
#[no_mangle]
pub unsafe extern "C" fn descent_solution_report_json(s: *const DescentSolution) -> *mut c_char {
    if s.is_null() {
        return std::ptr::null_mut();
    }
    match serde_json::to_string_pretty(&unsafe { &*s }.report) {
        Ok(json) => CString::new(json).map(CString::into_raw).unwrap_or(std::ptr::null_mut()),
        Err(_) => std::ptr::null_mut(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vertical_json() -> CString {
        CString::new(
            r#"{
                "vehicle": {
                    "thrust_max_n": 16573.0,
                    "flow_rate_kg_s": 0.0,
                    "mass_empty_kg": 1505.0,
                    "gravity_m_s2": 3.71,
                    "throttle_min": 0.3,
                    "throttle_max": 0.8
                },
                "initial": {
                    "position_m": [0.0, 0.0, 1500.0],
                    "velocity_m_s": [0.0, 0.0, -75.0],
                    "mass_kg": 1905.0
                },
                "final": { "position_xy_m": [0.0, 0.0] },
                "cost": "min_fuel",
                "solver": { "method": "indirect", "steps": 200 }
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn parse_solve_export_free() {
        unsafe {
            let json = vertical_json();
            let mut scenario: *mut DescentScenario = std::ptr::null_mut();
            let code = descent_scenario_parse(json.as_ptr(), &mut scenario);
            assert_eq!(code, DESCENT_STATUS_OK);
            assert!(!scenario.is_null());

            let mut solution: *mut DescentSolution = std::ptr::null_mut();
            let code = descent_solve(scenario, DESCENT_METHOD_INDIRECT, 0, &mut solution);
            assert_eq!(code, DESCENT_STATUS_OK, "last error: {:?}", last_error_string());
            assert!(!solution.is_null());
            assert_eq!(descent_solution_overall_pass(solution), 1);

            let cost = descent_solution_cost(solution);
            assert!((cost - 21.92).abs() < 0.1, "cost = {cost}");
            let tf = descent_solution_final_time(solution);
            assert!((tf - 31.18).abs() < 0.1, "tf = {tf}");

            let csv = descent_solution_trajectory_csv(solution);
            assert!(!csv.is_null());
            let text = CStr::from_ptr(csv).to_str().unwrap();
            assert!(text.starts_with("t,x,y,z,"));
            descent_string_free(csv);

            let json_out = descent_solution_report_json(solution);
            assert!(!json_out.is_null());
            let text = CStr::from_ptr(json_out).to_str().unwrap();
            assert!(text.contains("\"overall_pass\": true"));
            descent_string_free(json_out);

            descent_solution_free(solution);
            descent_scenario_free(scenario);
        }
    }

    #[test]
    fn bad_input_reports_the_offending_key() {
        unsafe {
            let json = CString::new(r#"{ "vehiclee": {} }"#).unwrap();
            let mut scenario: *mut DescentScenario = std::ptr::null_mut();
            let code = descent_scenario_parse(json.as_ptr(), &mut scenario);
            assert_eq!(code, DESCENT_STATUS_BAD_INPUT);
            assert!(scenario.is_null());
            let msg = last_error_string().unwrap();
            assert!(msg.contains("vehiclee"), "{msg}");
        }
    }

    #[test]
    fn null_arguments_are_rejected() {
        unsafe {
            let mut out: *mut DescentScenario = std::ptr::null_mut();
            assert_eq!(
                descent_scenario_parse(std::ptr::null(), &mut out),
                DESCENT_STATUS_BAD_INPUT
            );
            let mut sol: *mut DescentSolution = std::ptr::null_mut();
            assert_eq!(
                descent_solve(std::ptr::null(), DESCENT_METHOD_AUTO, 0, &mut sol),
                DESCENT_STATUS_BAD_INPUT
            );
            assert!(descent_solution_cost(std::ptr::null()).is_nan());
        }
    }

    #[test]
    fn version_is_a_static_string() {
        unsafe {
            let v = descent_version();
            assert!(!v.is_null());
            let text = CStr::from_ptr(v).to_str().unwrap();
            assert_eq!(text, env!("CARGO_PKG_VERSION"));
        }
    }

    fn last_error_string() -> Option<String> {
        unsafe {
            let p = descent_last_error();
            if p.is_null() {
                return None;
            }
            let s = CStr::from_ptr(p).to_str().ok().map(String::from);
            descent_string_free(p);
            s
        }
    }
}
