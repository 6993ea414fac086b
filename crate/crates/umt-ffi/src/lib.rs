//! C ABI for the umt model transformation engine.
//!
//! The API is session-oriented: create an engine, feed it metamodel, spec
//! and model *source text* (not paths), then check, plan, run or verify.
//! Every entry point returns a [`UmtStatus`]; on anything other than
//! `Ok`, `umt_engine_last_error` returns a human-readable message.
//!
//! Ownership rules:
//! - `umt_engine_new` returns an opaque handle that must be released with
//!   `umt_engine_free`.
//! - every `char*` returned by this library is a fresh allocation that must
//!   be released with `umt_string_free`.
//!
//! The status values mirror the CLI exit codes, so bindings can treat them
//! interchangeably.

use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::sync::Arc;

use umt::engine;
use umt::error::UmtError;
use umt::metamodel::{Metamodel, MetamodelSet, ValueType};
use umt::model::{ModelState, Value};
use umt::planner;
use umt::spec::{check_assumptions, TransformationSpec};

/// Result of every API call. Mirrors the `umt` CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UmtStatus {
    Ok = 0,
    ParseError = 1,
    InterferenceRejected = 2,
    RuntimeError = 3,
    AssumptionFailed = 4,
    VerificationFailed = 5,
    /// Null pointer, invalid UTF-8, or an argument that violates the API.
    InvalidArgument = 6,
    /// A call that needs state not yet loaded (metamodel, spec, or a run).
    MissingState = 7,
}

fn status_of(err: &UmtError) -> UmtStatus {
    match err {
        UmtError::Syntax { .. } | UmtError::Resolve { .. } | UmtError::Invalid(_) => {
            UmtStatus::ParseError
        }
        UmtError::Cycle(_) => UmtStatus::InterferenceRejected,
        UmtError::Runtime(_) => UmtStatus::RuntimeError,
    }
}

/// Opaque engine session.
pub struct UmtEngine {
    metamodels: Vec<Metamodel>,
    mm: Option<Arc<MetamodelSet>>,
    spec: Option<TransformationSpec>,
    input: Option<ModelState>,
    raw_params: BTreeMap<String, String>,
    output: Option<String>,
    report: Option<String>,
    last_error: Option<String>,
}

impl UmtEngine {
    fn new() -> Self {
        UmtEngine {
            metamodels: Vec::new(),
            mm: None,
            spec: None,
            input: None,
            raw_params: BTreeMap::new(),
            output: None,
            report: None,
            last_error: None,
        }
    }

    fn fail(&mut self, status: UmtStatus, msg: impl Into<String>) -> UmtStatus {
        self.last_error = Some(msg.into());
        status
    }

    fn fail_err(&mut self, err: UmtError) -> UmtStatus {
        let status = status_of(&err);
        self.fail(status, err.to_string())
    }

    /// Validate and freeze the metamodel set on first use.
    fn ensure_mm(&mut self) -> Result<Arc<MetamodelSet>, UmtStatus> {
        if let Some(mm) = &self.mm {
            return Ok(Arc::clone(mm));
        }
        if self.metamodels.is_empty() {
            return Err(self.fail(UmtStatus::MissingState, "no metamodel loaded"));
        }
        let set = MetamodelSet::new(self.metamodels.clone());
        let diags = set.validate();
        if !diags.is_empty() {
            let msg = diags
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("\n");
            return Err(self.fail(UmtStatus::ParseError, msg));
        }
        let mm = Arc::new(set);
        self.mm = Some(Arc::clone(&mm));
        Ok(mm)
    }

    fn spec_and_mm(&mut self) -> Result<(TransformationSpec, Arc<MetamodelSet>), UmtStatus> {
        let mm = self.ensure_mm()?;
        match &self.spec {
            Some(spec) => Ok((spec.clone(), mm)),
            None => Err(self.fail(UmtStatus::MissingState, "no spec loaded")),
        }
    }

    fn input_state(&mut self) -> Result<ModelState, UmtStatus> {
        let mm = self.ensure_mm()?;
        Ok(match &self.input {
            Some(state) => state.clone(),
            None => ModelState::new(mm),
        })
    }

    fn typed_params(
        &mut self,
        spec: &TransformationSpec,
    ) -> Result<BTreeMap<String, Value>, UmtStatus> {
        let mut out = BTreeMap::new();
        for (name, raw) in self.raw_params.clone() {
            let Some((_, ty)) = spec.params.iter().find(|(n, _)| *n == name) else {
                return Err(self.fail(
                    UmtStatus::InvalidArgument,
                    format!("spec `{}` has no parameter `{name}`", spec.name),
                ));
            };
            let value = match ty {
                ValueType::Str => Value::Str(raw),
                ValueType::Int => match raw.parse::<i64>() {
                    Ok(n) => Value::Int(n),
                    Err(_) => {
                        return Err(self.fail(
                            UmtStatus::InvalidArgument,
                            format!("parameter `{name}` expects an integer, got `{raw}`"),
                        ));
                    }
                },
            };
            out.insert(name, value);
        }
        for (name, _) in &spec.params {
            if !out.contains_key(name) {
                return Err(self.fail(
                    UmtStatus::InvalidArgument,
                    format!("missing value for parameter `{name}`"),
                ));
            }
        }
        Ok(out)
    }

    fn do_check(&mut self) -> UmtStatus {
        let (spec, _) = match self.spec_and_mm() {
            Ok(x) => x,
            Err(s) => return s,
        };
        let input = match self.input_state() {
            Ok(x) => x,
            Err(s) => return s,
        };
        let params = match self.typed_params(&spec) {
            Ok(x) => x,
            Err(s) => return s,
        };
        match check_assumptions(&spec, &input, &params) {
            Ok(verdicts) => {
                let report = verdicts
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("\n");
                let failed = verdicts.iter().any(|v| !v.passed);
                self.report = Some(report.clone());
                if failed {
                    self.fail(UmtStatus::AssumptionFailed, report)
                } else {
                    UmtStatus::Ok
                }
            }
            Err(e) => self.fail_err(e),
        }
    }

    fn do_plan(&mut self) -> UmtStatus {
        let (spec, mm) = match self.spec_and_mm() {
            Ok(x) => x,
            Err(s) => return s,
        };
        match planner::derive_plan(&spec, &mm) {
            Ok(plan) => {
                self.report = Some(plan.render(&spec));
                UmtStatus::Ok
            }
            Err(e) => self.fail_err(e),
        }
    }

    fn do_run(&mut self, force: bool, verify: bool) -> UmtStatus {
        let (spec, mm) = match self.spec_and_mm() {
            Ok(x) => x,
            Err(s) => return s,
        };
        let input = match self.input_state() {
            Ok(x) => x,
            Err(s) => return s,
        };
        let params = match self.typed_params(&spec) {
            Ok(x) => x,
            Err(s) => return s,
        };
        match check_assumptions(&spec, &input, &params) {
            Ok(verdicts) => {
                if verdicts.iter().any(|v| !v.passed) && !force {
                    let report = verdicts
                        .iter()
                        .filter(|v| !v.passed)
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join("\n");
                    return self.fail(UmtStatus::AssumptionFailed, report);
                }
            }
            Err(e) => return self.fail_err(e),
        }
        let plan = match planner::derive_plan(&spec, &mm) {
            Ok(p) => p,
            Err(e) => return self.fail_err(e),
        };
        if !plan.all_ok() && !force {
            let mut msg = String::new();
            for phase in &plan.phases {
                if let planner::Verdict::Rejected(conflicts) = &phase.verdict {
                    let c = &spec.constraints[phase.constraint_index];
                    msg.push_str(&format!("constraint {} rejected:\n", c.label));
                    for conflict in conflicts {
                        msg.push_str(&format!("  {conflict}\n"));
                    }
                }
            }
            return self.fail(UmtStatus::InterferenceRejected, msg);
        }
        let result = match engine::run(&spec, &plan, input, &params, force) {
            Ok(r) => r,
            Err(e) => return self.fail_err(e),
        };
        self.output = Some(result.final_state.serialize());
        if verify {
            match engine::verify_cons(
                &spec,
                &result.final_state,
                result.pre_state.state(),
                &params,
            ) {
                Ok(verdicts) => {
                    let report = verdicts
                        .iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join("\n");
                    self.report = Some(report.clone());
                    if verdicts.iter().any(|v| !v.passed) {
                        return self.fail(UmtStatus::VerificationFailed, report);
                    }
                }
                Err(e) => return self.fail_err(e),
            }
        }
        UmtStatus::Ok
    }

    fn do_verify(&mut self, output_src: &str) -> UmtStatus {
        let (spec, mm) = match self.spec_and_mm() {
            Ok(x) => x,
            Err(s) => return s,
        };
        let input = match self.input_state() {
            Ok(x) => x,
            Err(s) => return s,
        };
        let params = match self.typed_params(&spec) {
            Ok(x) => x,
            Err(s) => return s,
        };
        let final_state = match ModelState::parse(output_src, mm) {
            Ok(s) => s,
            Err(e) => return self.fail_err(e),
        };
        match engine::verify_cons(&spec, &final_state, &input, &params) {
            Ok(verdicts) => {
                let report = verdicts
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("\n");
                self.report = Some(report.clone());
                if verdicts.iter().any(|v| !v.passed) {
                    self.fail(UmtStatus::VerificationFailed, report)
                } else {
                    UmtStatus::Ok
                }
            }
            Err(e) => self.fail_err(e),
        }
    }
}

unsafe fn engine_mut<'a>(engine: *mut UmtEngine) -> Option<&'a mut UmtEngine> {
    unsafe { engine.as_mut() }
}

unsafe fn arg_str<'a>(s: *const c_char) -> Option<&'a str> {
    if s.is_null() {
        return None;
    }
    unsafe { CStr::from_ptr(s) }.to_str().ok()
}

fn to_c_string(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', ""))
        .map(CString::into_raw)
        .unwrap_or(std::ptr::null_mut())
}

/// Create a new engine session.
#[no_mangle]
pub extern "C" fn umt_engine_new() -> *mut UmtEngine {
    Box::into_raw(Box::new(UmtEngine::new()))
}

/// Release an engine session. Passing NULL is a no-op.
///
/// # Safety
/// `engine` must be a pointer returned by `umt_engine_new` that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn umt_engine_free(engine: *mut UmtEngine) {
    if !engine.is_null() {
        drop(unsafe { Box::from_raw(engine) });
    }
}

/// Parse and add one metamodel (source text). Call once or twice before
/// loading a spec; the set is validated when first used.
///
/// # Safety
/// `engine` must be a live engine pointer; `source` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn umt_engine_add_metamodel(
    engine: *mut UmtEngine,
    source: *const c_char,
) -> UmtStatus {
    let Some(eng) = (unsafe { engine_mut(engine) }) else {
        return UmtStatus::InvalidArgument;
    };
    let Some(src) = (unsafe { arg_str(source) }) else {
        return eng.fail(
            UmtStatus::InvalidArgument,
            "metamodel source is null or not UTF-8",
        );
    };
    if eng.mm.is_some() {
        return eng.fail(
            UmtStatus::InvalidArgument,
            "metamodels are frozen once a spec or model is loaded",
        );
    }
    if eng.metamodels.len() >= 2 {
        return eng.fail(
            UmtStatus::InvalidArgument,
            "at most two metamodels may be loaded",
        );
    }
    match Metamodel::parse(src) {
        Ok(mm) => {
            eng.metamodels.push(mm);
            UmtStatus::Ok
        }
        Err(e) => eng.fail_err(e),
    }
}

/// Parse the transformation spec (source text) against the loaded
/// metamodels.
///
/// # Safety
/// `engine` must be a live engine pointer; `source` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn umt_engine_set_spec(
    engine: *mut UmtEngine,
    source: *const c_char,
) -> UmtStatus {
    let Some(eng) = (unsafe { engine_mut(engine) }) else {
        return UmtStatus::InvalidArgument;
    };
    let Some(src) = (unsafe { arg_str(source) }) else {
        return eng.fail(
            UmtStatus::InvalidArgument,
            "spec source is null or not UTF-8",
        );
    };
    let mm = match eng.ensure_mm() {
        Ok(mm) => mm,
        Err(s) => return s,
    };
    match TransformationSpec::parse(src, &mm) {
        Ok(spec) => {
            eng.spec = Some(spec);
            UmtStatus::Ok
        }
        Err(e) => eng.fail_err(e),
    }
}

/// Parse the input model (source text). Without this call the input model
/// is empty.
///
/// # Safety
/// `engine` must be a live engine pointer; `source` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn umt_engine_set_model(
    engine: *mut UmtEngine,
    source: *const c_char,
) -> UmtStatus {
    let Some(eng) = (unsafe { engine_mut(engine) }) else {
        return UmtStatus::InvalidArgument;
    };
    let Some(src) = (unsafe { arg_str(source) }) else {
        return eng.fail(
            UmtStatus::InvalidArgument,
            "model source is null or not UTF-8",
        );
    };
    let mm = match eng.ensure_mm() {
        Ok(mm) => mm,
        Err(s) => return s,
    };
    match ModelState::parse(src, mm) {
        Ok(state) => {
            eng.input = Some(state);
            UmtStatus::Ok
        }
        Err(e) => eng.fail_err(e),
    }
}

/// Set a spec parameter. The value is parsed against the declared type when
/// a command runs.
///
/// # Safety
/// `engine` must be a live engine pointer; `name` and `value` NUL-terminated
/// strings.
#[no_mangle]
pub unsafe extern "C" fn umt_engine_set_param(
    engine: *mut UmtEngine,
    name: *const c_char,
    value: *const c_char,
) -> UmtStatus {
    let Some(eng) = (unsafe { engine_mut(engine) }) else {
        return UmtStatus::InvalidArgument;
    };
    let (Some(name), Some(value)) = (unsafe { arg_str(name) }, unsafe { arg_str(value) }) else {
        return eng.fail(
            UmtStatus::InvalidArgument,
            "parameter name/value is null or not UTF-8",
        );
    };
    eng.raw_params.insert(name.to_string(), value.to_string());
    UmtStatus::Ok
}

/// Check assumptions against the input model. The verdict report is
/// available via `umt_engine_report`.
///
/// # Safety
/// `engine` must be a live engine pointer.
#[no_mangle]
pub unsafe extern "C" fn umt_engine_check(engine: *mut UmtEngine) -> UmtStatus {
    match unsafe { engine_mut(engine) } {
        Some(eng) => eng.do_check(),
        None => UmtStatus::InvalidArgument,
    }
}

/// Derive the phase plan. The rendered plan is available via
/// `umt_engine_report`.
///
/// # Safety
/// `engine` must be a live engine pointer.
#[no_mangle]
pub unsafe extern "C" fn umt_engine_plan(engine: *mut UmtEngine) -> UmtStatus {
    match unsafe { engine_mut(engine) } {
        Some(eng) => eng.do_plan(),
        None => UmtStatus::InvalidArgument,
    }
}

/// Execute the transformation. On success the output model text is
/// available via `umt_engine_output`. With `verify`, constraints are
/// re-checked afterwards and the verdicts stored as the report.
///
/// # Safety
/// `engine` must be a live engine pointer.
#[no_mangle]
pub unsafe extern "C" fn umt_engine_run(
    engine: *mut UmtEngine,
    force: bool,
    verify: bool,
) -> UmtStatus {
    match unsafe { engine_mut(engine) } {
        Some(eng) => eng.do_run(force, verify),
        None => UmtStatus::InvalidArgument,
    }
}

/// Declaratively verify an output model (source text) against the loaded
/// input model.
///
/// # Safety
/// `engine` must be a live engine pointer; `output_model` a NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn umt_engine_verify(
    engine: *mut UmtEngine,
    output_model: *const c_char,
) -> UmtStatus {
    let Some(eng) = (unsafe { engine_mut(engine) }) else {
        return UmtStatus::InvalidArgument;
    };
    let Some(src) = (unsafe { arg_str(output_model) }) else {
        return eng.fail(
            UmtStatus::InvalidArgument,
            "output model source is null or not UTF-8",
        );
    };
    eng.do_verify(src)
}

/// Serialized output model of the last successful run, or NULL.
/// Free with `umt_string_free`.
///
/// # Safety
/// `engine` must be a live engine pointer.
#[no_mangle]
pub unsafe extern "C" fn umt_engine_output(engine: *mut UmtEngine) -> *mut c_char {
    match unsafe { engine_mut(engine) } {
        Some(eng) => match &eng.output {
            Some(out) => to_c_string(out),
            None => std::ptr::null_mut(),
        },
        None => std::ptr::null_mut(),
    }
}

/// Report of the last check/plan/verify, or NULL. Free with
/// `umt_string_free`.
///
/// # Safety
/// `engine` must be a live engine pointer.
#[no_mangle]
pub unsafe extern "C" fn umt_engine_report(engine: *mut UmtEngine) -> *mut c_char {
    match unsafe { engine_mut(engine) } {
        Some(eng) => match &eng.report {
            Some(r) => to_c_string(r),
            None => std::ptr::null_mut(),
        },
        None => std::ptr::null_mut(),
    }
}

/// Message of the last failure, or NULL. Free with `umt_string_free`.
///
/// # Safety
/// `engine` must be a live engine pointer.
#[no_mangle]
pub unsafe extern "C" fn umt_engine_last_error(engine: *mut UmtEngine) -> *mut c_char {
    match unsafe { engine_mut(engine) } {
        Some(eng) => match &eng.last_error {
            Some(e) => to_c_string(e),
            None => std::ptr::null_mut(),
        },
        None => std::ptr::null_mut(),
    }
}

/// Release a string returned by this library. Passing NULL is a no-op.
///
/// # Safety
/// `s` must be a pointer returned by this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn umt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
