//! C ABI over `frab`.
//!
//! Every entry point returns a [`FrabStatus`]. Objects cross the boundary as
//! opaque handles created by `*_new`/`*_parse`/`*_builtin` functions and
//! released with the matching `*_free`. After a non-OK status the message is
//! available from [`frab_last_error`] on the same thread.
//!
//! Strings are NUL-terminated UTF-8. Functions that copy strings or arrays
//! out follow the `snprintf` convention: they write at most `len` elements
//! and report the full length through `needed`, so a first call with
//! `len = 0` sizes the buffer.

#![allow(clippy::missing_safety_doc, clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use frab::harness::{builtin, run_experiment, set_run_key, ComparisonReport, ExperimentSpec};
use frab::problems::Problem;
use frab::solvers::{run, Algorithm, RunRecord, SolverConfig, StoppingRule, Termination};
use frab::space::{box_project, soft_threshold, MonotoneMap, ResolventOp, Vector};
use frab::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrabStatus {
    Ok = 0,
    /// Bad argument, configuration, dimension, or input text.
    Usage = 1,
    /// The iteration produced a non-finite value.
    Numerical = 2,
    NullPointer = 3,
    /// A Rust panic was caught at the boundary.
    Panic = 4,
    Io = 5,
}

/// How a run ended.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrabTermination {
    Tolerance = 0,
    MaxIter = 1,
    NumericalFailure = 2,
}

/// A problem instance.
pub struct FrabProblem(Problem);

/// A solver configuration.
pub struct FrabConfig(SolverConfig);

/// The trace of one run.
pub struct FrabRecord(RunRecord);

/// A parsed experiment: one problem plus labelled runs.
pub struct FrabExperiment(ExperimentSpec);

/// Results of running an experiment.
pub struct FrabReport(ComparisonReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> FrabStatus {
    match e {
        Error::NumericalFailure { .. } => FrabStatus::Numerical,
        Error::Io(_) => FrabStatus::Io,
        _ => FrabStatus::Usage,
    }
}

struct Fail(FrabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

type Outcome = std::result::Result<(), Fail>;

fn null(what: &str) -> Fail {
    Fail(FrabStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Outcome) -> FrabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FrabStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            FrabStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(FrabStatus::Usage, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn vector_arg(p: *const f64, len: usize, what: &str) -> Result<Vector, Fail> {
    Ok(Vector::new(slice_arg(p, len, what)?.to_vec())?)
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn handle_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Outcome {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize, needed: *mut usize) -> Outcome {
    if !needed.is_null() {
        *needed = src.len();
    }
    let n = src.len().min(len);
    if n > 0 {
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, n);
    }
    Ok(())
}

unsafe fn copy_str(src: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Outcome {
    if !needed.is_null() {
        *needed = src.len();
    }
    if len > 0 {
        if buf.is_null() {
            return Err(null("buf"));
        }
        let n = src.len().min(len - 1);
        ptr::copy_nonoverlapping(src.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
    }
    Ok(())
}

/// Copies the last error message of this thread into `buf` and returns its
/// length in bytes, excluding the terminator. Returns 0 when no error is set.
#[no_mangle]
pub unsafe extern "C" fn frab_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        Some(msg) => {
            let text = msg.to_str().unwrap_or("");
            let mut needed = 0;
            let _ = copy_str(text, buf, len, &mut needed);
            needed
        }
        None => {
            if len > 0 && !buf.is_null() {
                *buf = 0;
            }
            0
        }
    })
}

/// `out[i] = sign(x[i])·max(|x[i]| − delta, 0)`. `out` may alias `x`.
#[no_mangle]
pub unsafe extern "C" fn frab_soft_threshold(x: *const f64, len: usize, delta: f64, out: *mut f64) -> FrabStatus {
    guard(|| {
        if !(delta >= 0.0) {
            return Err(Fail(FrabStatus::Usage, format!("delta must be nonnegative, got {delta}")));
        }
        let v = vector_arg(x, len, "x")?;
        copy_out(soft_threshold(&v, delta).as_slice(), out, len, ptr::null_mut())
    })
}

/// Clamps `x` into the box `[lo, hi]`. `out` may alias `x`.
#[no_mangle]
pub unsafe extern "C" fn frab_box_project(
    x: *const f64,
    lo: *const f64,
    hi: *const f64,
    len: usize,
    out: *mut f64,
) -> FrabStatus {
    guard(|| {
        let p = box_project(&vector_arg(x, len, "x")?, &vector_arg(lo, len, "lo")?, &vector_arg(hi, len, "hi")?)?;
        copy_out(p.as_slice(), out, len, ptr::null_mut())
    })
}

/// Builds the problem `0 ∈ slope·w + offset + weight·∂‖w‖₁` in `len`
/// dimensions with default initial points `w0`, `w1`.
#[no_mangle]
pub unsafe extern "C" fn frab_problem_affine_l1(
    slope: f64,
    offset: *const f64,
    weight: f64,
    w0: *const f64,
    w1: *const f64,
    len: usize,
    out: *mut *mut FrabProblem,
) -> FrabStatus {
    guard(|| {
        if !(slope >= 0.0 && weight >= 0.0) {
            return Err(Fail(FrabStatus::Usage, "slope and weight must be nonnegative".into()));
        }
        let map = MonotoneMap::affine(slope, vector_arg(offset, len, "offset")?);
        let initials = (vector_arg(w0, len, "w0")?, vector_arg(w1, len, "w1")?);
        let p = Problem::new("affine-l1", map, ResolventOp::soft_threshold(weight), initials)?;
        put(out, FrabProblem(p))
    })
}

#[no_mangle]
pub unsafe extern "C" fn frab_problem_dim(problem: *const FrabProblem, dim: *mut usize) -> FrabStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        *handle_mut(dim, "dim")? = p.0.dim;
        Ok(())
    })
}

/// Natural residual `½‖w − J₁(w − Tw)‖²`, scaled by the problem's metric weight.
#[no_mangle]
pub unsafe extern "C" fn frab_problem_residual(
    problem: *const FrabProblem,
    w: *const f64,
    len: usize,
    value: *mut f64,
) -> FrabStatus {
    guard(|| {
        let p = &handle(problem, "problem")?.0;
        let w = vector_arg(w, len, "w")?;
        if w.dim() != p.dim {
            return Err(Error::DimensionMismatch { expected: p.dim, actual: w.dim() }.into());
        }
        *handle_mut(value, "value")? = p.residual(&w);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn frab_problem_free(problem: *mut FrabProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// New configuration with library defaults. `algorithm` is one of
/// `frab-adaptive`, `frab-fixed`, `frab-inertial`, `frab-inertial-variable`,
/// `viscosity`, `inertial-viscosity`, `frbsm`, `rfbsm`.
#[no_mangle]
pub unsafe extern "C" fn frab_config_new(algorithm: *const c_char, out: *mut *mut FrabConfig) -> FrabStatus {
    guard(|| {
        let alg: Algorithm = str_arg(algorithm, "algorithm")?.parse()?;
        put(out, FrabConfig(SolverConfig::new(alg)))
    })
}

/// Sets one key using the value syntax of spec files, for a problem of
/// dimension `dim`. Accepts the run keys (`r_bar`, `sigma`, `anchor`,
/// `theta`, `lambda`, ...) plus `tol`, `max_iter`, `stopping` and
/// `keep_iterates`.
#[no_mangle]
pub unsafe extern "C" fn frab_config_set(
    config: *mut FrabConfig,
    key: *const c_char,
    value: *const c_char,
    dim: usize,
) -> FrabStatus {
    guard(|| {
        let cfg = &mut handle_mut(config, "config")?.0;
        let key = str_arg(key, "key")?.trim();
        let value = str_arg(value, "value")?.trim();
        let bad = |what: &str| Fail(FrabStatus::Usage, format!("cannot read {key} = {value:?} as {what}"));
        match key {
            "tol" => cfg.tol = frab::stepsize::parse_real(value)?,
            "max_iter" => cfg.max_iter = value.parse().map_err(|_| bad("a count"))?,
            "stopping" => cfg.stopping = value.parse::<StoppingRule>()?,
            "keep_iterates" => cfg.keep_iterates = value.parse().map_err(|_| bad("true or false"))?,
            _ => set_run_key(cfg, key, value, dim)?,
        }
        Ok(())
    })
}

/// Checks the configuration against `problem` without running it.
#[no_mangle]
pub unsafe extern "C" fn frab_config_validate(config: *const FrabConfig, problem: *const FrabProblem) -> FrabStatus {
    guard(|| {
        let cfg = &handle(config, "config")?.0;
        let p = &handle(problem, "problem")?.0;
        Ok(cfg.validate_for(p)?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn frab_config_free(config: *mut FrabConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs `config` on `problem`. `w0` and `w1` override the problem's initial
/// points when both are non-null. A run that fails numerically still
/// produces a record; the status is then `FRAB_STATUS_NUMERICAL`.
#[no_mangle]
pub unsafe extern "C" fn frab_solve(
    problem: *const FrabProblem,
    config: *const FrabConfig,
    w0: *const f64,
    w1: *const f64,
    len: usize,
    out: *mut *mut FrabRecord,
) -> FrabStatus {
    guard(|| {
        let p = &handle(problem, "problem")?.0;
        let mut cfg = handle(config, "config")?.0.clone();
        if !w0.is_null() && !w1.is_null() {
            cfg.initials = Some((vector_arg(w0, len, "w0")?, vector_arg(w1, len, "w1")?));
        }
        let rec = run(p, &cfg)?;
        let failure = match &rec.terminated_by {
            Termination::NumericalFailure { iteration, detail } => {
                Some(format!("numerical failure at iteration {iteration}: {detail}"))
            }
            _ => None,
        };
        put(out, FrabRecord(rec))?;
        match failure {
            Some(msg) => Err(Fail(FrabStatus::Numerical, msg)),
            None => Ok(()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn frab_record_iterations(record: *const FrabRecord, iterations: *mut usize) -> FrabStatus {
    guard(|| {
        *handle_mut(iterations, "iterations")? = handle(record, "record")?.0.iterations;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn frab_record_termination(
    record: *const FrabRecord,
    termination: *mut FrabTermination,
) -> FrabStatus {
    guard(|| {
        *handle_mut(termination, "termination")? = match handle(record, "record")?.0.terminated_by {
            Termination::Tolerance => FrabTermination::Tolerance,
            Termination::MaxIter => FrabTermination::MaxIter,
            Termination::NumericalFailure { .. } => FrabTermination::NumericalFailure,
        };
        Ok(())
    })
}

/// Wall time in seconds plus operator and resolvent evaluation counts.
/// Any output pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn frab_record_costs(
    record: *const FrabRecord,
    wall_s: *mut f64,
    operator_evals: *mut usize,
    resolvent_calls: *mut usize,
) -> FrabStatus {
    guard(|| {
        let r = &handle(record, "record")?.0;
        if let Some(w) = wall_s.as_mut() {
            *w = r.wall_time;
        }
        if let Some(n) = operator_evals.as_mut() {
            *n = r.operator_eval_count;
        }
        if let Some(n) = resolvent_calls.as_mut() {
            *n = r.resolvent_call_count;
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn frab_record_final_iterate(
    record: *const FrabRecord,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> FrabStatus {
    guard(|| copy_out(handle(record, "record")?.0.final_iterate.as_slice(), buf, len, needed))
}

/// Residual after each iteration.
#[no_mangle]
pub unsafe extern "C" fn frab_record_residuals(
    record: *const FrabRecord,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> FrabStatus {
    guard(|| copy_out(&handle(record, "record")?.0.residuals, buf, len, needed))
}

/// Step size after each iteration.
#[no_mangle]
pub unsafe extern "C" fn frab_record_steps(
    record: *const FrabRecord,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> FrabStatus {
    guard(|| copy_out(&handle(record, "record")?.0.deltas, buf, len, needed))
}

#[no_mangle]
pub unsafe extern "C" fn frab_record_free(record: *mut FrabRecord) {
    if !record.is_null() {
        drop(Box::from_raw(record));
    }
}

/// Parses an experiment in the spec file format.
#[no_mangle]
pub unsafe extern "C" fn frab_experiment_parse(text: *const c_char, out: *mut *mut FrabExperiment) -> FrabStatus {
    guard(|| {
        let spec: ExperimentSpec = str_arg(text, "text")?.parse()?;
        put(out, FrabExperiment(spec))
    })
}

/// Loads one of the builtin experiments by name.
#[no_mangle]
pub unsafe extern "C" fn frab_experiment_builtin(name: *const c_char, out: *mut *mut FrabExperiment) -> FrabStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let spec = builtin(name).ok_or_else(|| Fail(FrabStatus::Usage, format!("no builtin experiment {name:?}")))?;
        put(out, FrabExperiment(spec))
    })
}

/// Builds the experiment's problem as a standalone handle.
#[no_mangle]
pub unsafe extern "C" fn frab_experiment_problem(
    experiment: *const FrabExperiment,
    out: *mut *mut FrabProblem,
) -> FrabStatus {
    guard(|| {
        let built = handle(experiment, "experiment")?.0.problem.build()?;
        put(out, FrabProblem(built.problem))
    })
}

#[no_mangle]
pub unsafe extern "C" fn frab_experiment_run_count(experiment: *const FrabExperiment, count: *mut usize) -> FrabStatus {
    guard(|| {
        *handle_mut(count, "count")? = handle(experiment, "experiment")?.0.runs.len();
        Ok(())
    })
}

/// Configuration of run `index`, with the experiment's shared tolerance,
/// iteration cap and stopping rule applied.
#[no_mangle]
pub unsafe extern "C" fn frab_experiment_config(
    experiment: *const FrabExperiment,
    index: usize,
    out: *mut *mut FrabConfig,
) -> FrabStatus {
    guard(|| {
        let spec = &handle(experiment, "experiment")?.0;
        let run = spec
            .runs
            .get(index)
            .ok_or_else(|| Fail(FrabStatus::Usage, format!("run index {index} out of range")))?;
        put(out, FrabConfig(spec.effective_config(run)))
    })
}

/// Runs every configuration of the experiment. `out_dir` may be null;
/// otherwise trace and summary CSVs are written there.
#[no_mangle]
pub unsafe extern "C" fn frab_experiment_run(
    experiment: *const FrabExperiment,
    out_dir: *const c_char,
    out: *mut *mut FrabReport,
) -> FrabStatus {
    guard(|| {
        let mut spec = handle(experiment, "experiment")?.0.clone();
        if !out_dir.is_null() {
            spec.out = Some(str_arg(out_dir, "out_dir")?.into());
        }
        put(out, FrabReport(run_experiment(&spec)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn frab_experiment_free(experiment: *mut FrabExperiment) {
    if !experiment.is_null() {
        drop(Box::from_raw(experiment));
    }
}

#[no_mangle]
pub unsafe extern "C" fn frab_report_len(report: *const FrabReport, len: *mut usize) -> FrabStatus {
    guard(|| {
        *handle_mut(len, "len")? = handle(report, "report")?.0.rows.len();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn frab_report_label(
    report: *const FrabReport,
    index: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> FrabStatus {
    guard(|| {
        let rows = &handle(report, "report")?.0.rows;
        let row = rows.get(index).ok_or_else(|| Fail(FrabStatus::Usage, format!("row {index} out of range")))?;
        copy_str(&row.label, buf, len, needed)
    })
}

/// Restoration SNR in dB of row `index`, or NaN when the problem is not an
/// image problem.
#[no_mangle]
pub unsafe extern "C" fn frab_report_snr(report: *const FrabReport, index: usize, snr: *mut f64) -> FrabStatus {
    guard(|| {
        let rows = &handle(report, "report")?.0.rows;
        let row = rows.get(index).ok_or_else(|| Fail(FrabStatus::Usage, format!("row {index} out of range")))?;
        *handle_mut(snr, "snr")? = row.snr.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Copies the record of row `index` into a new handle.
#[no_mangle]
pub unsafe extern "C" fn frab_report_record(
    report: *const FrabReport,
    index: usize,
    out: *mut *mut FrabRecord,
) -> FrabStatus {
    guard(|| {
        let records = &handle(report, "report")?.0.records;
        let rec = records.get(index).ok_or_else(|| Fail(FrabStatus::Usage, format!("row {index} out of range")))?;
        put(out, FrabRecord(rec.clone()))
    })
}

#[no_mangle]
pub unsafe extern "C" fn frab_report_free(report: *mut FrabReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
