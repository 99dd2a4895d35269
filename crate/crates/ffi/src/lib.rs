//! C ABI for `srks-core`.
//!
//! Inputs are parsed into opaque handles (`SrksDistribution`,
//! `SrksVectors`, `SrksGraph`) from the same text formats the CLI reads.
//! Computations return an `SrksStatus` and, on success, a `SrksReport`
//! holding a JSON document. Every handle has a matching `*_free`.
//!
//! On a non-`Ok` status, `srks_last_error` returns a message for the
//! calling thread. Panics never cross the boundary; they surface as
//! `SRKS_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use serde_json::{json, Value};

use srks::charpoly::{self, mixed_closed_form, mixed_enum, mixed_operator};
use srks::graphlab::{
    spectral::all_resistances, thin_tree_pipeline, PipelineOptions, WeightedGraph,
};
use srks::maxent::{fit_lambda, BasisPolytopePoint};
use srks::measures::SubsetDistribution;
use srks::stablepoly::VectorSystem;
use srks::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrksStatus {
    Ok = 0,
    /// Malformed text, violated precondition or out-of-range index.
    InvalidInput = 1,
    /// An enumeration would exceed the caller's budget.
    BudgetExceeded = 2,
    /// The maxent target is on the boundary of or outside the polytope.
    BoundaryOrInfeasible = 3,
    NotConverged = 4,
    /// The computation finished but a checked identity or bound failed.
    /// A report is still produced when the call has one.
    CheckFailed = 5,
    NumericalFailure = 6,
    NullPointer = 7,
    InvalidUtf8 = 8,
    /// The caller's buffer has the wrong length.
    BufferSize = 9,
    Panic = 10,
}

/// A finite distribution on subsets of `{0, .., m-1}`.
pub struct SrksDistribution(SubsetDistribution);

/// A list of vectors in `Q^d`.
pub struct SrksVectors(VectorSystem);

/// A weighted undirected graph.
pub struct SrksGraph(WeightedGraph);

/// A JSON report owned by the library.
pub struct SrksReport(CString);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Core(Error),
    Null(&'static str),
    Utf8(&'static str),
    Buffer { expected: usize, got: usize },
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Core(Error::Json(e))
    }
}

fn status_of(e: &Error) -> SrksStatus {
    match e {
        Error::BudgetExceeded { .. } => SrksStatus::BudgetExceeded,
        Error::BoundaryOrInfeasible { .. } => SrksStatus::BoundaryOrInfeasible,
        Error::NotConverged { .. } => SrksStatus::NotConverged,
        Error::BoundViolated(_) | Error::InternalConsistency(_) => SrksStatus::CheckFailed,
        Error::InfiniteResistance { .. } => SrksStatus::InvalidInput,
        e if e.is_input_error() => SrksStatus::InvalidInput,
        _ => SrksStatus::NumericalFailure,
    }
}

impl Failure {
    fn status(&self) -> SrksStatus {
        match self {
            Failure::Core(e) => status_of(e),
            Failure::Null(_) => SrksStatus::NullPointer,
            Failure::Utf8(_) => SrksStatus::InvalidUtf8,
            Failure::Buffer { .. } => SrksStatus::BufferSize,
            Failure::Check(_) => SrksStatus::CheckFailed,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Null(what) => format!("{what} is null"),
            Failure::Utf8(what) => format!("{what} is not valid UTF-8"),
            Failure::Buffer { expected, got } => {
                format!("buffer holds {got} values, {expected} required")
            }
            Failure::Check(msg) => msg.clone(),
        }
    }
}

fn set_last_error(msg: String) {
    // interior NULs would truncate the C string
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SrksStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SrksStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(failure.message());
            failure.status()
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            SrksStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn slot<'a, T>(out: *mut *mut T) -> Result<&'a mut *mut T, Failure> {
    let out = out.as_mut().ok_or(Failure::Null("out"))?;
    *out = ptr::null_mut();
    Ok(out)
}

fn report(value: &Value) -> Result<*mut SrksReport, Failure> {
    let json = CString::new(serde_json::to_string(value)?).expect("serde_json never emits NUL");
    Ok(Box::into_raw(Box::new(SrksReport(json))))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn srks_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL.
///
/// The pointer stays valid until the next `srks_*` call on the same thread.
#[no_mangle]
pub extern "C" fn srks_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a distribution from JSON: `{"m": .., "support": [{"set": [..], "p": "a/b"}, ..]}`.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn srks_distribution_from_json(
    json: *const c_char,
    out: *mut *mut SrksDistribution,
) -> SrksStatus {
    guard(|| {
        let out = slot(out)?;
        let dist = SubsetDistribution::parse_json(text(json, "json")?)?;
        *out = Box::into_raw(Box::new(SrksDistribution(dist)));
        Ok(())
    })
}

/// Size of the ground set.
///
/// # Safety
/// `dist` must be a live handle or NULL (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn srks_distribution_ground_size(dist: *const SrksDistribution) -> usize {
    dist.as_ref().map_or(0, |d| d.0.ground_size())
}

/// # Safety
/// `dist` must come from `srks_distribution_from_json` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn srks_distribution_free(dist: *mut SrksDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Parses vectors: header `d m`, then one vector of `d` rationals per line.
///
/// # Safety
/// `text_in` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn srks_vectors_parse(
    text_in: *const c_char,
    out: *mut *mut SrksVectors,
) -> SrksStatus {
    guard(|| {
        let out = slot(out)?;
        let vs = VectorSystem::parse(text(text_in, "text")?)?;
        *out = Box::into_raw(Box::new(SrksVectors(vs)));
        Ok(())
    })
}

/// Number of vectors.
///
/// # Safety
/// `vs` must be a live handle or NULL (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn srks_vectors_len(vs: *const SrksVectors) -> usize {
    vs.as_ref().map_or(0, |v| v.0.len())
}

/// Ambient dimension.
///
/// # Safety
/// `vs` must be a live handle or NULL (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn srks_vectors_dim(vs: *const SrksVectors) -> usize {
    vs.as_ref().map_or(0, |v| v.0.dim())
}

/// # Safety
/// `vs` must come from `srks_vectors_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn srks_vectors_free(vs: *mut SrksVectors) {
    if !vs.is_null() {
        drop(Box::from_raw(vs));
    }
}

/// Parses an edge list: one `u v [w]` per line, 0-indexed, `#` comments.
///
/// # Safety
/// `text_in` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn srks_graph_parse(
    text_in: *const c_char,
    out: *mut *mut SrksGraph,
) -> SrksStatus {
    guard(|| {
        let out = slot(out)?;
        let g = WeightedGraph::parse(text(text_in, "text")?)?;
        *out = Box::into_raw(Box::new(SrksGraph(g)));
        Ok(())
    })
}

/// Number of edges.
///
/// # Safety
/// `graph` must be a live handle or NULL (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn srks_graph_edge_count(graph: *const SrksGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.m())
}

/// # Safety
/// `graph` must come from `srks_graph_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn srks_graph_free(graph: *mut SrksGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// The report's JSON text. Valid until the report is freed.
///
/// # Safety
/// `report` must be a live handle or NULL (which yields NULL).
#[no_mangle]
pub unsafe extern "C" fn srks_report_json(report: *const SrksReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.0.as_ptr())
}

/// # Safety
/// `report` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn srks_report_free(report: *mut SrksReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Computes the mixed characteristic polynomial by enumeration, by the
/// operator formula and in closed form, and compares them exactly.
///
/// Returns `SRKS_STATUS_CHECK_FAILED` with a report when they disagree or
/// the polynomial is not real-rooted.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn srks_verify_identity(
    dist: *const SrksDistribution,
    vs: *const SrksVectors,
    out: *mut *mut SrksReport,
) -> SrksStatus {
    guard(|| {
        let out = slot(out)?;
        let (dist, vs) = (&handle(dist, "dist")?.0, &handle(vs, "vectors")?.0);
        let operator = mixed_operator(dist, vs)?;
        let closed = mixed_closed_form(dist, vs)?;
        let reference = mixed_enum(dist, vs)?;
        let agree = operator.poly == reference.poly && closed.poly == reference.poly;
        let real_rooted = reference.is_real_rooted()?;
        *out = report(&json!({
            "enumeration": reference.poly.to_string(),
            "operator": operator.poly.to_string(),
            "closed_form": closed.poly.to_string(),
            "agree": agree,
            "real_rooted": real_rooted,
            "max_root": reference.max_root,
        }))?;
        if agree && real_rooted {
            Ok(())
        } else {
            Err(Failure::Check("identity or real-rootedness failed".into()))
        }
    })
}

/// Runs the interlacing descent and reports the chosen subset.
///
/// Returns `SRKS_STATUS_CHECK_FAILED` with a report when the subset
/// violates the norm bound.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn srks_descend(
    dist: *const SrksDistribution,
    vs: *const SrksVectors,
    tol: f64,
    out: *mut *mut SrksReport,
) -> SrksStatus {
    guard(|| {
        let out = slot(out)?;
        let (dist, vs) = (&handle(dist, "dist")?.0, &handle(vs, "vectors")?.0);
        let cert = charpoly::descend(dist, vs, tol)?;
        let met =
            cert.spectral_norm <= cert.bound + tol && cert.mixed_root <= cert.barrier_bound + tol;
        *out = report(&json!({ "certificate": cert, "bound_met": met }))?;
        if met {
            Ok(())
        } else {
            Err(Failure::Check(
                "the descent output violates the bound".into(),
            ))
        }
    })
}

/// Certificate for an isotropic input with small marginals and norms.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn srks_main_certificate(
    dist: *const SrksDistribution,
    vs: *const SrksVectors,
    tol: f64,
    out: *mut *mut SrksReport,
) -> SrksStatus {
    guard(|| {
        let out = slot(out)?;
        let (dist, vs) = (&handle(dist, "dist")?.0, &handle(vs, "vectors")?.0);
        let cert = charpoly::main_certificate(dist, vs, tol)?;
        *out = report(&serde_json::to_value(&cert)?)?;
        Ok(())
    })
}

/// Splits an isotropic frame into `r` parts with small partial frames.
///
/// # Safety
/// `vs` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn srks_ksr_partition(
    vs: *const SrksVectors,
    r: usize,
    tol: f64,
    budget: u64,
    out: *mut *mut SrksReport,
) -> SrksStatus {
    guard(|| {
        let out = slot(out)?;
        let partition = charpoly::ksr_partition(&handle(vs, "vectors")?.0, r, tol, budget)?;
        *out = report(&serde_json::to_value(&partition)?)?;
        Ok(())
    })
}

/// Fits `λ` so the determinantal measure has marginals `target[0..len]`.
///
/// # Safety
/// `vs` must be live; `target` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn srks_fit_lambda(
    vs: *const SrksVectors,
    target: *const f64,
    len: usize,
    tol: f64,
    max_iter: usize,
    out: *mut *mut SrksReport,
) -> SrksStatus {
    guard(|| {
        let out = slot(out)?;
        let vs = &handle(vs, "vectors")?.0;
        if target.is_null() {
            return Err(Failure::Null("target"));
        }
        let x = std::slice::from_raw_parts(target, len).to_vec();
        let point = BasisPolytopePoint::new(x, vs.dim())?;
        let model = fit_lambda(vs, &point, tol, max_iter)?;
        *out = report(&serde_json::to_value(&model)?)?;
        Ok(())
    })
}

/// Writes the effective resistance of every edge into `out[0..len]`.
/// `len` must equal the edge count.
///
/// # Safety
/// `graph` must be live; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn srks_effective_resistances(
    graph: *const SrksGraph,
    out: *mut f64,
    len: usize,
) -> SrksStatus {
    guard(|| {
        let g = &handle(graph, "graph")?.0;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        if len != g.m() {
            return Err(Failure::Buffer {
                expected: g.m(),
                got: len,
            });
        }
        let values = all_resistances(g)?;
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&values);
        Ok(())
    })
}

/// Finds a thin spanning tree of the whole graph.
///
/// # Safety
/// `graph` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn srks_thin_tree(
    graph: *const SrksGraph,
    eps_target: f64,
    seed: u64,
    budget: u64,
    out: *mut *mut SrksReport,
) -> SrksStatus {
    guard(|| {
        let out = slot(out)?;
        let g = &handle(graph, "graph")?.0;
        let opts = PipelineOptions {
            eps_target,
            seed,
            budget,
            ..PipelineOptions::default()
        };
        let cert = thin_tree_pipeline(g, g.all_edges()?, None, &opts)?;
        *out = report(&serde_json::to_value(&cert)?)?;
        Ok(())
    })
}
