//! C ABI over the regsolve library.
//!
//! Every function returns an [`RsStatus`]; results travel through out
//! pointers. Objects cross the boundary as opaque handles that must be
//! released with their matching `_free` function. On any non-OK status the
//! thread-local message from [`rs_last_error_message`] describes the failure.
//! Real-valued data uses `double` buffers; operators loaded from files may be
//! complex, in which case the real-buffer entry points report
//! `RS_STATUS_UNSUPPORTED`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nalgebra::DVector;

use regsolve::error::Error;
use regsolve::io::{self, AnyOperator, AnyVector};
use regsolve::operator::{LinearOperator, RegParam};
use regsolve::oracle::{decompose_default, minimal_norm_solution, DEFAULT_RANK_TOL};
use regsolve::problems;
use regsolve::solvers::{dsm_solve, iterate_fixed_point, iterate_selfadjoint, tikhonov_minimizer, DsmSchedule};
use regsolve::stopping::{discrepancy_stop, stopping_index, NoisyData, ScheduleParams};
use regsolve::verify;

/// Status code of every C-ABI call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotHermitian = 4,
    NumericalFailure = 5,
    IoFailure = 6,
    ParseFailure = 7,
    Unsupported = 8,
    Panic = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").expect("empty message"));
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> RsStatus {
    match err {
        Error::DimensionMismatch(_) => RsStatus::DimensionMismatch,
        Error::NotHermitian { .. } => RsStatus::NotHermitian,
        Error::InvalidParameter(_) => RsStatus::InvalidArgument,
        Error::NonFinite(_) | Error::Numerical(_) => RsStatus::NumericalFailure,
        Error::Parse(_) => RsStatus::ParseFailure,
        Error::Io(_) => RsStatus::IoFailure,
    }
}

fn fail(err: Error) -> RsStatus {
    set_error(&err.to_string());
    status_of(&err)
}

/// Runs a fallible body behind a panic guard.
fn guarded(body: impl FnOnce() -> RsStatus) -> RsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic crossed the C boundary");
            RsStatus::Panic
        }
    }
}

macro_rules! require_non_null {
    ($ptr:expr, $name:literal) => {
        if $ptr.is_null() {
            set_error(concat!($name, " must not be NULL"));
            return RsStatus::NullPointer;
        }
    };
}

unsafe fn path_from(ptr: *const c_char) -> Result<&'static Path, RsStatus> {
    match unsafe { CStr::from_ptr(ptr) }.to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(RsStatus::InvalidArgument)
        }
    }
}

unsafe fn slice_from<'a>(ptr: *const f64, len: usize) -> &'a [f64] {
    if len == 0 {
        &[]
    } else {
        unsafe { std::slice::from_raw_parts(ptr, len) }
    }
}

fn copy_into(out: *mut f64, out_len: usize, data: &[f64], what: &str) -> RsStatus {
    if out_len != data.len() {
        set_error(&format!("{what}: buffer holds {out_len} entries, result needs {}", data.len()));
        return RsStatus::DimensionMismatch;
    }
    unsafe { ptr::copy_nonoverlapping(data.as_ptr(), out, data.len()) };
    RsStatus::Ok
}

/// Opaque dense operator (real or complex).
pub struct RsOperator {
    inner: AnyOperator,
}

/// Opaque generated test problem with its known minimal-norm solution.
pub struct RsProblem {
    inner: problems::TestProblem,
}

/// Opaque solver trace: per-sample abscissae (step indices or times),
/// residuals, optional errors, and the final state.
pub struct RsTrace {
    steps_or_times: Vec<f64>,
    residuals: Vec<f64>,
    errors: Vec<f64>,
    final_state: Vec<f64>,
    converged: bool,
}

/// Version string of the underlying library; static storage, do not free.
#[no_mangle]
pub extern "C" fn rs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn rs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Builds a real dense operator from a row-major buffer.
///
/// # Safety
/// `data` must point to `rows * cols` doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_operator_dense_real(
    data: *const f64,
    rows: usize,
    cols: usize,
    out: *mut *mut RsOperator,
) -> RsStatus {
    guarded(|| {
        require_non_null!(data, "data");
        require_non_null!(out, "out");
        let entries = unsafe { slice_from(data, rows * cols) };
        match LinearOperator::from_rows(rows, cols, entries) {
            Ok(op) => {
                unsafe { *out = Box::into_raw(Box::new(RsOperator { inner: AnyOperator::Real(op) })) };
                RsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Reads an operator from the matrix text format (`m n field` header).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rs_operator_read(path: *const c_char, out: *mut *mut RsOperator) -> RsStatus {
    guarded(|| {
        require_non_null!(path, "path");
        require_non_null!(out, "out");
        let path = match unsafe { path_from(path) } {
            Ok(p) => p,
            Err(status) => return status,
        };
        match io::read_operator(path) {
            Ok(op) => {
                unsafe { *out = Box::into_raw(Box::new(RsOperator { inner: op })) };
                RsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Writes an operator in the matrix text format.
///
/// # Safety
/// `op` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rs_operator_write(op: *const RsOperator, path: *const c_char) -> RsStatus {
    guarded(|| {
        require_non_null!(op, "op");
        require_non_null!(path, "path");
        let path = match unsafe { path_from(path) } {
            Ok(p) => p,
            Err(status) => return status,
        };
        match io::write_operator(unsafe { &(*op).inner }, path) {
            Ok(()) => RsStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `op` must be a live handle (or NULL, which reports zero).
#[no_mangle]
pub unsafe extern "C" fn rs_operator_rows(op: *const RsOperator) -> usize {
    if op.is_null() {
        return 0;
    }
    unsafe { (*op).inner.nrows() }
}

/// # Safety
/// `op` must be a live handle (or NULL, which reports zero).
#[no_mangle]
pub unsafe extern "C" fn rs_operator_cols(op: *const RsOperator) -> usize {
    if op.is_null() {
        return 0;
    }
    unsafe { (*op).inner.ncols() }
}

/// # Safety
/// `op` must be a live handle (or NULL, which reports false).
#[no_mangle]
pub unsafe extern "C" fn rs_operator_is_complex(op: *const RsOperator) -> bool {
    if op.is_null() {
        return false;
    }
    unsafe { (*op).inner.is_complex() }
}

/// Releases an operator handle. NULL is ignored.
///
/// # Safety
/// `op` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn rs_operator_free(op: *mut RsOperator) {
    if !op.is_null() {
        drop(unsafe { Box::from_raw(op) });
    }
}

/// Exact operator norm of the smoothing map `(A*A + shift)^{-1} A*` for a
/// real (`imaginary_shift = false`) or imaginary shift, from the singular
/// values. Always at most `1/(2 sqrt(a))` resp. `1/sqrt(2a)`.
///
/// # Safety
/// `op` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_operator_smoothing_norm(
    op: *const RsOperator,
    a: f64,
    imaginary_shift: bool,
    out: *mut f64,
) -> RsStatus {
    guarded(|| {
        require_non_null!(op, "op");
        require_non_null!(out, "out");
        let reg = match if imaginary_shift { RegParam::imaginary(a) } else { RegParam::real(a) } {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        let norm = match unsafe { &(*op).inner } {
            AnyOperator::Real(m) => decompose_default(m).smoothing_norm_exact(&reg),
            AnyOperator::Complex(m) => decompose_default(m).smoothing_norm_exact(&reg),
        };
        unsafe { *out = norm };
        RsStatus::Ok
    })
}

fn real_operator(op: &AnyOperator) -> Result<&LinearOperator<f64>, RsStatus> {
    match op {
        AnyOperator::Real(m) => Ok(m),
        AnyOperator::Complex(_) => {
            set_error("this entry point supports real operators only");
            Err(RsStatus::Unsupported)
        }
    }
}

/// Minimal-norm least-squares solve through the spectral oracle. `y_out`
/// must hold `cols` doubles; `consistency_out` receives `|A y - f|`.
///
/// # Safety
/// All pointers must be valid; `f` holds `f_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rs_minimal_norm_solve(
    op: *const RsOperator,
    f: *const f64,
    f_len: usize,
    y_out: *mut f64,
    y_len: usize,
    consistency_out: *mut f64,
) -> RsStatus {
    guarded(|| {
        require_non_null!(op, "op");
        require_non_null!(f, "f");
        require_non_null!(y_out, "y_out");
        require_non_null!(consistency_out, "consistency_out");
        let a = match real_operator(unsafe { &(*op).inner }) {
            Ok(a) => a,
            Err(status) => return status,
        };
        let rhs = DVector::from_column_slice(unsafe { slice_from(f, f_len) });
        match minimal_norm_solution(a, &rhs, DEFAULT_RANK_TOL) {
            Ok((y, consistency)) => {
                unsafe { *consistency_out = consistency };
                copy_into(y_out, y_len, y.as_slice(), "y_out")
            }
            Err(e) => fail(e),
        }
    })
}

fn problem_out(out: *mut *mut RsProblem, result: regsolve::Result<problems::TestProblem>) -> RsStatus {
    match result {
        Ok(p) => {
            unsafe { *out = Box::into_raw(Box::new(RsProblem { inner: p })) };
            RsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Seeded random problem of shape `m x n` and rank `r` with singular values
/// log-uniform in [1e-3, 1].
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_problem_rank_deficient(
    m: usize,
    n: usize,
    r: usize,
    seed: u64,
    out: *mut *mut RsProblem,
) -> RsStatus {
    guarded(|| {
        require_non_null!(out, "out");
        problem_out(out, problems::rank_deficient(m, n, r, seed))
    })
}

/// Hilbert matrix problem of size `n`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_problem_hilbert(n: usize, out: *mut *mut RsProblem) -> RsStatus {
    guarded(|| {
        require_non_null!(out, "out");
        problem_out(out, problems::hilbert(n))
    })
}

/// Scaled forward-difference problem of size `(n-1) x n`; the operator norm
/// grows like `2n`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_problem_derivative(n: usize, out: *mut *mut RsProblem) -> RsStatus {
    guarded(|| {
        require_non_null!(out, "out");
        problem_out(out, problems::discretized_derivative(n))
    })
}

/// Seeded real symmetric problem with a one-dimensional kernel.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_problem_symmetric(n: usize, seed: u64, out: *mut *mut RsProblem) -> RsStatus {
    guarded(|| {
        require_non_null!(out, "out");
        problem_out(out, problems::symmetric_singular(n, seed))
    })
}

/// # Safety
/// `p` must be a live handle (or NULL, which reports zero).
#[no_mangle]
pub unsafe extern "C" fn rs_problem_rows(p: *const RsProblem) -> usize {
    if p.is_null() {
        return 0;
    }
    unsafe { (*p).inner.nrows() }
}

/// # Safety
/// `p` must be a live handle (or NULL, which reports zero).
#[no_mangle]
pub unsafe extern "C" fn rs_problem_cols(p: *const RsProblem) -> usize {
    if p.is_null() {
        return 0;
    }
    unsafe { (*p).inner.ncols() }
}

/// Copies the right-hand side into `out` (`rows` doubles).
///
/// # Safety
/// `p` must be a live handle; `out` holds `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rs_problem_rhs(p: *const RsProblem, out: *mut f64, out_len: usize) -> RsStatus {
    guarded(|| {
        require_non_null!(p, "p");
        require_non_null!(out, "out");
        copy_into(out, out_len, unsafe { (*p).inner.rhs().as_slice() }, "rhs")
    })
}

/// Copies the known minimal-norm solution into `out` (`cols` doubles).
///
/// # Safety
/// `p` must be a live handle; `out` holds `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rs_problem_solution(p: *const RsProblem, out: *mut f64, out_len: usize) -> RsStatus {
    guarded(|| {
        require_non_null!(p, "p");
        require_non_null!(out, "out");
        copy_into(out, out_len, unsafe { (*p).inner.solution().as_slice() }, "solution")
    })
}

/// Clones the problem's operator into a standalone handle.
///
/// # Safety
/// `p` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_problem_operator(p: *const RsProblem, out: *mut *mut RsOperator) -> RsStatus {
    guarded(|| {
        require_non_null!(p, "p");
        require_non_null!(out, "out");
        let op = AnyOperator::Real(unsafe { (*p).inner.operator().clone() });
        unsafe { *out = Box::into_raw(Box::new(RsOperator { inner: op })) };
        RsStatus::Ok
    })
}

/// Releases a problem handle. NULL is ignored.
///
/// # Safety
/// `p` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn rs_problem_free(p: *mut RsProblem) {
    if !p.is_null() {
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Perturbs `f` in place-free fashion: writes `f + delta * e` with a seeded
/// unit direction `e` into `out` (`len` doubles).
///
/// # Safety
/// `f` and `out` must hold `len` doubles each.
#[no_mangle]
pub unsafe extern "C" fn rs_add_noise(
    f: *const f64,
    len: usize,
    delta: f64,
    seed: u64,
    out: *mut f64,
) -> RsStatus {
    guarded(|| {
        require_non_null!(f, "f");
        require_non_null!(out, "out");
        let clean = DVector::from_column_slice(unsafe { slice_from(f, len) });
        match problems::add_noise(&clean, delta, seed) {
            Ok(noisy) => copy_into(out, len, noisy.data().as_slice(), "out"),
            Err(e) => fail(e),
        }
    })
}

/// Tikhonov minimizer `(A*A + aI)^{-1} A* g`; `out` holds `cols` doubles.
///
/// # Safety
/// `op` must be a live real-operator handle; buffers must match their lengths.
#[no_mangle]
pub unsafe extern "C" fn rs_tikhonov(
    op: *const RsOperator,
    a: f64,
    g: *const f64,
    g_len: usize,
    out: *mut f64,
    out_len: usize,
) -> RsStatus {
    guarded(|| {
        require_non_null!(op, "op");
        require_non_null!(g, "g");
        require_non_null!(out, "out");
        let a_op = match real_operator(unsafe { &(*op).inner }) {
            Ok(a) => a,
            Err(status) => return status,
        };
        let data = DVector::from_column_slice(unsafe { slice_from(g, g_len) });
        match tikhonov_minimizer(a_op, a, &data) {
            Ok(z) => copy_into(out, out_len, z.as_slice(), "out"),
            Err(e) => fail(e),
        }
    })
}

fn trace_out(out: *mut *mut RsTrace, trace: RsTrace) -> RsStatus {
    unsafe { *out = Box::into_raw(Box::new(trace)) };
    RsStatus::Ok
}

/// Fixed-point iteration from a zero initial guess (which carries no
/// null-space component); pass `reference` (length `cols`) to record errors,
/// or NULL to skip them.
///
/// # Safety
/// `op` must be a live real-operator handle; buffers must match their lengths.
#[no_mangle]
pub unsafe extern "C" fn rs_fixed_point(
    op: *const RsOperator,
    a: f64,
    f: *const f64,
    f_len: usize,
    max_steps: usize,
    tol: f64,
    reference: *const f64,
    reference_len: usize,
    out: *mut *mut RsTrace,
) -> RsStatus {
    guarded(|| {
        require_non_null!(op, "op");
        require_non_null!(f, "f");
        require_non_null!(out, "out");
        let a_op = match real_operator(unsafe { &(*op).inner }) {
            Ok(a) => a,
            Err(status) => return status,
        };
        let data = DVector::from_column_slice(unsafe { slice_from(f, f_len) });
        let reference = if reference.is_null() {
            None
        } else {
            Some(DVector::from_column_slice(unsafe { slice_from(reference, reference_len) }))
        };
        let u1 = DVector::zeros(a_op.ncols());
        match iterate_fixed_point(a_op, a, &data, &u1, max_steps, tol, reference.as_ref()) {
            Ok(trace) => trace_out(
                out,
                RsTrace {
                    steps_or_times: (0..trace.steps()).map(|k| k as f64).collect(),
                    residuals: trace.residuals().to_vec(),
                    errors: trace.errors().to_vec(),
                    final_state: trace.final_iterate().as_slice().to_vec(),
                    converged: trace.converged(),
                },
            ),
            Err(e) => fail(e),
        }
    })
}

/// Imaginary-shift iteration for Hermitian operators. Writes the real part of
/// the final iterate into `out` and the norm of its imaginary part into
/// `imaginary_norm_out`.
///
/// # Safety
/// `op` must be a live real-operator handle; buffers must match their lengths.
#[no_mangle]
pub unsafe extern "C" fn rs_selfadjoint(
    op: *const RsOperator,
    a: f64,
    f: *const f64,
    f_len: usize,
    max_steps: usize,
    tol: f64,
    out: *mut f64,
    out_len: usize,
    imaginary_norm_out: *mut f64,
) -> RsStatus {
    guarded(|| {
        require_non_null!(op, "op");
        require_non_null!(f, "f");
        require_non_null!(out, "out");
        require_non_null!(imaginary_norm_out, "imaginary_norm_out");
        let a_op = match real_operator(unsafe { &(*op).inner }) {
            Ok(a) => a,
            Err(status) => return status,
        };
        let data = DVector::from_column_slice(unsafe { slice_from(f, f_len) });
        let u1 = DVector::zeros(a_op.ncols());
        match iterate_selfadjoint(a_op, a, &data, &u1, max_steps, tol, None) {
            Ok(trace) => {
                let (real, imag) = trace.realize_final();
                unsafe { *imaginary_norm_out = imag };
                copy_into(out, out_len, real.as_slice(), "out")
            }
            Err(e) => fail(e),
        }
    })
}

/// Integrates the continuous regularization flow
/// `du/dt = -u + (A*A + eps(t) I)^{-1} A* f` with `eps(t) = eps0 (1+t)^{-p}`
/// by fixed-step RK4 from a zero initial state.
///
/// # Safety
/// `op` must be a live real-operator handle; buffers must match their lengths.
#[no_mangle]
pub unsafe extern "C" fn rs_dsm(
    op: *const RsOperator,
    f: *const f64,
    f_len: usize,
    eps0: f64,
    p: f64,
    t_max: f64,
    h: f64,
    out: *mut *mut RsTrace,
) -> RsStatus {
    guarded(|| {
        require_non_null!(op, "op");
        require_non_null!(f, "f");
        require_non_null!(out, "out");
        let a_op = match real_operator(unsafe { &(*op).inner }) {
            Ok(a) => a,
            Err(status) => return status,
        };
        let sched = match DsmSchedule::new(eps0, p) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        let data = DVector::from_column_slice(unsafe { slice_from(f, f_len) });
        let u0 = DVector::zeros(a_op.ncols());
        match dsm_solve(a_op, &data, &sched, &u0, t_max, h, None) {
            Ok(trace) => trace_out(
                out,
                RsTrace {
                    steps_or_times: trace.times().to_vec(),
                    residuals: trace.residuals().to_vec(),
                    errors: trace.errors().to_vec(),
                    final_state: trace.final_state().as_slice().to_vec(),
                    converged: true,
                },
            ),
            Err(e) => fail(e),
        }
    })
}

/// Number of recorded samples.
///
/// # Safety
/// `t` must be a live handle (or NULL, which reports zero).
#[no_mangle]
pub unsafe extern "C" fn rs_trace_len(t: *const RsTrace) -> usize {
    if t.is_null() {
        return 0;
    }
    unsafe { (*t).steps_or_times.len() }
}

/// Length of the final state vector.
///
/// # Safety
/// `t` must be a live handle (or NULL, which reports zero).
#[no_mangle]
pub unsafe extern "C" fn rs_trace_state_len(t: *const RsTrace) -> usize {
    if t.is_null() {
        return 0;
    }
    unsafe { (*t).final_state.len() }
}

/// Whether the successive-difference tolerance was met before the step cap.
///
/// # Safety
/// `t` must be a live handle (or NULL, which reports false).
#[no_mangle]
pub unsafe extern "C" fn rs_trace_converged(t: *const RsTrace) -> bool {
    if t.is_null() {
        return false;
    }
    unsafe { (*t).converged }
}

/// Copies step indices (or times) into `out` (`rs_trace_len` doubles).
///
/// # Safety
/// `t` must be a live handle; `out` holds `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rs_trace_abscissae(t: *const RsTrace, out: *mut f64, out_len: usize) -> RsStatus {
    guarded(|| {
        require_non_null!(t, "t");
        require_non_null!(out, "out");
        copy_into(out, out_len, unsafe { &(*t).steps_or_times }, "abscissae")
    })
}

/// Copies residuals into `out` (`rs_trace_len` doubles).
///
/// # Safety
/// `t` must be a live handle; `out` holds `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rs_trace_residuals(t: *const RsTrace, out: *mut f64, out_len: usize) -> RsStatus {
    guarded(|| {
        require_non_null!(t, "t");
        require_non_null!(out, "out");
        copy_into(out, out_len, unsafe { &(*t).residuals }, "residuals")
    })
}

/// Copies errors against the reference into `out`; fails with
/// `RS_STATUS_UNSUPPORTED` when the run recorded none.
///
/// # Safety
/// `t` must be a live handle; `out` holds `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rs_trace_errors(t: *const RsTrace, out: *mut f64, out_len: usize) -> RsStatus {
    guarded(|| {
        require_non_null!(t, "t");
        require_non_null!(out, "out");
        if unsafe { (*t).errors.is_empty() } {
            set_error("trace recorded no reference errors");
            return RsStatus::Unsupported;
        }
        copy_into(out, out_len, unsafe { &(*t).errors }, "errors")
    })
}

/// Copies the final state into `out` (`rs_trace_state_len` doubles).
///
/// # Safety
/// `t` must be a live handle; `out` holds `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rs_trace_final_state(t: *const RsTrace, out: *mut f64, out_len: usize) -> RsStatus {
    guarded(|| {
        require_non_null!(t, "t");
        require_non_null!(out, "out");
        copy_into(out, out_len, unsafe { &(*t).final_state }, "final_state")
    })
}

/// Releases a trace handle. NULL is ignored.
///
/// # Safety
/// `t` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn rs_trace_free(t: *mut RsTrace) {
    if !t.is_null() {
        drop(unsafe { Box::from_raw(t) });
    }
}

/// Schedule-based stopping index `ceil(c * delta^(-gamma))`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_stopping_index(delta: f64, gamma: f64, c: f64, out: *mut usize) -> RsStatus {
    guarded(|| {
        require_non_null!(out, "out");
        let params = match ScheduleParams::new(gamma, c) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        match stopping_index(delta, &params) {
            Ok(n) => {
                unsafe { *out = n };
                RsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// First trace index whose residual falls to `c * delta`; `reached_out`
/// reports whether the threshold was crossed at all.
///
/// # Safety
/// `t` must be a live handle; out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rs_discrepancy_stop(
    t: *const RsTrace,
    delta: f64,
    c: f64,
    index_out: *mut usize,
    reached_out: *mut bool,
) -> RsStatus {
    guarded(|| {
        require_non_null!(t, "t");
        require_non_null!(index_out, "index_out");
        require_non_null!(reached_out, "reached_out");
        let data = match NoisyData::new(DVector::zeros(1), delta) {
            Ok(d) => d,
            Err(e) => return fail(e),
        };
        match discrepancy_stop(unsafe { &(*t).residuals }, &data, c) {
            Ok(stop) => {
                unsafe {
                    *index_out = stop.index;
                    *reached_out = stop.reached;
                }
                RsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Writes a trace as `step_or_time,error,residual` CSV.
///
/// # Safety
/// `t` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rs_trace_write_csv(t: *const RsTrace, path: *const c_char) -> RsStatus {
    guarded(|| {
        require_non_null!(t, "t");
        require_non_null!(path, "path");
        let path = match unsafe { path_from(path) } {
            Ok(p) => p,
            Err(status) => return status,
        };
        let trace = unsafe { &*t };
        let has_errors = !trace.errors.is_empty();
        let rows: Vec<io::TraceRow> = (0..trace.steps_or_times.len())
            .map(|k| io::TraceRow {
                step_or_time: trace.steps_or_times[k],
                error: if has_errors { Some(trace.errors[k]) } else { None },
                residual: trace.residuals[k],
            })
            .collect();
        let file = match std::fs::File::create(path) {
            Ok(f) => f,
            Err(e) => return fail(Error::Io(e)),
        };
        match io::write_trace_csv(file, &rows) {
            Ok(()) => RsStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Runs the named invariant suites; sets `passed_out` and returns OK unless
/// the suite itself could not run. Takes tens of seconds.
///
/// # Safety
/// `passed_out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_verify(passed_out: *mut bool) -> RsStatus {
    guarded(|| {
        require_non_null!(passed_out, "passed_out");
        let report = verify::run_all();
        unsafe { *passed_out = report.all_passed() };
        RsStatus::Ok
    })
}

/// Writes a problem bundle (`A.txt`, `f.txt`, `y.txt`, `problem.json`) into a
/// directory, optionally with noisy data.
///
/// # Safety
/// `p` must be a live handle; `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rs_problem_export(
    p: *const RsProblem,
    dir: *const c_char,
    delta: f64,
    seed: u64,
) -> RsStatus {
    guarded(|| {
        require_non_null!(p, "p");
        require_non_null!(dir, "dir");
        let dir = match unsafe { path_from(dir) } {
            Ok(d) => d,
            Err(status) => return status,
        };
        let problem = unsafe { &(*p).inner };
        let noisy = if delta > 0.0 {
            match problems::add_noise(problem.rhs(), delta, seed) {
                Ok(n) => Some(n),
                Err(e) => return fail(e),
            }
        } else {
            None
        };
        match io::export_problem(problem, noisy.as_ref(), dir) {
            Ok(()) => RsStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Reads a vector file and copies it into `out`; `len_out` receives the
/// length. Call with `out = NULL` first to query the length.
///
/// # Safety
/// `path` must be a NUL-terminated string; `len_out` valid; `out` either NULL
/// or `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rs_vector_read(
    path: *const c_char,
    out: *mut f64,
    out_len: usize,
    len_out: *mut usize,
) -> RsStatus {
    guarded(|| {
        require_non_null!(path, "path");
        require_non_null!(len_out, "len_out");
        let path = match unsafe { path_from(path) } {
            Ok(p) => p,
            Err(status) => return status,
        };
        match io::read_vector(path) {
            Ok(AnyVector::Real(v)) => {
                unsafe { *len_out = v.len() };
                if out.is_null() {
                    RsStatus::Ok
                } else {
                    copy_into(out, out_len, v.as_slice(), "out")
                }
            }
            Ok(AnyVector::Complex(_)) => {
                set_error("vector file is complex; this entry point reads real vectors");
                RsStatus::Unsupported
            }
            Err(e) => fail(e),
        }
    })
}
