//! C ABI over `entmeas`.
//!
//! Objects are opaque handles created by `em_*_new`-style functions and
//! released with the matching `em_*_free`. Every fallible call returns an
//! [`EmStatus`]; on failure `em_last_error_message` describes the error for
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use entmeas::dilation::{combined_unitary, default_assignment, verify_dilation_with_tol, UnitaryGate};
use entmeas::infomeasures::coherent_information_measurement;
use entmeas::qmat::{ComplexMatrix, DensityMatrix};
use entmeas::superop::EntanglementMatrix;
use entmeas::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotPositive = 3,
    DimensionMismatch = 4,
    BufferTooSmall = 5,
    Internal = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EmComplex {
    pub re: f64,
    pub im: f64,
}

/// Entropies in bits; see `entmeas::infomeasures::InfoReport`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EmInfoReport {
    pub s_red: f64,
    pub s_d: f64,
    pub s_b: f64,
    pub s_ab: f64,
    pub i_c_formula: f64,
    pub i_c_general: f64,
}

/// Opaque entanglement matrix.
pub struct EmEntanglementMatrix(EntanglementMatrix);

/// Opaque unitary gate with its subsystem layout.
pub struct EmGate(UnitaryGate);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> EmStatus {
    match e {
        Error::NotPositive(_) => EmStatus::NotPositive,
        Error::DimensionMismatch(_) => EmStatus::DimensionMismatch,
        Error::Json(_) | Error::Io(_) => EmStatus::Internal,
        _ => EmStatus::InvalidArgument,
    }
}

fn fail(status: EmStatus, msg: impl Into<String>) -> EmStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> EmStatus {
    let status = status_of(&e);
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into `EmStatus::Panic`.
fn guard(f: impl FnOnce() -> EmStatus) -> EmStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(EmStatus::Panic, msg)
        }
    }
}

unsafe fn read_matrix(entries: *const EmComplex, d: usize) -> Result<ComplexMatrix, EmStatus> {
    if entries.is_null() {
        return Err(fail(EmStatus::NullPointer, "entries is null"));
    }
    if d == 0 {
        return Err(fail(EmStatus::InvalidArgument, "dimension must be positive"));
    }
    let n = d.checked_mul(d).ok_or_else(|| fail(EmStatus::InvalidArgument, "dimension overflows"))?;
    let slice = std::slice::from_raw_parts(entries, n);
    ComplexMatrix::new(d, d, slice.iter().map(|z| Complex64::new(z.re, z.im)).collect()).map_err(from_error)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn em_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next `em_*` call on the same thread.
#[no_mangle]
pub extern "C" fn em_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Two-level entanglement matrix whose realized microstates have overlap `q`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn em_entanglement_matrix_from_q(re: f64, im: f64, out: *mut *mut EmEntanglementMatrix) -> EmStatus {
    guard(|| {
        if out.is_null() {
            return fail(EmStatus::NullPointer, "out is null");
        }
        match EntanglementMatrix::from_overlap(Complex64::new(re, im)) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(EmEntanglementMatrix(r)));
                EmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Entanglement matrix from `d * d` row-major entries.
///
/// # Safety
/// `entries` must point to `d * d` values and `out` to storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn em_entanglement_matrix_new(
    d: usize,
    entries: *const EmComplex,
    out: *mut *mut EmEntanglementMatrix,
) -> EmStatus {
    guard(|| {
        if out.is_null() {
            return fail(EmStatus::NullPointer, "out is null");
        }
        let m = match read_matrix(entries, d) {
            Ok(m) => m,
            Err(s) => return s,
        };
        match EntanglementMatrix::new(m) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(EmEntanglementMatrix(r)));
                EmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Dimension of `r`, or 0 for NULL.
///
/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn em_entanglement_matrix_dim(r: *const EmEntanglementMatrix) -> usize {
    r.as_ref().map_or(0, |r| r.0.d())
}

/// # Safety
/// `r` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn em_entanglement_matrix_free(r: *mut EmEntanglementMatrix) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Object-apparatus-internal gate `U_CD` for `r` with the cyclic cloning assignment.
///
/// # Safety
/// `r` must be a live handle and `out` valid storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn em_combined_unitary(r: *const EmEntanglementMatrix, out: *mut *mut EmGate) -> EmStatus {
    guard(|| {
        let (Some(r), false) = (r.as_ref(), out.is_null()) else {
            return fail(EmStatus::NullPointer, "null argument");
        };
        match combined_unitary(&r.0, &default_assignment(r.0.d())) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(EmGate(g)));
                EmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Total dimension of the gate, or 0 for NULL.
///
/// # Safety
/// `g` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn em_gate_dim(g: *const EmGate) -> usize {
    g.as_ref().map_or(0, |g| g.0.matrix().rows())
}

/// Writes the subsystem dimensions into `dims` and their count into `count`.
///
/// # Safety
/// `dims` must hold `capacity` values; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn em_gate_dims(g: *const EmGate, dims: *mut usize, capacity: usize, count: *mut usize) -> EmStatus {
    guard(|| {
        let (Some(g), false, false) = (g.as_ref(), dims.is_null(), count.is_null()) else {
            return fail(EmStatus::NullPointer, "null argument");
        };
        let src = g.0.dims();
        *count = src.len();
        if capacity < src.len() {
            return fail(EmStatus::BufferTooSmall, format!("need {} slots", src.len()));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), dims, src.len());
        EmStatus::Ok
    })
}

/// Copies the `dim * dim` row-major gate entries into `entries`.
///
/// # Safety
/// `entries` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn em_gate_entries(g: *const EmGate, entries: *mut EmComplex, len: usize) -> EmStatus {
    guard(|| {
        let (Some(g), false) = (g.as_ref(), entries.is_null()) else {
            return fail(EmStatus::NullPointer, "null argument");
        };
        let src = g.0.matrix().entries();
        if len < src.len() {
            return fail(EmStatus::BufferTooSmall, format!("need {} entries", src.len()));
        }
        let dst = std::slice::from_raw_parts_mut(entries, src.len());
        for (d, s) in dst.iter_mut().zip(src) {
            *d = EmComplex { re: s.re, im: s.im };
        }
        EmStatus::Ok
    })
}

/// `max |U†U − I|`, or NaN for NULL.
///
/// # Safety
/// `g` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn em_gate_unitarity_error(g: *const EmGate) -> f64 {
    g.as_ref().map_or(f64::NAN, |g| g.0.unitarity_error())
}

/// # Safety
/// `g` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn em_gate_free(g: *mut EmGate) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Coherent information of the measurement `r` on the `d × d` row-major state `rho`.
///
/// # Safety
/// `rho` must hold `d * d` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn em_coherent_information(
    r: *const EmEntanglementMatrix,
    rho: *const EmComplex,
    d: usize,
    out: *mut EmInfoReport,
) -> EmStatus {
    guard(|| {
        let (Some(r), false) = (r.as_ref(), out.is_null()) else {
            return fail(EmStatus::NullPointer, "null argument");
        };
        let m = match read_matrix(rho, d) {
            Ok(m) => m,
            Err(s) => return s,
        };
        let report = DensityMatrix::single(m).and_then(|rho| coherent_information_measurement(&rho, &r.0));
        match report {
            Ok(rep) => {
                *out = EmInfoReport {
                    s_red: rep.s_red,
                    s_d: rep.s_d,
                    s_b: rep.s_b,
                    s_ab: rep.s_ab,
                    i_c_formula: rep.i_c_formula,
                    i_c_general: rep.i_c_general,
                };
                EmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Runs the dilation checks for `r` at tolerance `tol`.
///
/// # Safety
/// `max_dev` and `pass` must be writable.
#[no_mangle]
pub unsafe extern "C" fn em_verify_dilation(
    r: *const EmEntanglementMatrix,
    tol: f64,
    max_dev: *mut f64,
    pass: *mut bool,
) -> EmStatus {
    guard(|| {
        let (Some(r), false, false) = (r.as_ref(), max_dev.is_null(), pass.is_null()) else {
            return fail(EmStatus::NullPointer, "null argument");
        };
        if tol.is_nan() || tol <= 0.0 {
            return fail(EmStatus::InvalidArgument, "tolerance must be positive");
        }
        let report = verify_dilation_with_tol(&r.0, tol);
        *max_dev = report.max_dev();
        *pass = report.all_pass();
        EmStatus::Ok
    })
}
