//! C ABI over `specfill`.
//!
//! Every fallible call returns a [`SpecfillStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and read
//! back with [`specfill_last_error`]. Handles are opaque and must be released
//! with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use specfill::process::{sample_path, MomentOracle, ProcessSpec};
use specfill::spectra::{build_matrix, eigenvalues, semicircle_cdf, semicircle_density};
use specfill::{Error, FillingMap};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecfillStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Process = 3,
    Filling = 4,
    Spectra = 5,
    Verify = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecfillFillingKind {
    Diagonal = 0,
    RowWise = 1,
}

/// A process generator together with its exact moment oracle.
pub struct SpecfillProcess {
    spec: ProcessSpec,
    oracle: Box<dyn MomentOracle>,
}

/// A filling bijection of fixed dimension.
pub struct SpecfillFilling {
    map: FillingMap,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> SpecfillStatus {
    match err {
        Error::Process(_) => SpecfillStatus::Process,
        Error::Filling(_) => SpecfillStatus::Filling,
        Error::Spectra(_) => SpecfillStatus::Spectra,
        Error::Verify(_) => SpecfillStatus::Verify,
        _ => SpecfillStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic.
fn guard<F>(f: F) -> SpecfillStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpecfillStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SpecfillStatus::Panic
        }
    }
}

struct Failure(SpecfillStatus, String);

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let e = e.into();
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SpecfillStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(SpecfillStatus::InvalidArgument, msg.into())
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn specfill_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

fn new_process(spec: ProcessSpec, out: *mut *mut SpecfillProcess) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    let oracle = spec.oracle()?;
    let handle = Box::new(SpecfillProcess { spec, oracle });
    unsafe { *out = Box::into_raw(handle) };
    Ok(())
}

/// Builds a process from its JSON description, e.g.
/// `{"kind": "binary", "p": 0.7}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn specfill_process_from_json(
    json: *const c_char,
    out: *mut *mut SpecfillProcess,
) -> SpecfillStatus {
    guard(|| {
        let text = c_str(json, "json")?;
        let spec: ProcessSpec = serde_json::from_str(text)
            .map_err(|e| Failure(SpecfillStatus::Process, e.to_string()))?;
        new_process(spec, out)
    })
}

/// Binary chain with stay probability `p`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn specfill_process_binary(
    p: f64,
    out: *mut *mut SpecfillProcess,
) -> SpecfillStatus {
    guard(|| new_process(ProcessSpec::Binary(specfill::BinaryChain::new(p)?), out))
}

/// # Safety
/// `process` must come from a `specfill_process_*` constructor and not be
/// freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn specfill_process_free(process: *mut SpecfillProcess) {
    if !process.is_null() {
        drop(Box::from_raw(process));
    }
}

/// Exact `E[Z_{i_1} .. Z_{i_k}]`. Indices may be given in any order.
///
/// # Safety
/// `indices` must point to `len` readable values (or be NULL with `len` 0).
#[no_mangle]
pub unsafe extern "C" fn specfill_process_mixed_moment(
    process: *const SpecfillProcess,
    indices: *const u64,
    len: usize,
    out: *mut f64,
) -> SpecfillStatus {
    guard(|| {
        let process = as_ref(process, "process")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut idx = if len == 0 {
            Vec::new()
        } else {
            as_ref(indices, "indices")?;
            std::slice::from_raw_parts(indices, len).to_vec()
        };
        idx.sort_unstable();
        *out = process.oracle.mixed_moment(&idx)?;
        Ok(())
    })
}

/// Writes a path `Z_1..Z_len` drawn from `seed` into `out`.
///
/// # Safety
/// `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn specfill_process_sample(
    process: *const SpecfillProcess,
    len: usize,
    seed: u64,
    out: *mut f64,
) -> SpecfillStatus {
    guard(|| {
        let process = as_ref(process, "process")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let path = sample_path(&process.spec, len, seed)?;
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&path.values);
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn specfill_filling_new(
    kind: SpecfillFillingKind,
    n: usize,
    out: *mut *mut SpecfillFilling,
) -> SpecfillStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let map = match kind {
            SpecfillFillingKind::Diagonal => FillingMap::diagonal(n)?,
            SpecfillFillingKind::RowWise => FillingMap::row_wise(n)?,
        };
        *out = Box::into_raw(Box::new(SpecfillFilling { map }));
        Ok(())
    })
}

/// Loads a custom table of `m i j` lines.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn specfill_filling_load(
    path: *const c_char,
    out: *mut *mut SpecfillFilling,
) -> SpecfillStatus {
    guard(|| {
        let path = c_str(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let map = FillingMap::load_custom(std::path::Path::new(path))?;
        *out = Box::into_raw(Box::new(SpecfillFilling { map }));
        Ok(())
    })
}

/// # Safety
/// `filling` must come from a `specfill_filling_*` constructor and not be
/// freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn specfill_filling_free(filling: *mut SpecfillFilling) {
    if !filling.is_null() {
        drop(Box::from_raw(filling));
    }
}

/// Dimension `N` of the filling.
///
/// # Safety
/// `filling` must be a live handle or NULL (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn specfill_filling_dimension(filling: *const SpecfillFilling) -> usize {
    filling.as_ref().map_or(0, |f| f.map.n())
}

/// Cell `(i, j)`, 1-based with `i <= j`, receiving `Z_m`.
///
/// # Safety
/// `i` and `j` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn specfill_filling_phi(
    filling: *const SpecfillFilling,
    m: u64,
    i: *mut usize,
    j: *mut usize,
) -> SpecfillStatus {
    guard(|| {
        let f = as_ref(filling, "filling")?;
        if i.is_null() || j.is_null() {
            return Err(null("i or j"));
        }
        let (a, b) = f.map.phi(m)?;
        *i = a;
        *j = b;
        Ok(())
    })
}

/// Index `m` of the 1-based cell `(i, j)`; either orientation is accepted.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn specfill_filling_phi_inv(
    filling: *const SpecfillFilling,
    i: usize,
    j: usize,
    out: *mut u64,
) -> SpecfillStatus {
    guard(|| {
        let f = as_ref(filling, "filling")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = f.map.phi_inv(i, j)?;
        Ok(())
    })
}

/// `J`: the number of neighbouring indices `m, m + 1` landing in the same
/// row or column.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn specfill_filling_neighbor_count(
    filling: *const SpecfillFilling,
    out: *mut u64,
) -> SpecfillStatus {
    guard(|| {
        let f = as_ref(filling, "filling")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = f.map.neighbor_count();
        Ok(())
    })
}

/// Samples one matrix and writes its `N` ascending eigenvalues to `out`.
///
/// # Safety
/// `out` must point to `len` writable values; `len` must equal `N`.
#[no_mangle]
pub unsafe extern "C" fn specfill_sample_eigenvalues(
    process: *const SpecfillProcess,
    filling: *const SpecfillFilling,
    seed: u64,
    out: *mut f64,
    len: usize,
) -> SpecfillStatus {
    guard(|| {
        let p = as_ref(process, "process")?;
        let f = as_ref(filling, "filling")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if len != f.map.n() {
            return Err(invalid(format!("len = {len}, the filling has N = {}", f.map.n())));
        }
        let path = sample_path(&p.spec, f.map.len(), seed)?;
        let sample = build_matrix(&path, &f.map)?;
        let eig = eigenvalues(&sample)?;
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&eig);
        Ok(())
    })
}

/// Exact `E[(1/N) tr A^k]` by closed-path enumeration (`N^k <= 1e8`).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn specfill_expected_trace_moment(
    process: *const SpecfillProcess,
    filling: *const SpecfillFilling,
    k: u32,
    out: *mut f64,
) -> SpecfillStatus {
    guard(|| {
        let p = as_ref(process, "process")?;
        let f = as_ref(filling, "filling")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = specfill::expected_trace_moment_bruteforce(&*p.oracle, &f.map, k)?;
        Ok(())
    })
}

/// Catalan number `C_k`, `k <= 30`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn specfill_catalan(k: u32, out: *mut u64) -> SpecfillStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = specfill::spectra::catalan(k)?;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn specfill_semicircle_density(x: f64) -> f64 {
    semicircle_density(x)
}

#[no_mangle]
pub extern "C" fn specfill_semicircle_cdf(x: f64) -> f64 {
    semicircle_cdf(x)
}

#[no_mangle]
pub extern "C" fn specfill_seed_for_trial(base: u64, trial: u64) -> u64 {
    specfill::seed_for_trial(base, trial)
}
