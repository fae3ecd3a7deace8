//! C ABI over `asep_duality`.
//!
//! Every fallible call returns an [`AsepStatus`]; on failure the message is
//! kept per thread and read with [`asep_last_error`]. Handles are opaque
//! and owned by the caller until passed to their `_free` function. Strings
//! returned through out-pointers are released with [`asep_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use asep_duality::evolution::{expm_action, DrivingKind, DrivingSpec, ExpmOptions};
use asep_duality::measures::{sam_vector, SamKind, SamSpec};
use asep_duality::operators::{GeneratorSpec, TensorOperator};
use asep_duality::verify::{run_suite, SuiteConfig};
use asep_duality::{Error, NumericField, PositionList, Space, StateVector};

/// Outcome of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AsepStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    /// A verification ran and at least one check failed.
    CheckFailed = 4,
    Panic = 5,
}

/// Conditioning of the driven generator.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AsepDriving {
    Global = 0,
    Boundary = 1,
}

/// Shock-measure family.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AsepSamKind {
    I = 1,
    II = 2,
}

/// Numeric generator restricted to one particle-number sector.
pub struct AsepGenerator {
    op: TensorOperator<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AsepStatus {
    match e {
        Error::KrylovNonConvergence(_)
        | Error::RankDeficient { .. }
        | Error::ZeroNormalization
        | Error::DivisionByZero
        | Error::NotRepresentable(_) => AsepStatus::Numerical,
        _ => AsepStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<AsepStatus, (AsepStatus, String)>) -> AsepStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside asep-duality");
            AsepStatus::Panic
        }
    }
}

fn lib(e: Error) -> (AsepStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (AsepStatus, String) {
    (AsepStatus::NullPointer, format!("{name} is null"))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn asep_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn asep_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: allocated by `CString::into_raw` in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}

fn generator(op: TensorOperator<f64>, out: *mut *mut AsepGenerator) {
    let h = Box::new(AsepGenerator { op });
    // SAFETY: checked non-null by the callers.
    unsafe { *out = Box::into_raw(h) };
}

/// Periodic generator `H(q, α, β)` on the `particles` sector.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn asep_generator_new(
    sites: usize,
    particles: usize,
    q: f64,
    alpha: f64,
    beta: f64,
    out: *mut *mut AsepGenerator,
) -> AsepStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let space = Space::sector(sites, particles).map_err(lib)?;
        let op = GeneratorSpec::periodic(sites, q, alpha, beta).build(space).map_err(lib)?;
        generator(op, out);
        Ok(AsepStatus::Ok)
    })
}

/// Generator conditioned on `conditioning` particles under `driving`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn asep_generator_driven(
    sites: usize,
    particles: usize,
    driving: AsepDriving,
    conditioning: usize,
    q: f64,
    out: *mut *mut AsepGenerator,
) -> AsepStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = match driving {
            AsepDriving::Global => DrivingKind::Global,
            AsepDriving::Boundary => DrivingKind::Boundary,
        };
        let field = NumericField::new(q).map_err(lib)?;
        let space = Space::sector(sites, particles).map_err(lib)?;
        let op = DrivingSpec { kind, conditioning }
            .generator(&field, sites)
            .and_then(|g| g.build(space))
            .map_err(lib)?;
        generator(op, out);
        Ok(AsepStatus::Ok)
    })
}

/// Sector dimension, 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn asep_generator_dim(h: *const AsepGenerator) -> usize {
    // SAFETY: caller passes a live handle or null.
    unsafe { h.as_ref() }.map_or(0, |h| h.op.domain().dim())
}

/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn asep_generator_free(h: *mut AsepGenerator) {
    if !h.is_null() {
        // SAFETY: allocated by `Box::into_raw` in this crate.
        drop(unsafe { Box::from_raw(h) });
    }
}

/// `out = e^{−Ht} v`; both buffers hold `len` = dimension entries in
/// sector order and may not overlap.
///
/// # Safety
/// `h` must be live; `v` readable and `out` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn asep_generator_evolve(
    h: *const AsepGenerator,
    t: f64,
    v: *const f64,
    out: *mut f64,
    len: usize,
) -> AsepStatus {
    guard(|| {
        // SAFETY: caller passes a live handle or null.
        let h = unsafe { h.as_ref() }.ok_or_else(|| null("generator"))?;
        if v.is_null() || out.is_null() {
            return Err(null("vector"));
        }
        let space = h.op.domain();
        if len != space.dim() {
            return Err((AsepStatus::InvalidArgument, format!("len {len}, dimension {}", space.dim())));
        }
        // SAFETY: `v` is readable for `len` doubles.
        let coeffs = unsafe { std::slice::from_raw_parts(v, len) }.to_vec();
        let v0 = StateVector::from_coeffs(space, coeffs).map_err(lib)?;
        let vt = expm_action(&h.op, &v0, t, &ExpmOptions::default()).map_err(lib)?;
        // SAFETY: `out` is writable for `len` doubles.
        unsafe { std::slice::from_raw_parts_mut(out, len) }.copy_from_slice(vt.coeffs());
        Ok(AsepStatus::Ok)
    })
}

/// Unnormalized `𝟙_N |SAM_x⃗⟩` in sector order; `positions` holds `shocks`
/// increasing 1-based sites and `out` has room for `len` = dimension.
///
/// # Safety
/// `positions` readable for `shocks` entries, `out` writable for `len`.
#[no_mangle]
pub unsafe extern "C" fn asep_sam_vector(
    sites: usize,
    particles: usize,
    positions: *const usize,
    shocks: usize,
    z: f64,
    q: f64,
    kind: AsepSamKind,
    out: *mut f64,
    len: usize,
) -> AsepStatus {
    guard(|| {
        if (positions.is_null() && shocks > 0) || out.is_null() {
            return Err(null("buffer"));
        }
        let xs = if shocks == 0 {
            Vec::new()
        } else {
            // SAFETY: readable for `shocks` entries.
            unsafe { std::slice::from_raw_parts(positions, shocks) }.to_vec()
        };
        let kind = match kind {
            AsepSamKind::I => SamKind::I,
            AsepSamKind::II => SamKind::II,
        };
        let field = NumericField::new(q).map_err(lib)?;
        let space = Space::sector(sites, particles).map_err(lib)?;
        if len != space.dim() {
            return Err((AsepStatus::InvalidArgument, format!("len {len}, dimension {}", space.dim())));
        }
        let x = PositionList::new(sites, xs).map_err(lib)?;
        let v = sam_vector(&field, &SamSpec::new(x, z, kind).map_err(lib)?, space).map_err(lib)?;
        // SAFETY: writable for `len` doubles.
        unsafe { std::slice::from_raw_parts_mut(out, len) }.copy_from_slice(v.coeffs());
        Ok(AsepStatus::Ok)
    })
}

/// Runs a verification suite. `config_json` is null or a JSON object with
/// suite settings; the report array is written to `*report_json`, to be
/// released with [`asep_string_free`]. Returns `CheckFailed` when any
/// check fails.
///
/// # Safety
/// `name` and a non-null `config_json` must be nul-terminated strings;
/// `report_json` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn asep_run_suite(
    name: *const c_char,
    config_json: *const c_char,
    report_json: *mut *mut c_char,
) -> AsepStatus {
    guard(|| {
        if name.is_null() || report_json.is_null() {
            return Err(null("argument"));
        }
        let utf8 = |e: std::str::Utf8Error| (AsepStatus::InvalidArgument, e.to_string());
        // SAFETY: nul-terminated per contract.
        let name = unsafe { CStr::from_ptr(name) }.to_str().map_err(utf8)?;
        let config: SuiteConfig = if config_json.is_null() {
            SuiteConfig::default()
        } else {
            // SAFETY: nul-terminated per contract.
            let text = unsafe { CStr::from_ptr(config_json) }.to_str().map_err(utf8)?;
            serde_json::from_str(text).map_err(|e| (AsepStatus::InvalidArgument, e.to_string()))?
        };
        let reports = run_suite(name, &config).map_err(lib)?;
        let text = serde_json::to_string(&reports).expect("reports serialize");
        let c = CString::new(text).expect("json has no nul");
        // SAFETY: checked non-null above.
        unsafe { *report_json = c.into_raw() };
        Ok(if reports.iter().all(|r| r.pass) {
            AsepStatus::Ok
        } else {
            AsepStatus::CheckFailed
        })
    })
}
