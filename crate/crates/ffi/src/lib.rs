//! C interface to the prolate basis and the headline metrics.
//!
//! Every fallible call returns a `PsStatus` code; on failure a message is
//! kept per thread and can be read with `ps_last_error_message`. Bases are
//! opaque heap handles released with `ps_basis_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use prolatoscope::metrics::{select_max_modes, superres_factor};
use prolatoscope::stochastic::{photons_from_power, NoiseModel};
use prolatoscope::{load_basis, save_basis, Error, ProlateBasis};

/// Opaque prolate basis.
pub struct PsBasis(ProlateBasis);

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Io = 4,
    Format = 5,
    Panic = 6,
}

/// Light model for `ps_select_max_modes`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsNoiseModel {
    Coherent = 0,
    Squeezed = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PsStatus {
    match e {
        Error::InvalidArgument(_) | Error::Domain { .. } => PsStatus::InvalidArgument,
        Error::Io { .. } => PsStatus::Io,
        Error::Parse { .. } | Error::Version(_) | Error::Checksum { .. } => PsStatus::Format,
        _ => PsStatus::Numerical,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (PsStatus, String)>) -> PsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            PsStatus::Panic
        }
    }
}

fn core<T>(r: prolatoscope::Result<T>) -> Result<T, (PsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (PsStatus, String) {
    (PsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn basis_ref<'a>(b: *const PsBasis) -> Result<&'a ProlateBasis, (PsStatus, String)> {
    b.as_ref().map(|b| &b.0).ok_or_else(|| null("basis"))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, (PsStatus, String)> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| (PsStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), (PsStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ps_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Last error message on this thread, or null. Valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn ps_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Builds a basis of `num_modes` functions for bandwidth `c`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ps_basis_build(
    c: f64,
    num_modes: usize,
    precision_bits: usize,
    out: *mut *mut PsBasis,
) -> PsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let b = core(ProlateBasis::build(c, num_modes, precision_bits))?;
        write_out(out, Box::into_raw(Box::new(PsBasis(b))))
    })
}

/// Loads a basis cache file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_basis_load(path: *const c_char, out: *mut *mut PsBasis) -> PsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let p = path_arg(path)?;
        let b = core(load_basis(&p))?;
        write_out(out, Box::into_raw(Box::new(PsBasis(b))))
    })
}

/// Writes a basis cache file.
///
/// # Safety
/// `basis` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ps_basis_save(basis: *const PsBasis, path: *const c_char) -> PsStatus {
    guard(|| {
        let b = basis_ref(basis)?;
        let p = path_arg(path)?;
        core(save_basis(b, &p))
    })
}

/// Releases a basis. Null is ignored.
///
/// # Safety
/// `basis` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ps_basis_free(basis: *mut PsBasis) {
    if !basis.is_null() {
        drop(Box::from_raw(basis));
    }
}

/// Number of modes, or 0 for a null handle.
///
/// # Safety
/// `basis` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn ps_basis_num_modes(basis: *const PsBasis) -> usize {
    basis.as_ref().map_or(0, |b| b.0.num_modes())
}

/// Space-bandwidth product, or NaN for a null handle.
///
/// # Safety
/// `basis` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn ps_basis_c(basis: *const PsBasis) -> f64 {
    basis.as_ref().map_or(f64::NAN, |b| b.0.c())
}

/// Eigenvalue of mode `n` as a double.
///
/// # Safety
/// `basis` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_lambda(basis: *const PsBasis, n: usize, out: *mut f64) -> PsStatus {
    guard(|| {
        let v = core(basis_ref(basis)?.lambda(n))?;
        write_out(out, v)
    })
}

/// Eigenvalue of mode `n` as mantissa in [1, 10) and decimal exponent.
///
/// # Safety
/// `basis` must come from this library; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_lambda_parts(
    basis: *const PsBasis,
    n: usize,
    mantissa: *mut f64,
    exponent: *mut i32,
) -> PsStatus {
    guard(|| {
        let l = core(basis_ref(basis)?.mode(n))?.lambda();
        if exponent.is_null() {
            return Err(null("exponent"));
        }
        write_out(mantissa, l.mantissa)?;
        write_out(exponent, l.exponent)
    })
}

/// Core-normalized function on |s| <= 1.
///
/// # Safety
/// `basis` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_eval_phi(
    basis: *const PsBasis,
    n: usize,
    x: f64,
    out: *mut f64,
) -> PsStatus {
    guard(|| {
        let v = core(basis_ref(basis)?.eval_phi(n, x))?;
        write_out(out, v)
    })
}

/// Full-line function.
///
/// # Safety
/// `basis` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_eval_psi(
    basis: *const PsBasis,
    n: usize,
    x: f64,
    out: *mut f64,
) -> PsStatus {
    guard(|| {
        let v = core(basis_ref(basis)?.eval_psi(n, x))?;
        write_out(out, v)
    })
}

/// Wing function on |s| > 1.
///
/// # Safety
/// `basis` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_eval_chi(
    basis: *const PsBasis,
    n: usize,
    x: f64,
    out: *mut f64,
) -> PsStatus {
    guard(|| {
        let v = core(basis_ref(basis)?.eval_chi(n, x))?;
        write_out(out, v)
    })
}

/// Imaging half-width `w`, reconstruction half-width `w_l` and their ratio
/// `s` for the first `l` modes. Any output may be null.
///
/// # Safety
/// `basis` must come from this library; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_superres_factor(
    basis: *const PsBasis,
    l: usize,
    w: *mut f64,
    w_l: *mut f64,
    s: *mut f64,
) -> PsStatus {
    guard(|| {
        let r = core(superres_factor(basis_ref(basis)?, l))?;
        for (p, v) in [(w, r.w), (w_l, r.w_l), (s, r.s)] {
            if !p.is_null() {
                p.write(v);
            }
        }
        Ok(())
    })
}

/// Mean photon number for a power (W), wavelength (m) and exposure (s).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_photons_from_power(
    power: f64,
    wavelength: f64,
    time: f64,
    out: *mut f64,
) -> PsStatus {
    guard(|| {
        let v = core(photons_from_power(power, wavelength, time))?;
        write_out(out, v)
    })
}

/// Largest usable mode count at `photons` for a point probe of width `eps`.
/// `r` is ignored for coherent light. `no_reconstruction` may be null.
///
/// # Safety
/// `basis` must come from this library; `l_star` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_select_max_modes(
    basis: *const PsBasis,
    model: PsNoiseModel,
    r: f64,
    photons: f64,
    eps: f64,
    l_star: *mut usize,
    no_reconstruction: *mut bool,
) -> PsStatus {
    guard(|| {
        let b = basis_ref(basis)?;
        let m = match model {
            PsNoiseModel::Coherent => NoiseModel::coherent(),
            PsNoiseModel::Squeezed => core(NoiseModel::squeezed(r))?,
        };
        let sel = core(select_max_modes(b, &m, photons, eps))?;
        write_out(l_star, sel.l_star)?;
        if !no_reconstruction.is_null() {
            no_reconstruction.write(sel.no_reconstruction);
        }
        Ok(())
    })
}
