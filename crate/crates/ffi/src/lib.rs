//! C ABI over the simulator core.
//!
//! Every function returns a [`DceStatus`]; results go through out-pointers.
//! On failure the message is available from [`dce_last_error`] on the same
//! thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cavity_dce::msa::{msa_parametric, rate_ratio};
use cavity_dce::{
    epsilon_n, fourier_ramp, solve_k, CavityConfig, DceError, FourierSeries, Harmonic, ModeCut, ModeSpectrum, Tolerance,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DceStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NoConvergence = 3,
    Precondition = 4,
    Resource = 5,
    Io = 6,
    Panic = 7,
}

/// One ψ mode of a spectrum.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DceMode {
    pub mx: u32,
    pub my: u32,
    pub mz: u32,
    pub k0: f64,
    pub epsilon: f64,
    pub omega_bar: f64,
    pub omega_tilde: f64,
}

/// Opaque mode table.
pub struct DceSpectrum {
    inner: ModeSpectrum,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &DceError) -> DceStatus {
    match err {
        DceError::Config(_) | DceError::Domain(_) => DceStatus::InvalidArgument,
        DceError::NoConvergence { .. } | DceError::Quadrature { .. } => DceStatus::NoConvergence,
        DceError::Precondition(_) => DceStatus::Precondition,
        DceError::Resolution { .. } | DceError::StepAudit { .. } | DceError::StepBudget { .. } => DceStatus::Resource,
        DceError::Io(_) | DceError::Csv(_) => DceStatus::Io,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard<F: FnOnce() -> Result<(), (DceStatus, String)>>(f: F) -> DceStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DceStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            DceStatus::Panic
        }
    }
}

fn lift(err: DceError) -> (DceStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(name: &str) -> (DceStatus, String) {
    (DceStatus::NullPointer, format!("{name} is null"))
}

/// Message of the last failure on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dce_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static, NUL-terminated library version.
#[no_mangle]
pub extern "C" fn dce_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Wavenumber on branch `m` of `2k·cot(k·lx/2) = −v`.
///
/// # Safety
/// `out_k` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn dce_solve_k(v: f64, lx: f64, m: u32, out_k: *mut f64) -> DceStatus {
    guard(|| {
        if out_k.is_null() {
            return Err(null("out_k"));
        }
        let k = solve_k(v, lx, m).map_err(lift)?;
        *out_k = k;
        Ok(())
    })
}

/// Modulation depth of longitudinal branch `mx` for the given cavity.
///
/// # Safety
/// `out_eps` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn dce_epsilon(
    lx: f64,
    ly: f64,
    lz: f64,
    v0: f64,
    vmax: f64,
    mx: u32,
    out_eps: *mut f64,
) -> DceStatus {
    guard(|| {
        if out_eps.is_null() {
            return Err(null("out_eps"));
        }
        let cfg = CavityConfig::new(lx, ly, lz, v0, vmax).map_err(lift)?;
        let k0 = solve_k(v0, lx, mx).map_err(lift)?;
        *out_eps = epsilon_n(&cfg, k0);
        Ok(())
    })
}

/// Amplitudes and phases of harmonics `1..=j_max` of the linear ramp.
///
/// # Safety
/// `amplitudes` and `phases` must be null or point to `j_max` writable
/// `double`s each.
#[no_mangle]
pub unsafe extern "C" fn dce_fourier_ramp(
    period: f64,
    tau_e: f64,
    j_max: u32,
    amplitudes: *mut f64,
    phases: *mut f64,
) -> DceStatus {
    guard(|| {
        if amplitudes.is_null() {
            return Err(null("amplitudes"));
        }
        if phases.is_null() {
            return Err(null("phases"));
        }
        let s = fourier_ramp(period, tau_e, j_max).map_err(lift)?;
        let amp = std::slice::from_raw_parts_mut(amplitudes, j_max as usize);
        let ph = std::slice::from_raw_parts_mut(phases, j_max as usize);
        for (i, h) in s.harmonics.iter().enumerate() {
            amp[i] = h.amplitude;
            ph[i] = h.phase;
        }
        Ok(())
    })
}

/// `(eps_n/eps_mov)(period_mov/period)`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn dce_rate_ratio(
    eps_n: f64,
    period: f64,
    eps_mov: f64,
    period_mov: f64,
    out: *mut f64,
) -> DceStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = rate_ratio(eps_n, period, eps_mov, period_mov).map_err(lift)?;
        Ok(())
    })
}

/// Builds the ψ mode table with mean drive `f0`. Free with
/// [`dce_spectrum_free`].
///
/// # Safety
/// `out` must be null or point to writable memory for one pointer.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn dce_spectrum_new(
    lx: f64,
    ly: f64,
    lz: f64,
    v0: f64,
    vmax: f64,
    f0: f64,
    nx: u32,
    ny: u32,
    nz: u32,
    out: *mut *mut DceSpectrum,
) -> DceStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = CavityConfig::new(lx, ly, lz, v0, vmax).map_err(lift)?;
        let inner = ModeSpectrum::build(&cfg, f0, ModeCut { nx, ny, nz }).map_err(lift)?;
        *out = Box::into_raw(Box::new(DceSpectrum { inner }));
        Ok(())
    })
}

/// # Safety
/// `spectrum` must be null or a pointer from [`dce_spectrum_new`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn dce_spectrum_free(spectrum: *mut DceSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// # Safety
/// `spectrum` must be null or a live handle; `out_len` null or writable.
#[no_mangle]
pub unsafe extern "C" fn dce_spectrum_len(spectrum: *const DceSpectrum, out_len: *mut usize) -> DceStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        if out_len.is_null() {
            return Err(null("out_len"));
        }
        *out_len = s.inner.psi.len();
        Ok(())
    })
}

/// # Safety
/// `spectrum` must be null or a live handle; `out_mode` null or writable.
#[no_mangle]
pub unsafe extern "C" fn dce_spectrum_mode(
    spectrum: *const DceSpectrum,
    index: usize,
    out_mode: *mut DceMode,
) -> DceStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        if out_mode.is_null() {
            return Err(null("out_mode"));
        }
        let m = s.inner.psi.get(index).ok_or_else(|| {
            (
                DceStatus::InvalidArgument,
                format!("mode index {index} out of range ({} modes)", s.inner.psi.len()),
            )
        })?;
        *out_mode = DceMode {
            mx: m.index.mx,
            my: m.index.my,
            mz: m.index.mz,
            k0: m.k0,
            epsilon: m.epsilon,
            omega_bar: m.omega_bar,
            omega_tilde: m.omega_tilde,
        };
        Ok(())
    })
}

/// Photon number of mode `index` under a single drive harmonic of the given
/// amplitude and phase placed exactly on its parametric resonance, at slow
/// times `tau[0..n]`.
///
/// # Safety
/// `spectrum` must be null or a live handle; `tau` and `out_n` null or
/// valid for `n` `double`s.
#[no_mangle]
pub unsafe extern "C" fn dce_parametric_photons(
    spectrum: *const DceSpectrum,
    index: usize,
    amplitude: f64,
    phase: f64,
    tau: *const f64,
    n: usize,
    out_n: *mut f64,
) -> DceStatus {
    guard(|| {
        let s = spectrum.as_ref().ok_or_else(|| null("spectrum"))?;
        if tau.is_null() {
            return Err(null("tau"));
        }
        if out_n.is_null() {
            return Err(null("out_n"));
        }
        let m = s
            .inner
            .psi
            .get(index)
            .ok_or_else(|| (DceStatus::InvalidArgument, format!("mode index {index} out of range")))?;
        let series = FourierSeries {
            omega: 2.0 * m.omega_tilde,
            f0: s.inner.f0,
            harmonics: vec![Harmonic { j: 1, amplitude, phase }],
        };
        let grid = std::slice::from_raw_parts(tau, n);
        let (_, rec) = msa_parametric(&s.inner, &series, m.index, 1, grid, Tolerance::Default).map_err(lift)?;
        if rec.n[0].len() < n {
            return Err((
                DceStatus::Resource,
                format!("photon number overflowed after {} of {n} samples", rec.n[0].len()),
            ));
        }
        std::slice::from_raw_parts_mut(out_n, n).copy_from_slice(&rec.n[0]);
        Ok(())
    })
}
