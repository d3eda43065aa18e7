use std::ffi::CStr;
use std::ptr;

use cavity_dce_ffi::*;

fn last_error() -> String {
    let p = dce_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn solve_k_matches_core_and_reports_errors() {
    let mut k = 0.0;
    assert_eq!(unsafe { dce_solve_k(1e12, 1e-2, 1, &mut k) }, DceStatus::Ok);
    assert_eq!(k, cavity_dce::solve_k(1e12, 1e-2, 1).unwrap());

    assert_eq!(
        unsafe { dce_solve_k(-1.0, 1e-2, 1, &mut k) },
        DceStatus::InvalidArgument
    );
    assert!(last_error().contains("conductivity"));
    assert_eq!(
        unsafe { dce_solve_k(1.0, 1.0, 1, ptr::null_mut()) },
        DceStatus::NullPointer
    );
    assert!(last_error().contains("out_k"));
}

#[test]
fn epsilon_and_rate_ratio() {
    let mut eps = 0.0;
    assert_eq!(
        unsafe { dce_epsilon(1e-2, 0.1, 0.1, 1e13, 1e16, 1, &mut eps) },
        DceStatus::Ok
    );
    assert!((eps / 4e-8 - 1.0).abs() < 1e-2);
    let mut r = 0.0;
    assert_eq!(unsafe { dce_rate_ratio(1e-2, 2.0, 1e-8, 2.0, &mut r) }, DceStatus::Ok);
    assert_eq!(r, 1e6);
    assert_eq!(
        unsafe { dce_rate_ratio(0.0, 2.0, 1e-8, 2.0, &mut r) },
        DceStatus::Precondition
    );
}

#[test]
fn fourier_ramp_fills_buffers() {
    let mut amp = [0.0; 8];
    let mut ph = [0.0; 8];
    let st = unsafe { dce_fourier_ramp(1.0, 0.25, 8, amp.as_mut_ptr(), ph.as_mut_ptr()) };
    assert_eq!(st, DceStatus::Ok);
    let s = cavity_dce::fourier_ramp(1.0, 0.25, 8).unwrap();
    for (i, h) in s.harmonics.iter().enumerate() {
        assert_eq!(amp[i], h.amplitude);
        assert_eq!(ph[i], h.phase);
    }
    let st = unsafe { dce_fourier_ramp(1.0, 2.0, 8, amp.as_mut_ptr(), ph.as_mut_ptr()) };
    assert_eq!(st, DceStatus::InvalidArgument);
}

#[test]
fn spectrum_handle_lifecycle() {
    let mut h: *mut DceSpectrum = ptr::null_mut();
    let st = unsafe {
        dce_spectrum_new(
            2.0 * std::f64::consts::PI,
            50.0,
            50.0,
            100.0,
            150.0,
            0.5,
            3,
            1,
            1,
            &mut h,
        )
    };
    assert_eq!(st, DceStatus::Ok);
    let mut n = 0usize;
    assert_eq!(unsafe { dce_spectrum_len(h, &mut n) }, DceStatus::Ok);
    assert_eq!(n, 3);
    let mut m = DceMode {
        mx: 0,
        my: 0,
        mz: 0,
        k0: 0.0,
        epsilon: 0.0,
        omega_bar: 0.0,
        omega_tilde: 0.0,
    };
    assert_eq!(unsafe { dce_spectrum_mode(h, 0, &mut m) }, DceStatus::Ok);
    assert_eq!((m.mx, m.my, m.mz), (1, 1, 1));
    assert!(m.epsilon > 0.0 && m.omega_tilde > m.omega_bar);
    assert_eq!(unsafe { dce_spectrum_mode(h, 3, &mut m) }, DceStatus::InvalidArgument);

    let tau = [0.0, 0.5, 1.0];
    let mut out = [0.0; 3];
    let st = unsafe { dce_parametric_photons(h, 0, 0.5, std::f64::consts::PI, tau.as_ptr(), 3, out.as_mut_ptr()) };
    assert_eq!(st, DceStatus::Ok, "{}", last_error());
    assert!(out[0] < out[1] && out[1] < out[2]);

    unsafe { dce_spectrum_free(h) };
    unsafe { dce_spectrum_free(ptr::null_mut()) };
    assert_eq!(unsafe { dce_spectrum_len(ptr::null(), &mut n) }, DceStatus::NullPointer);
}

#[test]
fn failed_construction_leaves_null_handle() {
    let mut h: *mut DceSpectrum = ptr::NonNull::dangling().as_ptr();
    let st = unsafe { dce_spectrum_new(-1.0, 1.0, 1.0, 1.0, 2.0, 0.5, 1, 1, 1, &mut h) };
    assert_eq!(st, DceStatus::InvalidArgument);
    assert!(h.is_null());
}

#[test]
fn version_is_the_package_version() {
    let v = unsafe { CStr::from_ptr(dce_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/cavity_dce.h");
    assert!(std::path::Path::new(header).exists());
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile_dir();
    let src = dir.join("use_header.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{header}\"\nint main(void) {{ double k; DceStatus s = dce_solve_k(1.0, 1.0, 1, &k); return s == DCE_STATUS_OK ? 0 : 1; }}\n"
        ),
    )
    .unwrap();
    let out = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi-header");
    std::fs::create_dir_all(&d).unwrap();
    d
}
