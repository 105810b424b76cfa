use std::ffi::{c_char, c_int, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use decolab_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe {
        decolab_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn density_and_wigner_handles() {
    unsafe {
        let mut rho = ptr::null_mut();
        assert_eq!(decolab_density_cat(128, 16.0, 8.0, 1.0, 0.0, &mut rho), DecolabStatus::Ok);
        let mut n = 0usize;
        assert_eq!(decolab_density_size(rho, &mut n), DecolabStatus::Ok);
        assert_eq!(n, 128);
        let (mut trace, mut purity) = (0.0, 0.0);
        decolab_density_trace(rho, &mut trace);
        decolab_density_purity(rho, &mut purity);
        assert!((trace - 1.0).abs() < 1e-12 && (purity - 1.0).abs() < 1e-10);

        let (mut re, mut im) = (vec![0.0; n * n], vec![0.0; n * n]);
        assert_eq!(decolab_density_entries(rho, re.as_mut_ptr(), im.as_mut_ptr(), n * n - 1), DecolabStatus::BufferTooSmall);
        assert_eq!(decolab_density_entries(rho, re.as_mut_ptr(), im.as_mut_ptr(), n * n), DecolabStatus::Ok);
        assert!(re.iter().any(|&v| v > 0.0));

        let mut w = ptr::null_mut();
        assert_eq!(decolab_wigner_from_density(rho, &mut w), DecolabStatus::Ok);
        let (mut norm, mut neg) = (0.0, 0.0);
        decolab_wigner_normalization(w, &mut norm);
        decolab_wigner_negativity(w, &mut neg);
        assert!((norm - 1.0).abs() < 1e-10);
        assert!(neg > 1e-2);
        let mut values = vec![0.0; n * n];
        assert_eq!(decolab_wigner_values(w, values.as_mut_ptr(), values.len()), DecolabStatus::Ok);
        decolab_wigner_free(w);
        decolab_density_free(rho);
    }
}

#[test]
fn evolution_through_the_abi() {
    unsafe {
        let mut rho = ptr::null_mut();
        assert_eq!(decolab_density_gaussian(64, 8.0, 0.0, 0.0, 1.0, &mut rho), DecolabStatus::Ok);
        let model = DecolabModel {
            mass: 1.0,
            gamma: 0.0,
            diffusion: 0.1,
            coefficients: [0.0, 0.0, 0.5, 0.0, 0.0],
            drive_amplitude: 0.0,
            drive_frequency: 0.0,
        };
        let mut out = ptr::null_mut();
        assert_eq!(decolab_evolve(rho, &model, 0.5, 1e-3, &mut out), DecolabStatus::Ok);
        let mut purity = 0.0;
        decolab_density_purity(out, &mut purity);
        assert!(purity < 1.0 && purity > 0.5);
        let mut entropy = 0.0;
        assert_eq!(decolab_density_entropy(out, &mut entropy), DecolabStatus::Ok);
        assert!(entropy > 0.0);

        let mut bad = ptr::null_mut();
        assert_eq!(decolab_evolve(rho, &model, 0.5, 1.0, &mut bad), DecolabStatus::InvalidArgument);
        assert!(bad.is_null());
        assert!(last_error().contains("time step"));
        decolab_density_free(out);
        decolab_density_free(rho);
    }
}

#[test]
fn errors_and_null_handling() {
    unsafe {
        let mut rho = ptr::null_mut();
        assert_eq!(decolab_density_gaussian(100, 8.0, 0.0, 0.0, 1.0, &mut rho), DecolabStatus::InvalidArgument);
        assert!(last_error().contains("grid"));
        assert_eq!(decolab_density_gaussian(64, 8.0, 0.0, 0.0, 1.0, ptr::null_mut()), DecolabStatus::NullPointer);
        let mut p = 0.0;
        assert_eq!(decolab_density_purity(ptr::null(), &mut p), DecolabStatus::NullPointer);
        decolab_density_free(ptr::null_mut());
        decolab_wigner_free(ptr::null_mut());
        assert_eq!(decolab_last_error(ptr::null_mut(), 0), last_error().len());
        let mut tiny = [0 as c_char; 4];
        decolab_last_error(tiny.as_mut_ptr(), tiny.len());
        assert_eq!(CStr::from_ptr(tiny.as_ptr()).to_bytes().len(), 3);
    }
}

#[test]
fn qubit_functions() {
    unsafe {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut gain = 0.0;
        assert_eq!(decolab_entropy_gain(h, 0.0, h, 0.0, &mut gain), DecolabStatus::Ok);
        assert!((gain - 1.0).abs() < 1e-12);
        assert_eq!(decolab_entropy_gain(1.0, 0.0, 1.0, 0.0, &mut gain), DecolabStatus::InvalidArgument);

        // (|↑d↑⟩ + |↓d↓⟩)/√2
        let mut re = [0.0; 16];
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            re[4 * i + j] = 0.5;
        }
        let im = [0.0; 16];
        let (mut d, mut th, mut ph, mut mi) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(decolab_min_discord(re.as_ptr(), im.as_ptr(), &mut d, &mut th, &mut ph, &mut mi), DecolabStatus::Ok);
        assert!((d - 1.0).abs() < 1e-3);
        assert!((mi - 2.0).abs() < 1e-9);
        re[0] = 2.0;
        assert_eq!(decolab_min_discord(re.as_ptr(), im.as_ptr(), &mut d, &mut th, &mut ph, ptr::null_mut()), DecolabStatus::InvalidArgument);

        let (mut tau, mut lam, mut ratio) = (0.0, 0.0, 0.0);
        assert_eq!(decolab_decoherence_time(1e-3, 300.0, 1e17, 1e-2, &mut tau, &mut lam, &mut ratio), DecolabStatus::Ok);
        assert!(ratio > 1e-42 && ratio < 1e-39);
        assert_eq!(decolab_decoherence_time(-1.0, 300.0, 1.0, 1.0, &mut tau, &mut lam, &mut ratio), DecolabStatus::InvalidArgument);
    }
}

#[test]
fn runner_reports_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = CString::new(dir.path().join("ts").to_str().unwrap()).unwrap();
    let name = CString::new("timescales").unwrap();
    let mut code: c_int = -1;
    unsafe {
        assert_eq!(decolab_run_experiment(name.as_ptr(), ptr::null(), out.as_ptr(), &mut code), DecolabStatus::Ok);
        assert_eq!(code, 0);
        assert!(dir.path().join("ts/timescales.csv").exists());

        let bad_cfg = CString::new("mass = heavy\n").unwrap();
        let out2 = CString::new(dir.path().join("bad").to_str().unwrap()).unwrap();
        assert_eq!(decolab_run_experiment(name.as_ptr(), bad_cfg.as_ptr(), out2.as_ptr(), &mut code), DecolabStatus::InvalidArgument);
        assert_eq!(code, 2);
        assert!(!dir.path().join("bad").exists());

        let unknown = CString::new("nope").unwrap();
        assert_eq!(decolab_run_experiment(unknown.as_ptr(), ptr::null(), out2.as_ptr(), &mut code), DecolabStatus::InvalidArgument);
        assert_eq!(code, 2);
    }
    let version = unsafe { CStr::from_ptr(decolab_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/decolab.h")
}

#[test]
fn header_declares_the_abi() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "decolab_version",
        "decolab_last_error",
        "decolab_density_gaussian",
        "decolab_density_cat",
        "decolab_density_free",
        "decolab_evolve",
        "decolab_wigner_from_density",
        "decolab_wigner_free",
        "decolab_min_discord",
        "decolab_run_experiment",
        "DECOLAB_STATUS_SOLVER_FAILURE",
        "typedef struct DecolabDensity DecolabDensity;",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "decolab.h"

int main(void) {
    DecolabDensity *rho = NULL;
    if (decolab_density_cat(64, 12.0, 6.0, 1.0, 0.0, &rho) != DECOLAB_STATUS_OK) return 1;
    DecolabWigner *w = NULL;
    if (decolab_wigner_from_density(rho, &w) != DECOLAB_STATUS_OK) return 2;
    double neg = 0.0;
    decolab_wigner_negativity(w, &neg);
    decolab_wigner_free(w);
    decolab_density_free(rho);
    if (decolab_density_gaussian(60, 8.0, 0.0, 0.0, 1.0, &rho) != DECOLAB_STATUS_INVALID_ARGUMENT) return 3;
    char msg[128];
    decolab_last_error(msg, sizeof msg);
    printf("%s %.6f %s\n", decolab_version(), neg, msg);
    return neg > 0.01 ? 0 : 4;
}
"#;

/// Compiles a C program against the generated header and the static
/// library, when a C compiler is available.
#[test]
fn c_program_links_and_runs() {
    let target = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target.join("libdecolab_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "C program failed: {text}");
    assert!(text.contains("invalid grid"), "{text}");
}
