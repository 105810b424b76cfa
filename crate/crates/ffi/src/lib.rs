//! C ABI for decolab.
//!
//! Every function returns a [`DecolabStatus`]; results come back through
//! out-pointers. Objects are opaque handles created by `*_new`/`*_from_*`
//! functions and released with the matching `*_free`. After a failure,
//! [`decolab_last_error`] copies a description of the most recent error on
//! the calling thread.
//!
//! Density matrices are `n × n` row-major arrays of `ρ(xᵢ, xⱼ)` on the grid
//! `xⱼ = −L + j·2L/n`. Wigner grids are `n × n` row-major arrays over
//! `(xᵢ, pₘ)` with `pₘ = (m − n/2)·π/L`. Natural units, `ħ = k_B = 1`, except
//! for [`decolab_decoherence_time`], which works in SI.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use decolab::brownian::{evolve, timescales::decoherence_time, BathParams, EvolveOptions, PotentialSpec};
use decolab::discord::{min_discord, mutual_information};
use decolab::lab::{self, parse_config_text, Experiment, ExperimentConfig};
use decolab::measurement::{entropy_gain, QubitPairDensity};
use decolab::state::{make_cat, make_gaussian, DensityMatrix, GaussianSpec};
use decolab::wigner::{negativity_volume, wigner_of_density, WignerGrid};
use decolab::Grid;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecolabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SolverFailure = 3,
    IoError = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Position-space density matrix.
pub struct DecolabDensity(DensityMatrix);

/// Wigner function on the position–momentum lattice.
pub struct DecolabWigner(WignerGrid);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: DecolabStatus, msg: impl Into<String>) -> DecolabStatus {
    set_error(msg);
    status
}

fn from_core(e: decolab::Error) -> DecolabStatus {
    let status = match e {
        decolab::Error::GridEscape { .. }
        | decolab::Error::TraceDrift { .. }
        | decolab::Error::OptimizerNotConverged { .. }
        | decolab::Error::NonFinite { .. } => DecolabStatus::SolverFailure,
        _ => DecolabStatus::InvalidArgument,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning a panic into [`DecolabStatus::Panic`].
fn guard(f: impl FnOnce() -> DecolabStatus) -> DecolabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(DecolabStatus::Panic, "internal panic"),
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(DecolabStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

unsafe fn put<T>(out: *mut T, value: T) -> DecolabStatus {
    *out = value;
    set_error("");
    DecolabStatus::Ok
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, DecolabStatus> {
    CStr::from_ptr(p).to_str().map_err(|_| fail(DecolabStatus::InvalidArgument, format!("`{name}` is not UTF-8")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn decolab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
#[no_mangle]
pub unsafe extern "C" fn decolab_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

// ---------------------------------------------------------------- states

/// Pure Gaussian packet `exp(−(x−x₀)²/4σ² + ip₀x)` on an `n`-point grid over `[−L, L)`.
#[no_mangle]
pub unsafe extern "C" fn decolab_density_gaussian(
    n: usize,
    half_extent: f64,
    center: f64,
    momentum: f64,
    width: f64,
    out: *mut *mut DecolabDensity,
) -> DecolabStatus {
    non_null!(out);
    guard(|| {
        let made = Grid::new(n, half_extent).and_then(|g| make_gaussian(GaussianSpec::new(center, momentum, width), g));
        match made {
            Ok(psi) => put(out, Box::into_raw(Box::new(DecolabDensity(DensityMatrix::pure(&psi))))),
            Err(e) => from_core(e),
        }
    })
}

/// Cat state: two packets of spread `width` at `±separation/2` with relative phase `phase`.
#[no_mangle]
pub unsafe extern "C" fn decolab_density_cat(
    n: usize,
    half_extent: f64,
    separation: f64,
    width: f64,
    phase: f64,
    out: *mut *mut DecolabDensity,
) -> DecolabStatus {
    non_null!(out);
    guard(|| match Grid::new(n, half_extent).and_then(|g| make_cat(separation, width, phase, g)) {
        Ok(psi) => put(out, Box::into_raw(Box::new(DecolabDensity(DensityMatrix::pure(&psi))))),
        Err(e) => from_core(e),
    })
}

#[no_mangle]
pub unsafe extern "C" fn decolab_density_free(rho: *mut DecolabDensity) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

/// Grid size `n`; the matrix has `n²` entries.
#[no_mangle]
pub unsafe extern "C" fn decolab_density_size(rho: *const DecolabDensity, n: *mut usize) -> DecolabStatus {
    non_null!(rho, n);
    put(n, (*rho).0.grid().n())
}

#[no_mangle]
pub unsafe extern "C" fn decolab_density_trace(rho: *const DecolabDensity, out: *mut f64) -> DecolabStatus {
    non_null!(rho, out);
    put(out, (*rho).0.trace())
}

#[no_mangle]
pub unsafe extern "C" fn decolab_density_purity(rho: *const DecolabDensity, out: *mut f64) -> DecolabStatus {
    non_null!(rho, out);
    put(out, (*rho).0.purity())
}

/// Von Neumann entropy in bits.
#[no_mangle]
pub unsafe extern "C" fn decolab_density_entropy(rho: *const DecolabDensity, out: *mut f64) -> DecolabStatus {
    non_null!(rho, out);
    guard(|| match (*rho).0.von_neumann_entropy() {
        Ok(s) => put(out, s),
        Err(e) => from_core(e),
    })
}

/// Copies the entries into `re` and `im`, each of length `len ≥ n²`.
#[no_mangle]
pub unsafe extern "C" fn decolab_density_entries(
    rho: *const DecolabDensity,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> DecolabStatus {
    non_null!(rho, re, im);
    let entries = (*rho).0.entries();
    if len < entries.len() {
        return fail(DecolabStatus::BufferTooSmall, format!("need {} entries, got {len}", entries.len()));
    }
    for (k, z) in entries.iter().enumerate() {
        *re.add(k) = z.re;
        *im.add(k) = z.im;
    }
    set_error("");
    DecolabStatus::Ok
}

/// Bath and potential for [`decolab_evolve`]. The potential is
/// `Σ cₖxᵏ + F·x·cos(ωt)`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DecolabModel {
    pub mass: f64,
    pub gamma: f64,
    pub diffusion: f64,
    pub coefficients: [f64; 5],
    pub drive_amplitude: f64,
    pub drive_frequency: f64,
}

/// Evolves `rho` with the master equation to `t_final` and returns the
/// final state as a new handle.
#[no_mangle]
pub unsafe extern "C" fn decolab_evolve(
    rho: *const DecolabDensity,
    model: *const DecolabModel,
    t_final: f64,
    dt: f64,
    out: *mut *mut DecolabDensity,
) -> DecolabStatus {
    non_null!(rho, model, out);
    guard(|| {
        let m = *model;
        let result = BathParams::with_diffusion(m.mass, m.gamma, m.diffusion).and_then(|bath| {
            let potential = PotentialSpec::new(m.coefficients, m.drive_amplitude, m.drive_frequency)?;
            evolve(&(*rho).0, &bath, &potential, &EvolveOptions::new(t_final, dt).retain_states(false))
        });
        match result {
            Ok(r) => put(out, Box::into_raw(Box::new(DecolabDensity(r.final_state().clone())))),
            Err(e) => from_core(e),
        }
    })
}

// ---------------------------------------------------------------- wigner

#[no_mangle]
pub unsafe extern "C" fn decolab_wigner_from_density(rho: *const DecolabDensity, out: *mut *mut DecolabWigner) -> DecolabStatus {
    non_null!(rho, out);
    guard(|| put(out, Box::into_raw(Box::new(DecolabWigner(wigner_of_density(&(*rho).0))))))
}

#[no_mangle]
pub unsafe extern "C" fn decolab_wigner_free(w: *mut DecolabWigner) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Copies the `n²` values, rows indexed by position.
#[no_mangle]
pub unsafe extern "C" fn decolab_wigner_values(w: *const DecolabWigner, buf: *mut f64, len: usize) -> DecolabStatus {
    non_null!(w, buf);
    let values = (*w).0.values();
    if len < values.len() {
        return fail(DecolabStatus::BufferTooSmall, format!("need {} values, got {len}", values.len()));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    set_error("");
    DecolabStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn decolab_wigner_normalization(w: *const DecolabWigner, out: *mut f64) -> DecolabStatus {
    non_null!(w, out);
    put(out, (*w).0.normalization())
}

/// `∬ max(−W, 0) dx dp`.
#[no_mangle]
pub unsafe extern "C" fn decolab_wigner_negativity(w: *const DecolabWigner, out: *mut f64) -> DecolabStatus {
    non_null!(w, out);
    put(out, negativity_volume(&(*w).0))
}

// ---------------------------------------------------------------- qubits

/// Entropy gain `−Σ|a|² lg|a|²` of the measurement `α|↑⟩ + β|↓⟩`, in bits.
#[no_mangle]
pub unsafe extern "C" fn decolab_entropy_gain(
    alpha_re: f64,
    alpha_im: f64,
    beta_re: f64,
    beta_im: f64,
    out: *mut f64,
) -> DecolabStatus {
    non_null!(out);
    match entropy_gain(Complex64::new(alpha_re, alpha_im), Complex64::new(beta_re, beta_im)) {
        Ok(h) => put(out, h),
        Err(e) => from_core(e),
    }
}

/// Minimum discord of a 4×4 system–detector density matrix given as
/// row-major real and imaginary parts, measured on the detector. Bloch
/// angles of the optimal basis go to `theta` and `phi` (radians); the
/// mutual information to `mutual` (may be null).
#[no_mangle]
pub unsafe extern "C" fn decolab_min_discord(
    re: *const f64,
    im: *const f64,
    discord: *mut f64,
    theta: *mut f64,
    phi: *mut f64,
    mutual: *mut f64,
) -> DecolabStatus {
    non_null!(re, im, discord, theta, phi);
    guard(|| {
        let rho = QubitPairDensity(nalgebra_matrix(re, im));
        if !rho.is_valid(1e-9) {
            return fail(DecolabStatus::InvalidArgument, "not a Hermitian, unit-trace, positive density matrix");
        }
        match min_discord(&rho) {
            Ok(m) => {
                *theta = m.basis.theta;
                *phi = m.basis.phi;
                if !mutual.is_null() {
                    *mutual = mutual_information(&rho);
                }
                put(discord, m.value)
            }
            Err(e) => from_core(e),
        }
    })
}

unsafe fn nalgebra_matrix(re: *const f64, im: *const f64) -> nalgebra::Matrix4<Complex64> {
    nalgebra::Matrix4::from_fn(|i, j| Complex64::new(*re.add(4 * i + j), *im.add(4 * i + j)))
}

/// `τ_D = τ_R(λ_dB/Δx)²` in SI units: kg, K, s, m.
#[no_mangle]
pub unsafe extern "C" fn decolab_decoherence_time(
    mass: f64,
    temperature: f64,
    relaxation_time: f64,
    separation: f64,
    tau_d: *mut f64,
    lambda_db: *mut f64,
    ratio: *mut f64,
) -> DecolabStatus {
    non_null!(tau_d, lambda_db, ratio);
    match decoherence_time(mass, temperature, relaxation_time, separation) {
        Ok(t) => {
            *lambda_db = t.lambda_db;
            *ratio = t.ratio;
            put(tau_d, t.tau_d)
        }
        Err(e) => from_core(e),
    }
}

// ---------------------------------------------------------------- runner

/// Runs a named experiment exactly as the command-line tool would.
/// `config` holds `key = value` lines (may be null or empty). The process
/// exit status the tool would return goes to `exit_code`.
#[no_mangle]
pub unsafe extern "C" fn decolab_run_experiment(
    experiment: *const c_char,
    config: *const c_char,
    out_dir: *const c_char,
    exit_code: *mut c_int,
) -> DecolabStatus {
    non_null!(experiment, out_dir, exit_code);
    guard(|| {
        let (name, dir) = match (str_arg(experiment, "experiment"), str_arg(out_dir, "out_dir")) {
            (Ok(n), Ok(d)) => (n, d),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let text = if config.is_null() {
            ""
        } else {
            match str_arg(config, "config") {
                Ok(t) => t,
                Err(s) => return s,
            }
        };
        let resolved = name
            .parse::<Experiment>()
            .and_then(|e| ExperimentConfig::resolve(e, &parse_config_text(text)?, &[], PathBuf::from(dir)));
        let cfg = match resolved {
            Ok(c) => c,
            Err(e) => {
                *exit_code = lab::EXIT_CONFIG;
                return fail(DecolabStatus::InvalidArgument, e.to_string());
            }
        };
        let outcome = lab::run(&cfg);
        *exit_code = outcome.exit_code();
        match outcome.error {
            None => put(exit_code, lab::EXIT_OK),
            Some(e) => {
                let status = match e.exit_code() {
                    lab::EXIT_CONFIG => DecolabStatus::InvalidArgument,
                    lab::EXIT_SOLVER => DecolabStatus::SolverFailure,
                    _ => DecolabStatus::IoError,
                };
                fail(status, e.to_string())
            }
        }
    })
}
