//! C ABI over the `hmf` crate.
//!
//! Conventions: every fallible function returns an [`HmfStatus`] and writes
//! results through out-pointers; handles are opaque and owned by the caller
//! until passed to the matching `_free`. On failure the message is available
//! from [`hmf_last_error_message`] on the same thread. Panics never cross the
//! boundary; they surface as `HMF_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hmf::criterion::{stability_verdict, CriterionOptions};
use hmf::profiles::Profile;
use hmf::reduced_energy::{j, j_prime_energy, j_second};
use hmf::steady_state::{solve_m0, SolverOptions, SteadyState};
use hmf::vlasov_sim::{run_stability_experiment, Perturbation, SimConfig};
use hmf::HmfError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    /// No nontrivial steady state in the bracket.
    HomogeneousOnly = 4,
    /// Several roots in the bracket; narrow it.
    AmbiguousRoot = 5,
    /// Quadrature budget, non-finite state or failed consistency check.
    Numerical = 6,
    Panic = 7,
}

/// A steady-state profile F(e).
pub struct HmfProfile(Profile);

/// A solved steady state f₀ = F(v²/2 − m₀ cos θ).
pub struct HmfSteadyState(SteadyState);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HmfCriterion {
    pub kappa0_quadrature: f64,
    pub kappa0_elliptic: f64,
    /// 1 when the two values agree to the default tolerance.
    pub verified: i32,
    /// 1 when κ₀ < 1.
    pub stable: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HmfSimSummary {
    pub initial_distance: f64,
    pub max_distance: f64,
    pub distance_growth: f64,
    pub energy_drift: f64,
    pub momentum_drift: f64,
    pub casimir_drop: f64,
    pub clipped_mass: f64,
    /// 1 when the run stopped early on a non-finite value.
    pub stopped_early: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &HmfError) -> HmfStatus {
    match e {
        HmfError::Config(_) | HmfError::Shape(_) => HmfStatus::InvalidArgument,
        HmfError::Domain(_) | HmfError::Tail(_) => HmfStatus::Domain,
        HmfError::HomogeneousOnly(_) => HmfStatus::HomogeneousOnly,
        HmfError::AmbiguousRoot(_) => HmfStatus::AmbiguousRoot,
        HmfError::Integration { .. } | HmfError::NonFinite { .. } | HmfError::Gate(_) | HmfError::Io(_) => HmfStatus::Numerical,
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), HmfStatusError>) -> HmfStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HmfStatus::Ok,
        Ok(Err(HmfStatusError(status, msg))) => {
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
            HmfStatus::Panic
        }
    }
}

struct HmfStatusError(HmfStatus, String);

impl From<HmfError> for HmfStatusError {
    fn from(e: HmfError) -> Self {
        HmfStatusError(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> HmfStatusError {
    HmfStatusError(HmfStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `out` must be null or valid for a write.
unsafe fn write_out<T>(out: *mut T, v: T, what: &str) -> Result<(), HmfStatusError> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

/// # Safety
/// `p` must be null or a live handle from this library.
unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, HmfStatusError> {
    p.as_ref().ok_or_else(|| null(what))
}

fn new_profile(p: hmf::Result<Profile>, out: *mut *mut HmfProfile) -> HmfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let h = Box::into_raw(Box::new(HmfProfile(p?)));
        unsafe { out.write(h) };
        Ok(())
    })
}

/// Message of the last failure on this thread, or null. Valid until the next call into the library.
#[no_mangle]
pub extern "C" fn hmf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hmf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// F(e) = A·exp(−βe).
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn hmf_profile_maxwell_boltzmann(a: f64, beta: f64, out: *mut *mut HmfProfile) -> HmfStatus {
    new_profile(Profile::maxwell_boltzmann(a, beta), out)
}

/// F(e) = A·(e_* − e)₊^{1/(q−1)}, q > 1.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn hmf_profile_polytrope_compact(a: f64, q: f64, e_star: f64, out: *mut *mut HmfProfile) -> HmfStatus {
    new_profile(Profile::polytrope_compact(a, q, e_star), out)
}

/// F(e) = A·(e₀ + e)^{1/(q−1)}, 1/3 < q < 1.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn hmf_profile_polytrope_noncompact(a: f64, q: f64, e0: f64, out: *mut *mut HmfProfile) -> HmfStatus {
    new_profile(Profile::polytrope_noncompact(a, q, e0), out)
}

/// F(e) = A / (1 + B·exp(βe)).
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn hmf_profile_lynden_bell(a: f64, b: f64, beta: f64, out: *mut *mut HmfProfile) -> HmfStatus {
    new_profile(Profile::lynden_bell(a, b, beta), out)
}

/// # Safety
/// `p` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hmf_profile_free(p: *mut HmfProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// F(e); NaN for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hmf_profile_eval(p: *const HmfProfile, e: f64) -> f64 {
    p.as_ref().map_or(f64::NAN, |p| p.0.f(e))
}

/// Solves M(m) = m for the nontrivial root in [m_lo, m_hi].
///
/// # Safety
/// `profile` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn hmf_steady_state_solve(
    profile: *const HmfProfile,
    m_lo: f64,
    m_hi: f64,
    out: *mut *mut HmfSteadyState,
) -> HmfStatus {
    guard(|| {
        let p = deref(profile, "profile")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = SolverOptions { bracket: (m_lo, m_hi), ..SolverOptions::default() };
        let ss = solve_m0(&p.0, opts)?;
        out.write(Box::into_raw(Box::new(HmfSteadyState(ss))));
        Ok(())
    })
}

/// # Safety
/// `ss` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hmf_steady_state_free(ss: *mut HmfSteadyState) {
    if !ss.is_null() {
        drop(Box::from_raw(ss));
    }
}

/// m₀, ‖f₀‖₁ and ℋ(f₀); any out-pointer may be null.
///
/// # Safety
/// `ss` must be a live handle; non-null out-pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hmf_steady_state_summary(
    ss: *const HmfSteadyState,
    m0: *mut f64,
    mass: *mut f64,
    energy: *mut f64,
) -> HmfStatus {
    guard(|| {
        let s = &deref(ss, "steady state")?.0;
        for (p, v) in [(m0, s.m0()), (mass, s.mass()), (energy, s.energy_h0())] {
            if !p.is_null() {
                p.write(v);
            }
        }
        Ok(())
    })
}

/// κ₀ by both methods and the verdict κ₀ < 1.
///
/// # Safety
/// `ss` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn hmf_criterion(ss: *const HmfSteadyState, out: *mut HmfCriterion) -> HmfStatus {
    guard(|| {
        let s = &deref(ss, "steady state")?.0;
        let r = stability_verdict(s, CriterionOptions::default())?;
        write_out(
            out,
            HmfCriterion {
                kappa0_quadrature: r.kappa0_quadrature,
                kappa0_elliptic: r.kappa0_elliptic,
                verified: r.verified as i32,
                stable: r.stable as i32,
            },
            "out",
        )
    })
}

/// J(m), J′(m) and J″(m); any out-pointer may be null.
///
/// # Safety
/// `ss` must be a live handle; non-null out-pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hmf_reduced_energy(
    ss: *const HmfSteadyState,
    m: f64,
    value: *mut f64,
    first: *mut f64,
    second: *mut f64,
) -> HmfStatus {
    guard(|| {
        let s = &deref(ss, "steady state")?.0;
        if !value.is_null() {
            value.write(j(s, m)?);
        }
        if !first.is_null() {
            first.write(j_prime_energy(s, m)?);
        }
        if !second.is_null() {
            second.write(j_second(s, m)?);
        }
        Ok(())
    })
}

/// Runs f₀ plus a Gaussian bump of `amplitude`·‖f₀‖₁ (width 0.3, at the
/// bottom of the well) and summarizes the drift. `v_max` ≤ 0 selects the default.
///
/// # Safety
/// `ss` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn hmf_simulate_bump(
    ss: *const HmfSteadyState,
    n_theta: usize,
    n_v: usize,
    v_max: f64,
    dt: f64,
    t_end: f64,
    amplitude: f64,
    out: *mut HmfSimSummary,
) -> HmfStatus {
    guard(|| {
        let s = &deref(ss, "steady state")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let v_max = if v_max > 0.0 { v_max } else { hmf::config::default_v_max(s) };
        let cfg = SimConfig { n_theta, n_v, v_max, dt, t_end, diag_every: 20 };
        let ex = run_stability_experiment(s, &Perturbation::bump(amplitude), &cfg)?;
        let m = ex.summary;
        out.write(HmfSimSummary {
            initial_distance: m.initial_distance,
            max_distance: m.max_distance,
            distance_growth: m.distance_growth,
            energy_drift: m.energy_drift,
            momentum_drift: m.momentum_drift,
            casimir_drop: m.casimir_drop,
            clipped_mass: m.clipped_mass,
            stopped_early: matches!(m.outcome, hmf::vlasov_sim::Outcome::NonFinite { .. }) as i32,
        });
        Ok(())
    })
}
