use std::ffi::CStr;
use std::ptr;

use hmf_ffi::*;

fn last_error() -> String {
    let p = hmf_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn mb_state(a: f64, beta: f64) -> *mut HmfSteadyState {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(hmf_profile_maxwell_boltzmann(a, beta, &mut p), HmfStatus::Ok);
        let mut ss = ptr::null_mut();
        assert_eq!(hmf_steady_state_solve(p, 1e-6, 10.0, &mut ss), HmfStatus::Ok);
        hmf_profile_free(p);
        ss
    }
}

#[test]
fn solve_and_query_maxwell_boltzmann() {
    let ss = mb_state(0.05, 2.0);
    unsafe {
        let (mut m0, mut mass, mut energy) = (0.0, 0.0, 0.0);
        assert_eq!(hmf_steady_state_summary(ss, &mut m0, &mut mass, &mut energy), HmfStatus::Ok);
        assert!((m0 - 1.1336052).abs() < 1e-6, "{m0}");
        assert!(mass > 0.0 && energy.is_finite());

        let mut c = HmfCriterion::default();
        assert_eq!(hmf_criterion(ss, &mut c), HmfStatus::Ok);
        assert_eq!(c.verified, 1);
        assert_eq!(c.stable, 1);
        assert!((c.kappa0_quadrature - c.kappa0_elliptic).abs() < 1e-9);

        // J′(m₀) = 0 and J″(m₀) = 1 − κ₀ at the steady state.
        let (mut jv, mut j1, mut j2) = (0.0, 0.0, 0.0);
        assert_eq!(hmf_reduced_energy(ss, m0, &mut jv, &mut j1, &mut j2), HmfStatus::Ok);
        assert!(j1.abs() < 1e-9, "{j1}");
        assert!((j2 - (1.0 - c.kappa0_quadrature)).abs() < 1e-8);
        // Null out-pointers are skipped.
        assert_eq!(hmf_reduced_energy(ss, m0, ptr::null_mut(), ptr::null_mut(), ptr::null_mut()), HmfStatus::Ok);
        hmf_steady_state_free(ss);
    }
}

#[test]
fn statuses_and_messages() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(hmf_profile_maxwell_boltzmann(-1.0, 2.0, &mut p), HmfStatus::InvalidArgument);
        assert!(p.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(hmf_profile_maxwell_boltzmann(0.001, 0.1, &mut p), HmfStatus::Ok);
        let mut ss = ptr::null_mut();
        assert_eq!(hmf_steady_state_solve(p, 1e-6, 10.0, &mut ss), HmfStatus::HomogeneousOnly);
        assert!(ss.is_null());
        assert!(!last_error().is_empty());

        // A successful call clears the previous message.
        assert!((hmf_profile_eval(p, 0.0) - 0.001).abs() < 1e-15);
        assert_eq!(hmf_steady_state_summary(ptr::null(), ptr::null_mut(), ptr::null_mut(), ptr::null_mut()), HmfStatus::NullPointer);
        assert!(last_error().contains("null"));
        hmf_profile_free(p);

        assert_eq!(hmf_profile_lynden_bell(0.2, 0.5, 2.0, ptr::null_mut()), HmfStatus::NullPointer);
        assert!(hmf_profile_eval(ptr::null(), 0.0).is_nan());
        hmf_profile_free(ptr::null_mut());
        hmf_steady_state_free(ptr::null_mut());
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(hmf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn short_simulation_summary() {
    let ss = mb_state(0.08, 2.0);
    unsafe {
        let mut s = HmfSimSummary::default();
        assert_eq!(hmf_simulate_bump(ss, 64, 65, 0.0, 0.05, 2.0, 0.01, &mut s), HmfStatus::Ok);
        assert_eq!(s.stopped_early, 0);
        assert!(s.initial_distance > 0.0 && s.energy_drift < 1e-3, "{s:?}");

        // dt·v_max beyond a cell per step is rejected as a config error.
        assert_eq!(hmf_simulate_bump(ss, 64, 65, 0.0, 10.0, 20.0, 0.01, &mut s), HmfStatus::InvalidArgument);
        hmf_steady_state_free(ss);
    }
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/hmf.h");
    let Ok(out) = std::process::Command::new("cc").args(["-fsyntax-only", "-std=c99", "-Wall", "-Werror", "-x", "c", header]).output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
