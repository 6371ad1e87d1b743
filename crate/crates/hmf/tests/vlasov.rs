use std::f64::consts::{PI, TAU};

use hmf::config::default_v_max;
use hmf::profiles::Profile;
use hmf::rearrange::GriddedDistribution;
use hmf::steady_state::{solve_m0, SolverOptions, SteadyState};
use hmf::vlasov_sim::{
    evolve, run, run_stability_experiment, step, write_csv, Force, Perturbation, Reference, SimConfig, CSV_HEADER,
};

fn stable_state() -> SteadyState {
    solve_m0(&Profile::maxwell_boltzmann(0.08, 2.0).unwrap(), SolverOptions::default()).unwrap()
}

fn blob(n_theta: usize, n_v: usize, v_max: f64) -> GriddedDistribution {
    GriddedDistribution::from_fn(n_theta, n_v, v_max, |th, v| {
        (1.0 + 0.5 * (th - 1.0).cos() + 0.2 * (3.0 * th).sin()) * (-v * v).exp()
    })
    .unwrap()
}

#[test]
fn free_transport_by_whole_cells_is_exact() {
    // odd n_v puts v_j = kΔv; dt = 2Δθ/Δv makes each half-step an integer shift of k cells
    let (nt, nv, v_max) = (32, 17, 4.0);
    let g = blob(nt, nv, v_max);
    let dt = 2.0 * g.dtheta() / g.dv();
    let (out, clipped) = step(&g, dt, Force::Free).unwrap();
    for j in 0..nv {
        let k = j as i64 - (nv as i64 - 1) / 2;
        for i in 0..nt {
            let src = (i as i64 - 2 * k).rem_euclid(nt as i64) as usize;
            assert!((out.at(i, j) - g.at(src, j)).abs() < 1e-13, "({i},{j})");
        }
    }
    assert_eq!(clipped, 0.0);
}

#[test]
fn free_transport_of_a_smooth_profile_converges() {
    // f(θ, v, t) = f(θ − vt, v, 0) with spline shifts: fourth order in Δθ
    let err = |n: usize| {
        let g = blob(n, 33, 4.0);
        let (out, _) = evolve(&g, 0.1, 10, Force::Free).unwrap();
        let exact = GriddedDistribution::from_fn(n, 33, 4.0, |th, v| {
            let s = th - v;
            (1.0 + 0.5 * (s - 1.0).cos() + 0.2 * (3.0 * s).sin()) * (-v * v).exp()
        })
        .unwrap();
        out.l1_distance(&exact).unwrap()
    };
    let (coarse, fine) = (err(64), err(128));
    assert!(coarse / fine > 12.0, "{coarse} -> {fine}");
}

#[test]
fn mass_is_conserved_up_to_clipping() {
    let ss = stable_state();
    let v_max = default_v_max(&ss);
    let g = Perturbation::bump(0.05).sample(&ss, 64, 65, v_max).unwrap();
    let (out, clipped) = evolve(&g, 0.05, 100, Force::SelfConsistent).unwrap();
    let drift = out.mass() - g.mass() - clipped;
    // the edge of the v-grid carries no mass, so what leaves is below round-off
    assert!(drift.abs() < 1e-12 * g.mass(), "{drift}");
}

#[test]
fn homogeneous_state_is_stationary() {
    let g = GriddedDistribution::from_fn(64, 65, 6.0, |_, v| (-0.5 * v * v).exp()).unwrap();
    let (out, _) = evolve(&g, 0.05, 50, Force::SelfConsistent).unwrap();
    assert!(out.l1_distance(&g).unwrap() < 1e-12 * g.mass());
}

#[test]
fn unperturbed_steady_state_stays_close() {
    // the continuum flow fixes f₀; the grid error grows at most linearly and shrinks with h
    let ss = stable_state();
    let v_max = default_v_max(&ss);
    let drift = |n: usize| {
        let g = GriddedDistribution::sample_steady(&ss, n, n + 1, v_max).unwrap();
        let (out, _) = evolve(&g, 0.05, 100, Force::SelfConsistent).unwrap();
        out.l1_distance(&g).unwrap() / g.mass()
    };
    let (coarse, fine) = (drift(64), drift(128));
    assert!(coarse < 1e-3, "{coarse}");
    assert!(coarse / fine > 3.0, "{coarse} -> {fine}");
}

#[test]
fn runs_are_deterministic() {
    let ss = stable_state();
    let cfg = SimConfig { n_theta: 32, n_v: 33, v_max: default_v_max(&ss), dt: 0.05, t_end: 2.0, diag_every: 10 };
    let a = run_stability_experiment(&ss, &Perturbation::bump(0.01), &cfg).unwrap();
    let b = run_stability_experiment(&ss, &Perturbation::bump(0.01), &cfg).unwrap();
    assert_eq!(a.final_state.values(), b.final_state.values());
    assert_eq!(a.diagnostics.len(), cfg.steps() / cfg.diag_every + 1);
}

#[test]
fn casimir_never_rises_and_theta_tracks_rotation() {
    let ss = stable_state();
    let v_max = default_v_max(&ss);
    let cfg = SimConfig { n_theta: 64, n_v: 65, v_max, dt: 0.05, t_end: 10.0, diag_every: 5 };
    let shift = 0.7;
    let rotated = Perturbation::ThetaShift { shift }.sample(&ss, 64, 65, v_max).unwrap();
    let reference = Reference::new(&ss, 64, 65, v_max).unwrap();
    let ex = run(&rotated, &cfg, &reference).unwrap();
    for w in ex.diagnostics.windows(2) {
        assert!(w[1].casimir2 <= w[0].casimir2 * (1.0 + 1e-12));
    }
    // a rotated f₀ is a point on the orbit: distance stays at grid level
    for d in &ex.diagnostics {
        let dth = (d.theta_f - shift + PI).rem_euclid(TAU) - PI;
        assert!(dth.abs() < 1e-3, "t={}: θ_f={}", d.t, d.theta_f);
        assert!(d.l1_distance < 1e-3 * d.mass, "t={}: {}", d.t, d.l1_distance);
    }
}

#[test]
fn non_finite_state_is_reported_not_propagated() {
    let mut g = blob(16, 17, 3.0);
    g.values_mut()[5] = f64::NAN;
    let before = g.clone();
    let err = hmf::vlasov_sim::step_in_place(&mut g, 0.05, Force::SelfConsistent, 1.0).unwrap_err();
    assert!(matches!(err, hmf::HmfError::NonFinite { .. }), "{err}");
    assert!(g.values()[5].is_nan() && g.values()[6] == before.values()[6]);
}

#[test]
fn csv_has_the_fixed_column_order() {
    let ss = stable_state();
    let cfg = SimConfig { n_theta: 16, n_v: 17, v_max: default_v_max(&ss), dt: 0.1, t_end: 0.2, diag_every: 1 };
    let ex = run_stability_experiment(&ss, &Perturbation::None, &cfg).unwrap();
    let mut buf = Vec::new();
    write_csv(&ex.diagnostics, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,mass,H,momentum,casimir2,Mx,My,theta_f,L1dist,clipped_mass");
    assert_eq!(CSV_HEADER.split(',').count(), 10);
    assert_eq!(lines.count(), 3);
}

#[test]
fn bad_configs_are_rejected() {
    let ss = stable_state();
    for cfg in [
        SimConfig { n_theta: 2, ..SimConfig::reference(5.0) },
        SimConfig { dt: 0.0, ..SimConfig::reference(5.0) },
        SimConfig { dt: 2.0, ..SimConfig::reference(5.0) },
        SimConfig { diag_every: 0, ..SimConfig::reference(5.0) },
    ] {
        assert!(run_stability_experiment(&ss, &Perturbation::None, &cfg).is_err(), "{cfg:?}");
    }
    let bad = Perturbation::Scale { epsilon: -2.0 };
    assert!(run_stability_experiment(&ss, &bad, &SimConfig::reference(5.0)).is_err());
}
