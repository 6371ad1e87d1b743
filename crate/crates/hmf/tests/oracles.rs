//! Values checked against oracles built here from scratch: closed forms,
//! series, bisection and Monte Carlo, none of which share code with the crate.

use std::f64::consts::{PI, SQRT_2, TAU};

use hmf::action::{alpha1, alpha1_inv, PendulumPotential};
use hmf::criterion::{kappa0_phase_space, stability_verdict, CriterionOptions};
use hmf::profiles::Profile;
use hmf::steady_state::{magnetization_map, solve_m0, SolverOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// I₁(x) by its power series.
fn bessel_i1(x: f64) -> f64 {
    let mut term = x / 2.0;
    let mut sum = term;
    for k in 1..200 {
        term *= (x / 2.0) * (x / 2.0) / (k as f64 * (k + 1) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

#[test]
fn alpha1_at_zero_matches_gamma_closed_form() {
    // ∫₀^{π/2} √cos θ dθ = (√π/2) Γ(3/4)/Γ(5/4)
    const GAMMA_3_4: f64 = 1.225_416_702_465_177_6;
    const GAMMA_5_4: f64 = 0.906_402_477_055_477;
    let exact = 4.0 * SQRT_2 * PI.sqrt() / 2.0 * GAMMA_3_4 / GAMMA_5_4;
    assert!((alpha1(0.0) - exact).abs() < 1e-12, "{} vs {exact}", alpha1(0.0));
}

#[test]
fn alpha1_at_zero_matches_simpson() {
    // θ = π/2 − u² removes the square-root endpoint: √cos θ dθ = 2u √sin(u²) du
    let n = 20_000;
    let top = (PI / 2.0).sqrt();
    let h = top / n as f64;
    let g = |u: f64| 2.0 * u * (u * u).sin().sqrt();
    let mut s = g(0.0) + g(top);
    for i in 1..n {
        s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let simpson = 4.0 * SQRT_2 * s * h / 3.0;
    assert!((alpha1(0.0) - simpson).abs() < 1e-9);
}

#[test]
fn alpha1_inverse_matches_bisection() {
    let target = 100.0;
    let (mut lo, mut hi) = (1.0, 100.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if alpha1(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = alpha1_inv(target).unwrap();
    assert!((x - 0.5 * (lo + hi)).abs() < 1e-10 * x.abs(), "{x} vs {lo}");
}

#[test]
fn maxwell_boltzmann_magnetization_is_bessel() {
    // ρ_m(θ) = A √(2π/β) e^{βm cos θ}, so M(m) = 2π A √(2π/β) I₁(βm)
    for (a, beta) in [(0.05, 2.0), (0.08, 2.0), (0.3, 0.7)] {
        let p = Profile::maxwell_boltzmann(a, beta).unwrap();
        for m in [0.01, 0.5, 1.0, 3.0] {
            let oracle = TAU * a * (TAU / beta).sqrt() * bessel_i1(beta * m);
            let got = magnetization_map(&p, m).unwrap();
            assert!((got - oracle).abs() <= 1e-9 * oracle, "A={a} β={beta} m={m}: {got} vs {oracle}");
        }
    }
}

#[test]
fn phase_area_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 400_000;
    for (m, e) in [(1.0, -0.3), (1.0, 2.0), (0.4, 0.1)] {
        let pot = PendulumPotential::new(m, 0.0).unwrap();
        let v_box = (2.0 * (e + m)).sqrt();
        let box_area = TAU * 2.0 * v_box;
        let hits = (0..n)
            .filter(|_| {
                let th: f64 = rng.random_range(0.0..TAU);
                let v: f64 = rng.random_range(-v_box..v_box);
                0.5 * v * v - m * th.cos() < e
            })
            .count() as f64;
        let p = hits / n as f64;
        let sigma = box_area * (p * (1.0 - p) / n as f64).sqrt();
        let exact = pot.a(e);
        assert!((box_area * p - exact).abs() < 5.0 * sigma, "m={m} e={e}: MC {} vs {exact}", box_area * p);
    }
}

#[test]
fn folded_b_matches_direct_quadrature() {
    // b_φ(e) = ∫ 2 cos θ √(2(e + m cos θ))₊ dθ, by a fine midpoint rule
    for (m, e) in [(1.0, 0.2), (1.0, 3.0), (2.5, -1.0)] {
        let pot = PendulumPotential::new(m, 0.0).unwrap();
        let n = 2_000_000;
        let h = TAU / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            let th = (i as f64 + 0.5) * h - PI;
            let d = e + m * th.cos();
            if d > 0.0 {
                sum += 2.0 * th.cos() * (2.0 * d).sqrt();
            }
        }
        let direct = sum * h;
        assert!((pot.b(e) - direct).abs() < 1e-6, "m={m} e={e}: {} vs {direct}", pot.b(e));
    }
}

#[test]
fn kappa0_matches_phase_space_grid() {
    let ss = solve_m0(&Profile::maxwell_boltzmann(0.05, 2.0).unwrap(), SolverOptions::default()).unwrap();
    let r = stability_verdict(&ss, CriterionOptions::default()).unwrap();
    let v_max = 1.25 * ss.v_cutoff();
    let (coarse, fine) = (kappa0_phase_space(&ss, 128, 129, v_max), kappa0_phase_space(&ss, 512, 513, v_max));
    assert!((fine - r.kappa0_quadrature).abs() < 1e-3 * r.kappa0_quadrature, "{fine} vs {}", r.kappa0_quadrature);
    assert!((fine - r.kappa0_quadrature).abs() <= (coarse - r.kappa0_quadrature).abs());
}

#[test]
fn kappa0_matches_monte_carlo() {
    // κ₀ = ∬ |F′(e₀)| (cos θ − ⟨cos θ⟩_{e₀})² dθ dv; importance-free MC over a box
    let ss = solve_m0(&Profile::maxwell_boltzmann(0.08, 2.0).unwrap(), SolverOptions::default()).unwrap();
    let r = stability_verdict(&ss, CriterionOptions::default()).unwrap();
    let p = *ss.profile();
    let m0 = ss.m0();
    let v_max = 1.25 * ss.v_cutoff();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let n = 400_000;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..n {
        let th: f64 = rng.random_range(-PI..PI);
        let v: f64 = rng.random_range(-v_max..v_max);
        let e = 0.5 * v * v - m0 * th.cos();
        let mean = level_mean_cos_oracle(e / m0);
        let x = p.f_prime(e).abs() * (th.cos() - mean).powi(2) * TAU * 2.0 * v_max;
        sum += x;
        sum2 += x * x;
    }
    let mean = sum / n as f64;
    let sigma = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - r.kappa0_quadrature).abs() < 5.0 * sigma, "MC {mean} ± {sigma} vs {}", r.kappa0_quadrature);
}

/// ⟨cos θ⟩ over the level x = e/m of the pendulum, as the ratio of
/// ∮ cos θ/v and ∮ 1/v by midpoint sums in the angle variable of the orbit.
fn level_mean_cos_oracle(x: f64) -> f64 {
    let n = 400;
    let (mut num, mut den) = (0.0, 0.0);
    if x < 1.0 {
        // sin(θ/2) = k sin ψ, dθ/v ∝ dψ/√(1 − k² sin² ψ)
        let k2 = (1.0 + x) / 2.0;
        for i in 0..n {
            let psi = (i as f64 + 0.5) / n as f64 * PI / 2.0;
            let s2 = k2 * psi.sin().powi(2);
            let w = 1.0 / (1.0 - s2).sqrt();
            num += (1.0 - 2.0 * s2) * w;
            den += w;
        }
    } else {
        // θ = 2χ, dθ/v ∝ dχ/√(1 − κ² sin² χ), κ² = 2/(x + 1)
        let kappa2 = 2.0 / (x + 1.0);
        for i in 0..n {
            let chi = (i as f64 + 0.5) / n as f64 * PI / 2.0;
            let s2 = chi.sin().powi(2);
            let w = 1.0 / (1.0 - kappa2 * s2).sqrt();
            num += (1.0 - 2.0 * s2) * w;
            den += w;
        }
    }
    num / den
}
