//! The stability functional κ₀ and the verdict κ₀ < 1.
//!
//! Writing dθ dv = dθ de / |v| on each energy level,
//!
//! ```text
//! κ₀ = ∫_{−m₀}^{e_*} |F′(e)| W(e) de,   W(e) = m₀^{−1/2} w₁(e/m₀),
//! w₁(x) = 2√2 ∫₀^{θ₁(x)} (cos θ − r(x))² (x + cos θ)^{−1/2} dθ,   r = β₁′/α₁′,
//! ```
//!
//! where r(x) is the level-set mean of cos θ appearing in the squared ratio.
//! The elliptic route expands the square: w₁ = C₂ − β₁′²/α₁′ with every piece
//! in closed form through K and E of modulus k = √((1+x)/2) (or 1/k above the
//! separatrix).

pub mod elliptic;

use serde::Serialize;

use crate::action::w1;
use crate::error::{HmfError, Result};
use crate::quad::{integrate_pieces, integrate_to_infinity, QResult, Tol};
use crate::steady_state::SteadyState;
use elliptic::ke_complementary;

const E_TOL: Tol = Tol::new(1e-14, 1e-11);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionOptions {
    /// `stable` iff κ₀ < 1 − margin.
    pub margin: f64,
    /// Allowed |κ₀(quadrature) − κ₀(elliptic)| / max(1, κ₀).
    pub tolerance: f64,
    /// Half-width of the separatrix band, relative to m₀.
    pub separatrix_band: f64,
}

impl Default for CriterionOptions {
    fn default() -> Self {
        CriterionOptions { margin: 0.0, tolerance: 1e-6, separatrix_band: 1e-2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub kappa0_quadrature: f64,
    pub kappa0_elliptic: f64,
    pub discrepancy: f64,
    pub verified: bool,
    pub stable: bool,
    pub separatrix_contribution: f64,
    pub ratio_violations: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kappa0 {
    pub value: f64,
    pub separatrix_contribution: f64,
    /// Nodes where |r| > 1, i.e. the squared ratio left [0, 4]; always 0 for a sound reduction.
    pub ratio_violations: usize,
}

fn q(what: &str, r: QResult) -> Result<f64> {
    r.map(|e| e.value).map_err(|b| HmfError::Integration {
        what: what.to_string(),
        value: b.value,
        error: b.error,
    })
}

/// ∫ g over [−m₀, e_*) split at the separatrix (and band edges when given).
fn energy_integral<G: FnMut(f64) -> f64>(ss: &SteadyState, extra: &[f64], mut g: G, what: &str) -> Result<f64> {
    let m0 = ss.m0();
    let e_star = ss.profile().e_star();
    let lo = -m0;
    let mut cuts: Vec<f64> = vec![m0];
    cuts.extend_from_slice(extra);
    if e_star.is_finite() {
        if e_star <= lo {
            return Ok(0.0);
        }
        let mut pts = vec![lo];
        pts.extend(cuts.iter().copied().filter(|&c| c > lo && c < e_star));
        pts.push(e_star);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        q(what, integrate_pieces(&mut g, &pts, E_TOL))
    } else {
        q(what, integrate_to_infinity(&mut g, lo, &cuts, E_TOL))
    }
}

/// κ₀ by the level-set reduction (the canonical value).
pub fn kappa0_quadrature(ss: &SteadyState, band: f64) -> Result<Kappa0> {
    let m0 = ss.m0();
    let p = *ss.profile();
    let sm = m0.sqrt();
    let mut violations = 0usize;
    let mut integrand = |e: f64| {
        let fp = p.f_prime(e).abs();
        if fp == 0.0 {
            return 0.0;
        }
        let (w, r) = w1(e / m0);
        if r.abs() > 1.0 + 1e-12 {
            violations += 1;
        }
        fp * w / sm
    };
    let (b_lo, b_hi) = (m0 * (1.0 - band), m0 * (1.0 + band));
    let value = energy_integral(ss, &[b_lo, b_hi], &mut integrand, "kappa0 quadrature")?;
    let e_star = p.e_star();
    let lo = b_lo.max(-m0);
    let hi = b_hi.min(e_star);
    let separatrix_contribution = if hi > lo {
        q("separatrix band", integrate_pieces(&mut integrand, &crate::quad::breakpoints(lo, hi, &[m0]), E_TOL))?
    } else {
        0.0
    };
    Ok(Kappa0 { value, separatrix_contribution, ratio_violations: violations })
}

/// Above this energy ratio the untrapped elliptic combinations are O(κ⁴)
/// differences of O(1) terms; the binomial series in 1/x is used instead.
const SERIES_FROM: f64 = 3.0;

/// ∫₀^π cos^j θ (x + cos θ)^{−1/2} dθ for j = 0, 1, 2 by expanding in cos θ / x.
fn cos_moments_series(x: f64) -> [f64; 3] {
    // wallis[m] = ∫₀^π cos^m; odd m vanish
    let mut out = [0.0; 3];
    let mut b = 1.0; // binom(−1/2, n) x^{−n}
    let mut n = 0usize;
    let wallis = |m: usize| -> f64 {
        if m % 2 == 1 {
            return 0.0;
        }
        let mut w = std::f64::consts::PI;
        let mut k = 2;
        while k <= m {
            w *= (k - 1) as f64 / k as f64;
            k += 2;
        }
        w
    };
    loop {
        for (j, o) in out.iter_mut().enumerate() {
            *o += b * wallis(n + j);
        }
        n += 1;
        b *= -((2 * n - 1) as f64) / (2 * n) as f64 / x;
        if b.abs() < 1e-18 || n > 400 {
            break;
        }
    }
    let s = x.sqrt();
    out.map(|v| v / s)
}

/// C₂(x) = 2√2 ∫₀^{θ₁} cos²θ (x + cos θ)^{−1/2} dθ and β₁′²/α₁′, both in closed form.
pub fn elliptic_pieces(x: f64) -> (f64, f64) {
    if x >= SERIES_FROM {
        let [m0, m1, m2] = cos_moments_series(x);
        let c = 2.0 * std::f64::consts::SQRT_2;
        return (c * m2, c * m1 * m1 / m0);
    }
    if x < 1.0 {
        let k2 = 0.5 * (1.0 + x);
        let kc = (0.5 * (1.0 - x)).sqrt();
        let (kk, ee) = ke_complementary(kc);
        let d3 = (2.0 * (2.0 - k2) * ee - kc * kc * kk) / 3.0;
        let c2 = 4.0 * (4.0 * d3 - 4.0 * ee + kk);
        let sq = 4.0 * (2.0 * ee - kk).powi(2) / kk;
        (c2, sq)
    } else {
        let k2 = 0.5 * (1.0 + x);
        let k = k2.sqrt();
        let kapc = ((x - 1.0) / (x + 1.0)).sqrt();
        let (kk, ee) = ke_complementary(kapc);
        let kap2 = 1.0 / k2;
        let d3 = (2.0 * (2.0 - kap2) * ee - kapc * kapc * kk) / 3.0;
        let u = 1.0 - 2.0 * k2;
        let c2 = 4.0 / k * (4.0 * k2 * k2 * d3 + 4.0 * k2 * u * ee + u * u * kk);
        let sq = 4.0 * (2.0 * k2 * ee + u * kk).powi(2) / (k * kk);
        (c2, sq)
    }
}

/// κ₀ from the three-term elliptic expression:
/// ∬|F′|cos² − (4/√m₀)∫_trapped K(2E/K − 1)²|F′| − (4/√m₀)∫_untrapped (K/k)(2k²E/K + 1 − 2k²)²|F′|.
pub fn kappa0_elliptic(ss: &SteadyState) -> Result<f64> {
    let m0 = ss.m0();
    let p = *ss.profile();
    let sm = m0.sqrt();
    let cos2 = energy_integral(
        ss,
        &[],
        |e| {
            let fp = p.f_prime(e).abs();
            if fp == 0.0 {
                0.0
            } else {
                fp * elliptic_pieces(e / m0).0 / sm
            }
        },
        "elliptic cos^2 term",
    )?;
    let sq = energy_integral(
        ss,
        &[],
        |e| {
            let fp = p.f_prime(e).abs();
            if fp == 0.0 {
                0.0
            } else {
                fp * elliptic_pieces(e / m0).1 / sm
            }
        },
        "elliptic square terms",
    )?;
    Ok(cos2 - sq)
}

/// κ₀ by midpoint quadrature of the defining (θ, v) double integral on an
/// n_θ × n_v grid over [0, 2π) × [−v_max, v_max]; a coarse guard on the reduction.
pub fn kappa0_phase_space(ss: &SteadyState, n_theta: usize, n_v: usize, v_max: f64) -> f64 {
    let p = *ss.profile();
    let m0 = ss.m0();
    let dth = std::f64::consts::TAU / n_theta as f64;
    let dv = 2.0 * v_max / n_v as f64;
    let mut total = 0.0;
    for i in 0..n_theta {
        let th = (i as f64 + 0.5) * dth;
        let mut row = 0.0;
        for j in 0..n_v {
            let v = -v_max + (j as f64 + 0.5) * dv;
            let e = 0.5 * v * v - m0 * th.cos();
            let fp = p.f_prime(e).abs();
            if fp == 0.0 {
                continue;
            }
            let r = level_mean_cos(e / m0);
            row += fp * (th.cos() - r).powi(2);
        }
        total += row;
    }
    total * dth * dv
}

/// r(x) = β₁′/α₁′, the mean of cos θ′ over the accessible arc with weight (x + cos θ′)^{−1/2}.
pub fn level_mean_cos(x: f64) -> f64 {
    if x <= -1.0 {
        return 1.0;
    }
    if x == 1.0 {
        return -1.0;
    }
    crate::action::beta1_prime_raw(x) / crate::action::alpha1_prime_raw(x)
}

pub fn stability_verdict(ss: &SteadyState, opts: CriterionOptions) -> Result<CriterionResult> {
    let kq = kappa0_quadrature(ss, opts.separatrix_band)?;
    let ke = kappa0_elliptic(ss)?;
    let discrepancy = (kq.value - ke).abs();
    let verified = discrepancy <= opts.tolerance * kq.value.max(1.0);
    let mut warnings = Vec::new();
    if !verified {
        warnings.push(format!(
            "elliptic cross-check differs by {discrepancy:e} (tolerance {:e}); the quadrature value is used",
            opts.tolerance
        ));
    }
    if kq.ratio_violations > 0 {
        warnings.push(format!("{} nodes with squared ratio outside [0, 4]", kq.ratio_violations));
    }
    Ok(CriterionResult {
        kappa0_quadrature: kq.value,
        kappa0_elliptic: ke,
        discrepancy,
        verified,
        stable: kq.value < 1.0 - opts.margin,
        separatrix_contribution: kq.separatrix_contribution,
        ratio_violations: kq.ratio_violations,
        warnings,
    })
}
