//! The reduced energy J(m), its derivatives, and the two functional
//! inequalities that drive the orbital-stability argument.
//!
//! With g = f₀♯ = F ∘ a₀⁻¹ (a₀ = a_{φ₀}) and φ = −m cos θ,
//!
//! ```text
//! J(m)   = m²/2 + ∫ F(e′) a_φ⁻¹(a₀(e′)) a₀′(e′) de′           (s = a₀(e′))
//! J′(m)  = m − ∬ g(a_φ(e)) cos θ = m − ∫ g(a_φ(e)) b_φ′(e) de
//! J″(m)  = 1 − ∫ |(g∘a_φ)′(e)| W_m(e) de,   W_m(e) = w₁(e/m)/√m
//! ```
//!
//! J″ follows from ∂_m a_φ(e) = b_φ′(e) (a consequence of e a′ + m b′ = a/2):
//! differentiating J′ gives 1 + ∬ (g∘a_φ)′(e)(cos θ − r(e)) cos θ, and the
//! level-set mean r = b_φ′/a_φ′ lets the cos θ be replaced by cos θ − r.
//! At m = m₀, (g∘a_φ)′ = F′, so J″(m₀) = 1 − κ₀.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::action::PendulumPotential;
use crate::error::{HmfError, Result};
use crate::quad::{breakpoints, integrate_pieces, integrate_to_infinity, Tol};
use crate::rearrange::{deficit_integrals, star, GriddedDistribution, Mu0Squared};
use crate::steady_state::SteadyState;
use crate::vlasov_sim::{Perturbation, MIN_MAGNETIZATION};

const TOL: Tol = Tol::new(1e-14, 1e-11);
const INNER: Tol = Tol::new(1e-15, 1e-13);
/// Relative change under cutoff doubling accepted as converged.
pub const CUTOFF_TOL: f64 = 1e-6;
const MAX_DOUBLINGS: usize = 64;

/// ∫ f over [lo, hi) (hi may be +∞) split at `cuts`; errors raised inside f win.
fn e_integral(
    lo: f64,
    hi: f64,
    cuts: &[f64],
    tol: Tol,
    what: &str,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<f64> {
    if !(hi > lo) {
        return Ok(0.0);
    }
    let mut fail = None;
    let r = {
        let g = |e: f64| match f(e) {
            Ok(v) => v,
            Err(err) => {
                fail.get_or_insert(err);
                0.0
            }
        };
        if hi.is_finite() {
            integrate_pieces(g, &breakpoints(lo, hi, cuts), tol)
        } else {
            let c: Vec<f64> = cuts.iter().copied().filter(|&c| c > lo && c.is_finite()).collect();
            integrate_to_infinity(g, lo, &c, tol)
        }
    };
    if let Some(e) = fail {
        return Err(e);
    }
    r.map(|e| e.value).map_err(|b| HmfError::Integration { what: what.to_string(), value: b.value, error: b.error })
}

fn check_m(m: f64) -> Result<()> {
    if m >= 0.0 && m.is_finite() {
        Ok(())
    } else {
        Err(HmfError::Domain(format!("magnetization must be finite and >= 0, got {m}")))
    }
}

/// Area of the support of f₀ (∞ when noncompact).
fn support_area(ss: &SteadyState) -> f64 {
    let e_star = ss.profile().e_star();
    if e_star.is_finite() {
        ss.potential().a(e_star)
    } else {
        f64::INFINITY
    }
}

/// Energy in potential `pot` whose phase area equals `s` (∞ for s = ∞).
fn level_of_area(pot: &PendulumPotential, s: f64) -> Result<f64> {
    if s.is_finite() {
        pot.a_inv(s)
    } else {
        Ok(f64::INFINITY)
    }
}

/// ẽ = a₀⁻¹(a_φ(e)), the f₀-level sharing the phase area of the φ-level e.
fn matched_level(ss: &SteadyState, pot: &PendulumPotential, e: f64) -> Result<f64> {
    ss.potential().a_inv(pot.a(e))
}

pub fn j(ss: &SteadyState, m: f64) -> Result<f64> {
    check_m(m)?;
    let p = *ss.profile();
    let pot0 = ss.potential();
    let m0 = ss.m0();
    let pot = PendulumPotential::new(m, 0.0)?;
    let mut cuts = vec![m0];
    if m > 0.0 {
        // a_φ⁻¹ bends at the separatrix area 16√m
        cuts.push(pot0.a_inv(16.0 * m.sqrt())?);
    }
    let integral = e_integral(-m0, p.e_star(), &cuts, TOL, "reduced energy", |e| {
        let f = p.f(e);
        if f == 0.0 {
            return Ok(0.0);
        }
        Ok(f * pot.a_inv(pot0.a(e))? * pot0.a_prime_interior(e))
    })?;
    Ok(0.5 * m * m + integral)
}

/// J′ by the e-integral m − ∫ g(a_φ(e)) b_φ′(e) de.
pub fn j_prime_energy(ss: &SteadyState, m: f64) -> Result<f64> {
    check_m(m)?;
    if m == 0.0 {
        return Ok(0.0);
    }
    let p = *ss.profile();
    let pot = PendulumPotential::new(m, 0.0)?;
    let e_top = level_of_area(&pot, support_area(ss))?;
    let cuts = [m, pot.a_inv(16.0 * ss.m0().sqrt())?];
    let integral = e_integral(-m, e_top, &cuts, TOL, "J' energy form", |e| {
        let f = p.f(matched_level(ss, &pot, e)?);
        Ok(if f == 0.0 { 0.0 } else { f * pot.b_prime_interior(e) })
    })?;
    Ok(m - integral)
}

/// J′ by the phase-space form m − ∬ f₀^{*φ} cos θ, nested θ/v quadrature.
pub fn j_prime_phase_space(ss: &SteadyState, m: f64) -> Result<f64> {
    check_m(m)?;
    if m == 0.0 {
        return Ok(0.0);
    }
    let p = *ss.profile();
    let pot = PendulumPotential::new(m, 0.0)?;
    let e_top = level_of_area(&pot, support_area(ss))?;
    let e_k = pot.a_inv(16.0 * ss.m0().sqrt())?;
    let levels = [m, e_k, e_top];
    // θ where a level touches v = 0 (turning points)
    let th_cuts: Vec<f64> = levels
        .iter()
        .filter(|&&e| e.is_finite() && e.abs() < m)
        .map(|&e| (-e / m).acos())
        .collect();
    let mut fail: Option<HmfError> = None;
    let outer = integrate_pieces(
        |th: f64| {
            let c = th.cos();
            let phi = -m * c;
            let inner = |v: f64| -> Result<f64> {
                let e = 0.5 * v * v + phi;
                Ok(p.f(matched_level(ss, &pot, e)?))
            };
            let v_cuts: Vec<f64> = levels
                .iter()
                .filter(|&&e| e.is_finite() && e > phi)
                .map(|&e| (2.0 * (e - phi)).sqrt())
                .collect();
            let v_top = if e_top.is_finite() {
                if e_top <= phi {
                    return 0.0;
                }
                (2.0 * (e_top - phi)).sqrt()
            } else {
                f64::INFINITY
            };
            match e_integral(0.0, v_top, &v_cuts, INNER, "J' velocity integral", inner) {
                Ok(v) => 4.0 * c * v,
                Err(e) => {
                    fail.get_or_insert(e);
                    0.0
                }
            }
        },
        &breakpoints(0.0, PI, &th_cuts),
        TOL,
    );
    if let Some(e) = fail {
        return Err(e);
    }
    let outer = outer.map_err(|b| HmfError::Integration {
        what: "J' angle integral".into(),
        value: b.value,
        error: b.error,
    })?;
    Ok(m - outer.value)
}

/// J″(m) = 1 − ∫ |F′(ẽ)| a_φ′(e)/a₀′(ẽ) W_m(e) de with ẽ = a₀⁻¹(a_φ(e)).
pub fn j_second(ss: &SteadyState, m: f64) -> Result<f64> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(HmfError::Domain(format!("J'' needs m > 0, got {m}")));
    }
    let p = *ss.profile();
    let pot0 = ss.potential();
    let pot = PendulumPotential::new(m, 0.0)?;
    let e_top = level_of_area(&pot, support_area(ss))?;
    let cuts = [m, pot.a_inv(16.0 * ss.m0().sqrt())?];
    let integral = e_integral(-m, e_top, &cuts, TOL, "J''", |e| {
        let et = matched_level(ss, &pot, e)?;
        let fp = p.f_prime(et).abs();
        if fp == 0.0 {
            return Ok(0.0);
        }
        Ok(fp * pot.a_prime_interior(e) / pot0.a_prime_interior(et) * pot.w(e))
    })?;
    Ok(1.0 - integral)
}

/// Both sides of ∫ g∘a_φ · b_φ′ de = −∫ (g∘a_φ)′ · b_φ de.
pub fn ipp_pair(ss: &SteadyState, m: f64) -> Result<(f64, f64)> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(HmfError::Domain(format!("integration by parts needs m > 0, got {m}")));
    }
    let p = *ss.profile();
    let pot0 = ss.potential();
    let pot = PendulumPotential::new(m, 0.0)?;
    let lhs = m - j_prime_energy(ss, m)?;
    let e_top = level_of_area(&pot, support_area(ss))?;
    let cuts = [m, pot.a_inv(16.0 * ss.m0().sqrt())?];
    let rhs = e_integral(-m, e_top, &cuts, TOL, "integration by parts", |e| {
        let et = matched_level(ss, &pot, e)?;
        let fp = p.f_prime(et).abs();
        if fp == 0.0 {
            return Ok(0.0);
        }
        Ok(fp * pot.a_prime_interior(e) / pot0.a_prime_interior(et) * pot.b(e))
    })?;
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedRow {
    pub m: f64,
    pub j: f64,
    pub j_prime: f64,
    pub j_second: f64,
}

/// (m, J, J′, J″) on the given magnetizations, evaluated in parallel.
pub fn scan(ss: &SteadyState, ms: &[f64]) -> Result<Vec<ReducedRow>> {
    ms.par_iter()
        .map(|&m| {
            Ok(ReducedRow {
                m,
                j: j(ss, m)?,
                j_prime: j_prime_energy(ss, m)?,
                j_second: if m > 0.0 { j_second(ss, m)? } else { f64::NAN },
            })
        })
        .collect()
}

/// A tail integral together with its cutoff-doubling convergence record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffStudy {
    pub value: f64,
    /// Last cutoff used (the support edge for compact profiles).
    pub cutoff: f64,
    /// |I(2L) − I(L)| / |I(2L)| at the final doubling; 0 when no tail exists.
    pub relative_change: f64,
    pub doublings: usize,
}

/// ∫_{lo}^{L} f, doubling the distance L − lo until the added piece is below CUTOFF_TOL.
fn doubling<F: FnMut(f64) -> Result<f64>>(lo: f64, start: f64, cuts: &[f64], what: &str, mut f: F) -> Result<CutoffStudy> {
    let mut cutoff = start;
    let mut value = e_integral(lo, cutoff, cuts, TOL, what, &mut f)?;
    for k in 1..=MAX_DOUBLINGS {
        let next = lo + 2.0 * (cutoff - lo);
        let piece = e_integral(cutoff, next, cuts, TOL, what, &mut f)?;
        value += piece;
        cutoff = next;
        let relative_change = if value != 0.0 { (piece / value).abs() } else { 0.0 };
        if relative_change <= CUTOFF_TOL {
            return Ok(CutoffStudy { value, cutoff, relative_change, doublings: k });
        }
    }
    Err(HmfError::Tail(format!("{what} did not settle within {MAX_DOUBLINGS} cutoff doublings")))
}

/// 8 ∫_{−m₀}^{e_*} a₀′(e)|F′(e)| de, an upper bound for the constant K₀.
pub fn k0_bound(ss: &SteadyState) -> Result<CutoffStudy> {
    let p = *ss.profile();
    let pot0 = ss.potential();
    let m0 = ss.m0();
    let f = |e: f64| Ok(8.0 * pot0.a_prime_interior(e) * p.f_prime(e).abs());
    let e_star = p.e_star();
    if e_star.is_finite() {
        let value = e_integral(-m0, e_star, &[m0], TOL, "K0 bound", f)?;
        return Ok(CutoffStudy { value, cutoff: e_star, relative_change: 0.0, doublings: 0 });
    }
    doubling(-m0, 2.0 * m0 + 1.0, &[m0], "K0 bound", f)
}

/// ∫₀^S (1 + s²) f₀♯(s) ds with S doubled until converged, computed as
/// ∫ (1 + a₀(e)²) F(e) a₀′(e) de up to the level a₀⁻¹(S).
pub fn weighted_moment(ss: &SteadyState) -> Result<CutoffStudy> {
    let p = *ss.profile();
    let pot0 = ss.potential();
    let m0 = ss.m0();
    let in_e = |e: f64| {
        let a = pot0.a(e);
        Ok((1.0 + a * a) * p.f(e) * pot0.a_prime_interior(e))
    };
    let s_top = support_area(ss);
    if s_top.is_finite() {
        let value = e_integral(-m0, p.e_star(), &[m0], TOL, "weighted moment", in_e)?;
        return Ok(CutoffStudy { value, cutoff: s_top, relative_change: 0.0, doublings: 0 });
    }
    let mut s_cut = 32.0 * m0.sqrt();
    let mut e_cut = pot0.a_inv(s_cut)?;
    let mut value = e_integral(-m0, e_cut, &[m0], TOL, "weighted moment", in_e)?;
    for k in 1..=MAX_DOUBLINGS {
        s_cut *= 2.0;
        let e_next = pot0.a_inv(s_cut)?;
        let piece = e_integral(e_cut, e_next, &[], TOL, "weighted moment", in_e)?;
        value += piece;
        e_cut = e_next;
        let relative_change = (piece / value).abs();
        if relative_change <= CUTOFF_TOL {
            return Ok(CutoffStudy { value, cutoff: s_cut, relative_change, doublings: k });
        }
    }
    Err(HmfError::Tail("weighted moment did not settle".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayCheck {
    pub max_s3_f: f64,
    pub argmax: f64,
    /// max of s³f₀♯ over the last decade of the range
    pub tail_max: f64,
}

/// s³ f₀♯(s) on a logarithmic grid over [s_lo, s_hi].
pub fn sharp_decay(ss: &SteadyState, s_lo: f64, s_hi: f64, n: usize) -> Result<DecayCheck> {
    if !(0.0 < s_lo && s_lo < s_hi && n >= 2) {
        return Err(HmfError::Config("need 0 < s_lo < s_hi and n >= 2".into()));
    }
    let (mut max_s3_f, mut argmax, mut tail_max) = (0.0f64, s_lo, 0.0f64);
    let ratio = (s_hi / s_lo).ln() / (n - 1) as f64;
    for i in 0..n {
        let s = s_lo * (ratio * i as f64).exp();
        let v = s * s * s * ss.f0_sharp(s)?;
        if v > max_s3_f {
            max_s3_f = v;
            argmax = s;
        }
        if s >= s_hi / 10.0 {
            tail_max = tail_max.max(v);
        }
    }
    Ok(DecayCheck { max_s3_f, argmax, tail_max })
}

/// How well a grid represents f₀ itself, in energy units:
/// |ΔH| + m₀(|Δ mass| + |Δm|) between the sampled and the exact steady state.
pub fn grid_tolerance(ss: &SteadyState, f0_grid: &GriddedDistribution) -> f64 {
    let (mx, my) = f0_grid.magnetization();
    let dm = (mx.hypot(my) - ss.m0()).abs();
    (f0_grid.energy() - ss.energy_h0()).abs() + ss.m0() * ((f0_grid.mass() - ss.mass()).abs() + dm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReductionGap {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub energy_difference: f64,
    pub rearrangement_term: f64,
    pub sharp_deficit: f64,
}

/// J(|M_g|) − J(m₀) ≤ ℋ(g) − ℋ(f₀) + (2m₀ + 3‖g‖₁)‖g* − f₀*‖₁ + ∫ s²(f₀♯ − g♯)₊ ds,
/// with f₀ sampled on g's grid for ℋ(f₀) and f₀*.
pub fn reduction_gap(ss: &SteadyState, g: &GriddedDistribution, f0_grid: &GriddedDistribution, mu0: &Mu0Squared) -> Result<ReductionGap> {
    let (mx, my) = g.magnetization();
    let lhs = j(ss, mx.hypot(my))? - j(ss, ss.m0())?;
    let d = deficit_integrals(g, f0_grid, mu0)?;
    let energy_difference = g.energy() - f0_grid.energy();
    let rearrangement_term = (2.0 * ss.m0() + 3.0 * g.mass()) * d.d3;
    let rhs = energy_difference + rearrangement_term + d.d1;
    Ok(ReductionGap { lhs, rhs, slack: rhs - lhs, energy_difference, rearrangement_term, sharp_deficit: d.d1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantGap {
    pub lhs: f64,
    /// K₀∬e₀(g − f₀) + m₀‖g* − f₀*‖₁ + D2/(8π²)
    pub rhs: f64,
    pub slack: f64,
    /// K₀∬(e₀ + m₀)(g − f₀) + 2m₀‖g* − f₀*‖₁ + D2/(8π²): the same bound with
    /// the energy measured from the bottom of the well, where it is ≥ 0
    pub rhs_shifted: f64,
    pub slack_shifted: f64,
    pub k0: f64,
    pub energy_moment: f64,
    pub mass_difference: f64,
    pub d2: f64,
    pub d3: f64,
}

/// (‖g − f₀‖₁ + ‖f₀‖₁ − ‖g‖₁)² against the quantitative bound, all on g's grid.
pub fn quant_control_gap(
    ss: &SteadyState,
    g: &GriddedDistribution,
    f0_grid: &GriddedDistribution,
    mu0: &Mu0Squared,
    k0: f64,
) -> Result<QuantGap> {
    let m0 = ss.m0();
    let pot0 = ss.potential();
    let dist = g.l1_distance(f0_grid)?;
    let base = dist + f0_grid.mass() - g.mass();
    let lhs = base * base;
    let e0 = |th: f64, v: f64| 0.5 * v * v + pot0.phi(th);
    let energy_moment = g.integrate_against(e0) - f0_grid.integrate_against(e0);
    let mass_difference = g.mass() - f0_grid.mass();
    let d = deficit_integrals(g, f0_grid, mu0)?;
    let d2_term = d.d2 / (8.0 * PI * PI);
    let rhs = k0 * energy_moment + m0 * d.d3 + d2_term;
    let rhs_shifted = k0 * (energy_moment + m0 * mass_difference) + 2.0 * m0 * d.d3 + d2_term;
    Ok(QuantGap {
        lhs,
        rhs,
        slack: rhs - lhs,
        rhs_shifted,
        slack_shifted: rhs_shifted - lhs,
        k0,
        energy_moment,
        mass_difference,
        d2: d.d2,
        d3: d.d3,
    })
}

/// ‖g* − h*‖₁, the rearrangement distance reported alongside the gaps.
pub fn star_distance(g: &GriddedDistribution, h: &GriddedDistribution) -> Result<f64> {
    star(g).l1_distance(&star(h))
}

/// The standard battery: bumps, orbit shifts, Galilean shifts and rescalings of f₀.
pub fn perturbation_battery() -> Vec<(&'static str, Perturbation)> {
    let bump = |amplitude, theta, v| Perturbation::Bump { amplitude, theta, v, width: 0.3 };
    vec![
        ("bump_well_1pc", bump(0.01, 0.0, 0.0)),
        ("bump_well_5pc", bump(0.05, 0.0, 0.0)),
        ("dent_well_1pc", bump(-0.01, 0.0, 0.0)),
        ("bump_flank_1pc", bump(0.01, FRAC_PI_2, 0.5)),
        ("bump_top_2pc", bump(0.02, PI, 1.0)),
        ("theta_shift_small", Perturbation::ThetaShift { shift: 0.1 }),
        ("theta_shift_large", Perturbation::ThetaShift { shift: 1.0 }),
        ("v_shift_small", Perturbation::VelocityShift { v0: 0.05 }),
        ("v_shift_large", Perturbation::VelocityShift { v0: 0.2 }),
        ("scale_up_1pc", Perturbation::Scale { epsilon: 0.01 }),
        ("scale_down_1pc", Perturbation::Scale { epsilon: -0.01 }),
        ("scale_up_5pc", Perturbation::Scale { epsilon: 0.05 }),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityRow {
    pub name: String,
    pub perturbation: Perturbation,
    /// ‖g − f₀(· − θ_g)‖₁ on the grid.
    pub distance: f64,
    pub reduction: ReductionGap,
    pub quant: QuantGap,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalitySuite {
    pub grid_tolerance: f64,
    pub k0: f64,
    pub rows: Vec<InequalityRow>,
    pub min_reduction_slack: f64,
    pub min_quant_slack: f64,
    pub min_quant_shifted_slack: f64,
}

impl InequalitySuite {
    /// Slack ≥ −`factor`·τ for the reduction inequality and the quantitative bound as stated.
    pub fn passes(&self, factor: f64) -> (bool, bool, bool) {
        let floor = -factor * self.grid_tolerance;
        (
            self.min_reduction_slack >= floor,
            self.min_quant_slack >= floor,
            self.min_quant_shifted_slack >= floor,
        )
    }
}

/// Both inequalities on every case of `cases`, sampled on one grid.
pub fn inequality_suite(
    ss: &SteadyState,
    cases: &[(&str, Perturbation)],
    n_theta: usize,
    n_v: usize,
    v_max: f64,
    k0: f64,
) -> Result<InequalitySuite> {
    let f0_grid = GriddedDistribution::sample_steady(ss, n_theta, n_v, v_max)?;
    let mu0 = Mu0Squared::new(ss)?;
    let tau = grid_tolerance(ss, &f0_grid);
    let rows = cases
        .iter()
        .map(|(name, p)| {
            let g = p.sample(ss, n_theta, n_v, v_max)?;
            let (mx, my) = g.magnetization();
            let theta_g = if mx.hypot(my) >= MIN_MAGNETIZATION { my.atan2(mx) } else { 0.0 };
            let rot = GriddedDistribution::sample_steady(&ss.rotated(theta_g), n_theta, n_v, v_max)?;
            Ok(InequalityRow {
                name: name.to_string(),
                perturbation: *p,
                distance: g.l1_distance(&rot)?,
                reduction: reduction_gap(ss, &g, &f0_grid, &mu0)?,
                quant: quant_control_gap(ss, &g, &f0_grid, &mu0, k0)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min = |f: &dyn Fn(&InequalityRow) -> f64| rows.iter().map(f).fold(f64::INFINITY, f64::min);
    Ok(InequalitySuite {
        grid_tolerance: tau,
        k0,
        min_reduction_slack: min(&|r| r.reduction.slack),
        min_quant_slack: min(&|r| r.quant.slack),
        min_quant_shifted_slack: min(&|r| r.quant.slack_shifted),
        rows,
    })
}
