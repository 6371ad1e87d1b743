//! Self-consistent steady states f₀ = F(v²/2 − m₀ cos(θ − θ_offset)).

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::action::PendulumPotential;
use crate::error::{HmfError, Result};
use crate::profiles::Profile;
use crate::quad::{integrate, integrate_pieces, integrate_to_infinity, Tol};
use crate::roots::brent;
use crate::spline::PeriodicSpline;

const INNER: Tol = Tol::new(1e-15, 1e-13);
const OUTER: Tol = Tol::new(1e-15, 1e-12);

/// Smallest magnetization considered nontrivial.
pub const M_FLOOR: f64 = 1e-6;
const RHO_NODES: usize = 512;
/// The scan stops this far (relative) below the noncompact pole, where
/// M(m) − m is already large and positive for any admissible amplitude
/// of practical size.
const POLE_MARGIN: f64 = 1e-3;

/// `base` loosened to the accuracy at which F can be evaluated a distance
/// `gap` above the noncompact pole: F(e) depends on e0 + e, which carries an
/// absolute rounding error of ε·e0.
fn conditioned(base: Tol, profile: &Profile, gap: f64) -> Tol {
    let e0 = -profile.lower_limit();
    if !e0.is_finite() || gap <= 0.0 {
        return base;
    }
    Tol { rel: base.rel.max(16.0 * f64::EPSILON * e0 / gap), ..base }
}

fn q_err(what: &str) -> impl Fn(crate::quad::Budget) -> HmfError + '_ {
    move |b| HmfError::Integration { what: what.to_string(), value: b.value, error: b.error }
}

/// ∫₀^{∞} vᵏ F(v²/2 + p) dv for k ∈ {0, 2}, with p = φ(θ).
fn v_integral(profile: &Profile, p: f64, k: i32) -> Result<f64> {
    let e_star = profile.e_star();
    if e_star.is_finite() {
        if e_star <= p {
            return Ok(0.0);
        }
        // v = v_top sin u turns the algebraic edge into a smooth power of cos u
        let v_top = (2.0 * (e_star - p)).sqrt();
        let r = integrate(
            |u: f64| {
                let v = v_top * u.sin();
                let w = if k == 0 { 1.0 } else { v * v };
                w * profile.f(0.5 * v * v + p) * v_top * u.cos()
            },
            0.0,
            FRAC_PI_2,
            INNER,
        )
        .map_err(q_err("velocity integral"))?;
        Ok(r.value)
    } else {
        let scale = (2.0 * (1.0 + p.abs())).sqrt();
        let tol = conditioned(INNER, profile, p - profile.lower_limit());
        let mut breaks = vec![scale];
        // near the noncompact pole F peaks on the scale √(e0 + p)
        let gap = p - profile.lower_limit();
        if gap.is_finite() && gap > 0.0 {
            breaks.push((2.0 * gap).sqrt());
        }
        let r = integrate_to_infinity(
            |v: f64| {
                let w = if k == 0 { 1.0 } else { v * v };
                let f = profile.f(0.5 * v * v + p);
                if f == 0.0 {
                    0.0
                } else {
                    w * f
                }
            },
            0.0,
            &breaks,
            tol,
        )
        .map_err(q_err("velocity integral"))?;
        Ok(r.value)
    }
}

/// Angle beyond which f₀ vanishes (π unless the support is cut inside the well).
fn theta_cut(profile: &Profile, m: f64) -> f64 {
    let e_star = profile.e_star();
    if !e_star.is_finite() || e_star >= m {
        PI
    } else if e_star <= -m {
        0.0
    } else {
        (-e_star / m).acos()
    }
}

fn check_m(profile: &Profile, m: f64) -> Result<()> {
    if !(m >= 0.0 && m.is_finite()) {
        return Err(HmfError::Domain(format!("magnetization must be >= 0, got {m}")));
    }
    if -m <= profile.lower_limit() {
        return Err(HmfError::Domain(format!(
            "m = {m} reaches the pole of the noncompact polytrope (need m < e0)"
        )));
    }
    Ok(())
}

/// Geometric θ breakpoints from the width √(2(e0 − m)/m) of the density
/// peak at θ = 0 when m approaches the noncompact pole; empty otherwise.
fn pole_grading(profile: &Profile, m: f64) -> Vec<f64> {
    let gap = -profile.lower_limit() - m;
    if !gap.is_finite() || m <= 0.0 {
        return Vec::new();
    }
    let mut th = (2.0 * gap / m).sqrt();
    let mut pts = Vec::new();
    while th < 1.0 {
        pts.push(th);
        th *= 4.0;
    }
    pts
}

/// ∫₀^{2π} g(θ) ρ_m(θ) dθ, where ρ_m(θ) = ∫ F(v²/2 − m cos θ) dv; g even.
fn theta_moment(profile: &Profile, m: f64, k: i32, g: impl Fn(f64) -> f64) -> Result<f64> {
    let tc = theta_cut(profile, m);
    if tc == 0.0 {
        return Ok(0.0);
    }
    let mut fail = None;
    let pts = crate::quad::breakpoints(0.0, tc, &pole_grading(profile, m));
    let r = integrate_pieces(
        |th: f64| match v_integral(profile, -m * th.cos(), k) {
            Ok(v) => 4.0 * g(th) * v,
            Err(e) => {
                fail.get_or_insert(e);
                0.0
            }
        },
        &pts,
        conditioned(OUTER, profile, -profile.lower_limit() - m),
    )
    .map_err(q_err("angle integral"))?;
    if let Some(e) = fail {
        return Err(e);
    }
    Ok(r.value)
}

/// M(m) = ∬ F(v²/2 − m cos θ) cos θ dθ dv.
pub fn magnetization_map(profile: &Profile, m: f64) -> Result<f64> {
    check_m(profile, m)?;
    if m == 0.0 {
        return Ok(0.0);
    }
    theta_moment(profile, m, 0, f64::cos)
}

/// Mass ∬ F(v²/2 − m cos θ).
pub fn mass_at(profile: &Profile, m: f64) -> Result<f64> {
    check_m(profile, m)?;
    theta_moment(profile, m, 0, |_| 1.0)
}

/// Kinetic energy ½∬ v² F(v²/2 − m cos θ).
pub fn kinetic_at(profile: &Profile, m: f64) -> Result<f64> {
    check_m(profile, m)?;
    Ok(0.5 * theta_moment(profile, m, 2, |_| 1.0)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub bracket: (f64, f64),
    pub scan_points: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { bracket: (M_FLOOR, 10.0), scan_points: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ScanRow {
    pub m: f64,
    pub g: f64,
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    profile: Profile,
    m0: f64,
    theta_offset: f64,
    mass: f64,
    kinetic: f64,
    residual: f64,
    scan: Vec<ScanRow>,
    rho: PeriodicSpline,
    rho_samples: Vec<f64>,
}

/// Finds the nontrivial root of G(m) = M(m) − m inside the bracket.
pub fn solve_m0(profile: &Profile, opts: SolverOptions) -> Result<SteadyState> {
    let (mut lo, mut hi) = opts.bracket;
    if !(lo < hi) || !hi.is_finite() {
        return Err(HmfError::Config(format!("invalid bracket [{lo}, {hi}]")));
    }
    lo = lo.max(M_FLOOR);
    let pole = -profile.lower_limit();
    if pole.is_finite() {
        hi = hi.min(pole * (1.0 - POLE_MARGIN));
    }
    if lo >= hi {
        return Err(HmfError::Config(format!(
            "bracket is empty after clipping to [{M_FLOOR}, pole of F)"
        )));
    }
    let n = opts.scan_points.max(2);
    let g = |m: f64| -> Result<f64> { Ok(magnetization_map(profile, m)? - m) };
    let mut scan = Vec::with_capacity(n);
    for i in 0..n {
        let m = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        scan.push(ScanRow { m, g: g(m)? });
    }
    let changes: Vec<(usize, usize)> = scan
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].g.signum() != w[1].g.signum() || w[1].g == 0.0)
        .map(|(i, _)| (i, i + 1))
        .collect();
    let (i, j) = match changes.as_slice() {
        [] => {
            return Err(HmfError::HomogeneousOnly(format!(
                "M(m) - m keeps the sign of {:e} on [{lo}, {hi}]; adjust A or the temperature \
                 parameter, or widen the bracket",
                scan[0].g
            )))
        }
        [one] => *one,
        many => {
            let list: Vec<String> = many
                .iter()
                .map(|&(a, b)| format!("[{:.6}, {:.6}]", scan[a].m, scan[b].m))
                .collect();
            return Err(HmfError::AmbiguousRoot(format!(
                "sign changes in {}; narrow the bracket to one of them",
                list.join(", ")
            )));
        }
    };
    let (a, b) = (scan[i], scan[j]);
    let mut fail = None;
    let m0 = if b.g == 0.0 {
        b.m
    } else {
        brent(
            |m| match g(m) {
                Ok(v) => v,
                Err(e) => {
                    fail.get_or_insert(e);
                    f64::NAN
                }
            },
            a.m,
            b.m,
            a.g,
            b.g,
            1e-15 * b.m,
        )
        .map_err(|e| fail.clone().unwrap_or(HmfError::Domain(format!("root polish failed: {e:?}"))))?
    };
    SteadyState::from_root(*profile, m0, 0.0, scan)
}

impl SteadyState {
    /// Builds the state for a known root and re-checks its residual.
    pub fn from_root(profile: Profile, m0: f64, theta_offset: f64, scan: Vec<ScanRow>) -> Result<Self> {
        if !(m0 >= M_FLOOR) {
            return Err(HmfError::Domain(format!("m0 = {m0} is not a nontrivial magnetization")));
        }
        let residual = (magnetization_map(&profile, m0)? - m0).abs();
        if residual > 1e-9 * m0.max(1.0) {
            return Err(HmfError::Domain(format!(
                "m0 = {m0} is not self-consistent (residual {residual:e})"
            )));
        }
        let mass = mass_at(&profile, m0)?;
        let kinetic = kinetic_at(&profile, m0)?;
        let mut rho_samples = Vec::with_capacity(RHO_NODES);
        for i in 0..RHO_NODES {
            let th = TAU * i as f64 / RHO_NODES as f64;
            rho_samples.push(2.0 * v_integral(&profile, -m0 * th.cos(), 0)?);
        }
        let rho = PeriodicSpline::new(&rho_samples, 0.0, TAU);
        Ok(SteadyState {
            profile,
            m0,
            theta_offset: theta_offset.rem_euclid(TAU),
            mass,
            kinetic,
            residual,
            scan,
            rho,
            rho_samples,
        })
    }

    /// The same state rotated so that φ₀(θ) = −m₀ cos(θ − θ_offset).
    pub fn rotated(&self, theta_offset: f64) -> Self {
        SteadyState { theta_offset: theta_offset.rem_euclid(TAU), ..self.clone() }
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }
    pub fn m0(&self) -> f64 {
        self.m0
    }
    pub fn theta_offset(&self) -> f64 {
        self.theta_offset
    }
    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn kinetic(&self) -> f64 {
        self.kinetic
    }
    pub fn residual(&self) -> f64 {
        self.residual
    }
    pub fn scan(&self) -> &[ScanRow] {
        &self.scan
    }
    /// ρ₀ at the uniform nodes θ_i = θ_offset + 2πi/512.
    pub fn rho_samples(&self) -> &[f64] {
        &self.rho_samples
    }

    /// ℋ(f₀) = ½∬v²f₀ − ½m₀².
    pub fn energy_h0(&self) -> f64 {
        self.kinetic - 0.5 * self.m0 * self.m0
    }

    /// ℋ(f₀) in the two-term form ½∬v²f₀ + ½∫ρ₀φ₀ (trapezoid on the ρ₀ nodes).
    pub fn energy_h0_two_term(&self) -> f64 {
        let n = self.rho_samples.len();
        let h = TAU / n as f64;
        let pot: f64 = self
            .rho_samples
            .iter()
            .enumerate()
            .map(|(i, r)| -self.m0 * (h * i as f64).cos() * r)
            .sum::<f64>()
            * h;
        self.kinetic + 0.5 * pot
    }

    pub fn potential(&self) -> PendulumPotential {
        PendulumPotential::new(self.m0, self.theta_offset).expect("m0 validated at construction")
    }

    pub fn phi0(&self, theta: f64) -> f64 {
        -self.m0 * (theta - self.theta_offset).cos()
    }

    pub fn e0(&self, theta: f64, v: f64) -> f64 {
        0.5 * v * v + self.phi0(theta)
    }

    pub fn f0(&self, theta: f64, v: f64) -> f64 {
        self.profile.f(self.e0(theta, v))
    }

    pub fn rho0(&self, theta: f64) -> f64 {
        self.rho.eval(theta - self.theta_offset)
    }

    pub fn eval_fields(&self, theta: f64, v: f64) -> Fields {
        let e0 = self.e0(theta, v);
        Fields { f0: self.profile.f(e0), e0, phi0: self.phi0(theta), rho0: self.rho0(theta) }
    }

    /// f₀♯(s) = F(a_{φ₀}⁻¹(s)).
    pub fn f0_sharp(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(HmfError::Domain(format!("f0_sharp needs s >= 0, got {s}")));
        }
        Ok(self.profile.f(self.potential().a_inv(s)?))
    }

    /// μ_{f₀}(t) = a_{φ₀}(F⁻¹(t)); the support area for t ≤ 0, zero above max f₀.
    pub fn mu0(&self, t: f64) -> f64 {
        let pot = self.potential();
        if t <= 0.0 {
            return pot.a(self.profile.e_star());
        }
        if t >= self.profile.f(-self.m0) {
            return 0.0;
        }
        match self.profile.f_inv(t) {
            Ok(e) => pot.a(e),
            Err(_) => 0.0,
        }
    }

    /// Velocity cutoff where f₀ drops below 1e−16·max f₀ (exact support edge when compact).
    pub fn v_cutoff(&self) -> f64 {
        self.v_cutoff_at(1e-16)
    }

    /// Largest |v| with f₀ ≥ rel·max f₀ (exact support edge when compact).
    pub fn v_cutoff_at(&self, rel: f64) -> f64 {
        let e_star = self.profile.e_star();
        if e_star.is_finite() {
            return (2.0 * (e_star + self.m0)).max(0.0).sqrt();
        }
        let fmax = self.profile.f(-self.m0);
        let e_cut = self.profile.f_inv(rel * fmax).unwrap_or(self.m0 + 40.0);
        (2.0 * (e_cut + self.m0)).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fields {
    pub f0: f64,
    pub e0: f64,
    pub phi0: f64,
    pub rho0: f64,
}
