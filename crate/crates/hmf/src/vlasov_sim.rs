//! Semi-Lagrangian time integration of ∂_t f + v ∂_θ f − φ_f′(θ) ∂_v f = 0.
//!
//! One step is a Strang splitting: half a θ-advection, a full v-advection in
//! the potential of the intermediate state, half a θ-advection. The θ-shift
//! leaves ρ_f unchanged, so the midpoint potential is exact for the v-step.
//! Shifts use cubic B-splines, periodic in θ and zero-extended in v; negative
//! values left by the interpolation are clipped to 0 and their mass logged.

use std::f64::consts::TAU;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HmfError, Result};
use crate::rearrange::{deficit_integrals, equimeasurability_error, pairwise_sum, GriddedDistribution, Mu0Squared};
use crate::spline::{shift_periodic, shift_zero, GridSpline};
use crate::steady_state::SteadyState;

/// Below this |M_f| the angle θ_f is held at its previous value.
pub const MIN_MAGNETIZATION: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_theta: usize,
    pub n_v: usize,
    pub v_max: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Steps between diagnostics.
    pub diag_every: usize,
}

impl SimConfig {
    /// The reference resolution: 256 × 257, dt = 0.05, t_end = 100.
    pub fn reference(v_max: f64) -> Self {
        SimConfig { n_theta: 256, n_v: 257, v_max, dt: 0.05, t_end: 100.0, diag_every: 20 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_theta < 4 || self.n_v < 4 {
            return Err(HmfError::Config(format!("grid {}x{} too small (need >= 4 each)", self.n_theta, self.n_v)));
        }
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return Err(HmfError::Config(format!("v_max must be positive, got {}", self.v_max)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(HmfError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(HmfError::Config(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if self.v_max * self.dt >= TAU {
            return Err(HmfError::Config(format!(
                "v_max * dt = {} moves the fastest cells more than a full turn per step",
                self.v_max * self.dt
            )));
        }
        if self.diag_every == 0 {
            return Err(HmfError::Config("diag_every must be >= 1".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Free transport drops the mean-field force.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Force {
    SelfConsistent,
    Free,
}

/// M_f = ∬ f (cos θ, sin θ).
pub fn magnetization(g: &GriddedDistribution) -> (f64, f64) {
    g.magnetization()
}

/// φ_f(θ_i) = −M_f · (cos θ_i, sin θ_i) at the grid angles.
pub fn compute_phi(g: &GriddedDistribution) -> Vec<f64> {
    let (mx, my) = g.magnetization();
    (0..g.n_theta())
        .map(|i| {
            let th = g.theta(i);
            -(mx * th.cos() + my * th.sin())
        })
        .collect()
}

fn advect_theta(g: &mut GriddedDistribution, tau: f64) {
    let (nt, nv) = (g.n_theta(), g.n_v());
    let dth = g.dtheta();
    let shifts: Vec<f64> = (0..nv).map(|j| g.v(j) * tau / dth).collect();
    let vals = g.values();
    let cols: Vec<Vec<f64>> = (0..nv)
        .into_par_iter()
        .map(|j| {
            let col: Vec<f64> = (0..nt).map(|i| vals[i * nv + j]).collect();
            let mut out = vec![0.0; nt];
            let mut scratch = vec![0.0; nt];
            shift_periodic(&col, shifts[j], &mut out, &mut scratch);
            out
        })
        .collect();
    let vals = g.values_mut();
    for (j, col) in cols.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            vals[i * nv + j] = x;
        }
    }
}

fn advect_v(g: &mut GriddedDistribution, dt: f64) {
    let (mx, my) = g.magnetization();
    let nv = g.n_v();
    let dv = g.dv();
    // f(θ, v) ← f(θ, v + φ′(θ) dt)
    let shifts: Vec<f64> = (0..g.n_theta())
        .map(|i| {
            let th = g.theta(i);
            -(mx * th.sin() - my * th.cos()) * dt / dv
        })
        .collect();
    g.values_mut().par_chunks_mut(nv).zip(shifts.par_iter()).for_each(|(row, &s)| {
        let src = row.to_vec();
        let mut scratch = vec![0.0; nv + 4];
        shift_zero(&src, s, row, &mut scratch);
    });
}

/// Clips negative values to 0 and returns the mass added.
fn clip(g: &mut GriddedDistribution) -> f64 {
    let a = g.cell_area();
    let mut neg = Vec::new();
    for x in g.values_mut() {
        if *x < 0.0 {
            neg.push(-*x);
            *x = 0.0;
        }
    }
    pairwise_sum(&neg) * a
}

/// One Strang step in place; returns the clipped mass. The grid is left
/// untouched if the step produces a non-finite value.
pub fn step_in_place(g: &mut GriddedDistribution, dt: f64, force: Force, t: f64) -> Result<f64> {
    let mut next = g.clone();
    advect_theta(&mut next, 0.5 * dt);
    if force == Force::SelfConsistent {
        advect_v(&mut next, dt);
    }
    advect_theta(&mut next, 0.5 * dt);
    if next.values().iter().any(|x| !x.is_finite()) {
        return Err(HmfError::NonFinite { t: t + dt });
    }
    let clipped = clip(&mut next);
    *g = next;
    Ok(clipped)
}

/// g′ = one step of g; also returns the clipped mass.
pub fn step(g: &GriddedDistribution, dt: f64, force: Force) -> Result<(GriddedDistribution, f64)> {
    let mut out = g.clone();
    let c = step_in_place(&mut out, dt, force, 0.0)?;
    Ok((out, c))
}

/// `steps` steps without diagnostics; returns the state and the total clipped mass.
pub fn evolve(initial: &GriddedDistribution, dt: f64, steps: usize, force: Force) -> Result<(GriddedDistribution, f64)> {
    let mut g = initial.clone();
    let mut clipped = 0.0;
    for k in 0..steps {
        clipped += step_in_place(&mut g, dt, force, k as f64 * dt)?;
    }
    Ok((g, clipped))
}

/// Initial data built from f₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Perturbation {
    None,
    /// Adds a Gaussian of width `width` at (θ, v) carrying `amplitude`·‖f₀‖₁.
    /// Omitted fields take the values of [`Perturbation::bump`]`(0.01)`.
    Bump {
        #[serde(default = "bump_amplitude")]
        amplitude: f64,
        #[serde(default)]
        theta: f64,
        #[serde(default)]
        v: f64,
        #[serde(default = "bump_width")]
        width: f64,
    },
    /// f₀(θ − shift, v): a point on the orbit of f₀.
    ThetaShift { shift: f64 },
    /// f₀(θ, v − v0).
    VelocityShift { v0: f64 },
    /// (1 + epsilon) f₀.
    Scale { epsilon: f64 },
}

fn bump_amplitude() -> f64 {
    0.01
}

fn bump_width() -> f64 {
    0.3
}

impl Perturbation {
    /// The standard 1% bump at the bottom of the well.
    pub fn bump(amplitude: f64) -> Self {
        Perturbation::Bump { amplitude, theta: 0.0, v: 0.0, width: bump_width() }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Perturbation::None => true,
            Perturbation::Bump { amplitude, theta, v, width } => {
                amplitude.is_finite() && theta.is_finite() && v.is_finite() && width > 0.0 && width.is_finite()
            }
            Perturbation::ThetaShift { shift } => shift.is_finite(),
            Perturbation::VelocityShift { v0 } => v0.is_finite(),
            Perturbation::Scale { epsilon } => epsilon > -1.0 && epsilon.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(HmfError::Config(format!("invalid perturbation {self:?}")))
        }
    }

    /// The perturbed density as a function of (θ, v); negative values are cut at 0.
    pub fn density<'a>(&self, ss: &'a SteadyState) -> impl Fn(f64, f64) -> f64 + 'a {
        let p = *self;
        let mass = ss.mass();
        move |th: f64, v: f64| {
            let x = match p {
                Perturbation::None => ss.f0(th, v),
                Perturbation::Bump { amplitude, theta, v: vc, width } => {
                    let d = (th - theta + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
                    let r2 = d * d + (v - vc) * (v - vc);
                    ss.f0(th, v) + amplitude * mass * (-0.5 * r2 / (width * width)).exp() / (TAU * width * width)
                }
                Perturbation::ThetaShift { shift } => ss.f0(th - shift, v),
                Perturbation::VelocityShift { v0 } => ss.f0(th, v - v0),
                Perturbation::Scale { epsilon } => (1.0 + epsilon) * ss.f0(th, v),
            };
            x.max(0.0)
        }
    }

    pub fn sample(&self, ss: &SteadyState, n_theta: usize, n_v: usize, v_max: f64) -> Result<GriddedDistribution> {
        self.validate()?;
        GriddedDistribution::from_fn(n_theta, n_v, v_max, self.density(ss))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub t: f64,
    pub mass: f64,
    /// ℋ(f) = ½∬v²f − ½|M_f|².
    pub energy: f64,
    pub momentum: f64,
    pub casimir2: f64,
    pub mx: f64,
    pub my: f64,
    pub theta_f: f64,
    /// ‖f − f₀(· − θ_f)‖₁.
    pub l1_distance: f64,
    /// ℋ(f) − ℋ(f₀) + (1 + ‖f‖₁)‖f* − f₀*‖₁ + ∫s²(f₀♯ − f♯)₊ + ∫μ₀²β, every constant set to 1.
    pub theorem_rhs: f64,
    /// Cumulative mass added by clipping.
    pub clipped_mass: f64,
}

pub const CSV_HEADER: &str = "t,mass,H,momentum,casimir2,Mx,My,theta_f,L1dist,clipped_mass";

impl Diagnostics {
    fn finite(&self) -> bool {
        [
            self.t,
            self.mass,
            self.energy,
            self.momentum,
            self.casimir2,
            self.mx,
            self.my,
            self.theta_f,
            self.l1_distance,
            self.theorem_rhs,
            self.clipped_mass,
        ]
        .iter()
        .all(|x| x.is_finite())
    }
}

pub fn write_csv<W: Write>(rows: &[Diagnostics], mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for d in rows {
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            d.t, d.mass, d.energy, d.momentum, d.casimir2, d.mx, d.my, d.theta_f, d.l1_distance, d.clipped_mass
        )?;
    }
    Ok(())
}

/// f₀ and everything about it that the diagnostics compare against.
pub struct Reference<'a> {
    ss: &'a SteadyState,
    f0_grid: GriddedDistribution,
    mu0: Mu0Squared,
    energy0: f64,
}

impl<'a> Reference<'a> {
    pub fn new(ss: &'a SteadyState, n_theta: usize, n_v: usize, v_max: f64) -> Result<Self> {
        let f0_grid = GriddedDistribution::sample_steady(ss, n_theta, n_v, v_max)?;
        let energy0 = f0_grid.energy();
        Ok(Reference { ss, f0_grid, mu0: Mu0Squared::new(ss)?, energy0 })
    }

    pub fn f0_grid(&self) -> &GriddedDistribution {
        &self.f0_grid
    }

    /// ‖g − f₀(· − θ)‖₁ with f₀ evaluated exactly at the cell centres.
    pub fn orbit_distance(&self, g: &GriddedDistribution, theta: f64) -> f64 {
        let rot = self.ss.rotated(theta);
        let nv = g.n_v();
        let rows: Vec<f64> = (0..g.n_theta())
            .into_par_iter()
            .map(|i| {
                let th = g.theta(i);
                let d: Vec<f64> = (0..nv).map(|j| (g.at(i, j) - rot.f0(th, g.v(j))).abs()).collect();
                pairwise_sum(&d)
            })
            .collect();
        pairwise_sum(&rows) * g.cell_area()
    }

    pub fn diagnose(&self, g: &GriddedDistribution, t: f64, prev_theta: f64, clipped_mass: f64) -> Result<Diagnostics> {
        let (mx, my) = g.magnetization();
        let theta_f = if mx.hypot(my) >= MIN_MAGNETIZATION { my.atan2(mx) } else { prev_theta };
        let mass = g.mass();
        let energy = g.energy();
        let d = deficit_integrals(g, &self.f0_grid, &self.mu0)?;
        let d = Diagnostics {
            t,
            mass,
            energy,
            momentum: g.momentum(),
            casimir2: g.casimir2(),
            mx,
            my,
            theta_f,
            l1_distance: self.orbit_distance(g, theta_f),
            theorem_rhs: energy - self.energy0 + (1.0 + mass) * d.d3 + d.d1 + d.d2,
            clipped_mass,
        };
        if !d.finite() {
            return Err(HmfError::NonFinite { t });
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    /// The step ending at `t` produced a non-finite value; the run stopped at the last good state.
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub initial_distance: f64,
    pub max_distance: f64,
    /// max_t ‖f(t) − f₀(· − θ_f(t))‖₁ over its initial value.
    pub distance_growth: f64,
    /// max_t |H(t) − H(0)| / |H(0)|.
    pub energy_drift: f64,
    /// max_t |P(t) − P(0)| / ∬|v| f(0); P vanishes for symmetric data, so it
    /// is measured against the momentum scale rather than itself.
    pub momentum_drift: f64,
    /// (∬f²(0) − min_t ∬f²(t)) / ∬f²(0).
    pub casimir_drop: f64,
    /// Largest one-interval increase of ∬f², relative; 0 when non-increasing.
    pub casimir_max_rise: f64,
    /// ‖f(t_end)♯ − f(0)♯‖₁ / ‖f(0)‖₁.
    pub sharp_drift: f64,
    pub clipped_mass: f64,
    /// ‖f‖_∞ grew more than tenfold.
    pub blow_up: bool,
    pub outcome: Outcome,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub diagnostics: Vec<Diagnostics>,
    pub summary: Summary,
    pub final_state: GriddedDistribution,
}

/// Evolves `initial` with diagnostics every `cfg.diag_every` steps and at the end.
pub fn run(initial: &GriddedDistribution, cfg: &SimConfig, reference: &Reference) -> Result<Experiment> {
    cfg.validate()?;
    initial.check_same_shape(cfg.n_theta, cfg.n_v, cfg.v_max)?;
    let steps = cfg.steps();
    let mut g = initial.clone();
    let mut clipped = 0.0;
    let d0 = reference.diagnose(&g, 0.0, 0.0, 0.0)?;
    let mut rows = vec![d0];
    let sup0 = sup(&g);
    let mut blow_up = false;
    let mut outcome = Outcome::Completed;
    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        match step_in_place(&mut g, cfg.dt, Force::SelfConsistent, t) {
            Ok(c) => clipped += c,
            Err(HmfError::NonFinite { t }) => {
                outcome = Outcome::NonFinite { t };
                break;
            }
            Err(e) => return Err(e),
        }
        if sup(&g) > 10.0 * sup0 {
            blow_up = true;
        }
        if (k + 1) % cfg.diag_every == 0 || k + 1 == steps {
            let prev = rows.last().map_or(0.0, |d| d.theta_f);
            rows.push(reference.diagnose(&g, (k + 1) as f64 * cfg.dt, prev, clipped)?);
        }
    }
    let p_scale = initial.integrate_against(|_, v| v.abs());
    let summary = summarize(&rows, initial, &g, p_scale, clipped, blow_up, outcome)?;
    Ok(Experiment { diagnostics: rows, summary, final_state: g })
}

fn sup(g: &GriddedDistribution) -> f64 {
    g.values().iter().fold(0.0, |a, &b| a.max(b))
}

fn summarize(
    rows: &[Diagnostics],
    initial: &GriddedDistribution,
    last: &GriddedDistribution,
    p_scale: f64,
    clipped_mass: f64,
    blow_up: bool,
    outcome: Outcome,
) -> Result<Summary> {
    let d0 = rows[0];
    let max_distance = rows.iter().map(|d| d.l1_distance).fold(0.0, f64::max);
    let rel = |x: f64, s: f64| if s != 0.0 { x / s.abs() } else { x };
    let energy_drift = rows.iter().map(|d| rel((d.energy - d0.energy).abs(), d0.energy)).fold(0.0, f64::max);
    let momentum_drift = rows.iter().map(|d| rel((d.momentum - d0.momentum).abs(), p_scale)).fold(0.0, f64::max);
    let cmin = rows.iter().map(|d| d.casimir2).fold(f64::INFINITY, f64::min);
    let casimir_max_rise = rows.windows(2).map(|w| rel(w[1].casimir2 - w[0].casimir2, d0.casimir2)).fold(0.0, f64::max);
    Ok(Summary {
        initial_distance: d0.l1_distance,
        max_distance,
        distance_growth: rel(max_distance, d0.l1_distance),
        energy_drift,
        momentum_drift,
        casimir_drop: rel(d0.casimir2 - cmin, d0.casimir2),
        casimir_max_rise,
        sharp_drift: rel(equimeasurability_error(last, initial)?, initial.mass()),
        clipped_mass,
        blow_up,
        outcome,
    })
}

/// Perturbs f₀, evolves, and summarizes against the orbit of f₀.
pub fn run_stability_experiment(ss: &SteadyState, perturbation: &Perturbation, cfg: &SimConfig) -> Result<Experiment> {
    cfg.validate()?;
    let reference = Reference::new(ss, cfg.n_theta, cfg.n_v, cfg.v_max)?;
    let initial = perturbation.sample(ss, cfg.n_theta, cfg.n_v, cfg.v_max)?;
    run(&initial, cfg, &reference)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GalileanCheck {
    pub v0: f64,
    pub t: f64,
    /// ‖g_{v₀}(t) − g(t)(· − v₀t, · − v₀)‖₁.
    pub discrepancy: f64,
    /// ‖g_h(t) − g_{h/2}(t)‖₁ at the coarse cell centres (grid and dt halved).
    pub scheme_error: f64,
    pub ratio: f64,
    pub passed: bool,
}

/// Runs `perturbation` plain and boosted by v₀ to `cfg.t_end` and compares
/// the boosted run with the plain one carried along (θ + v₀t, v + v₀).
pub fn galilean_check(ss: &SteadyState, perturbation: &Perturbation, cfg: &SimConfig, v0: f64) -> Result<GalileanCheck> {
    cfg.validate()?;
    let steps = cfg.steps();
    let t = steps as f64 * cfg.dt;
    let dens = perturbation.density(ss);
    let (nt, nv, vm) = (cfg.n_theta, cfg.n_v, cfg.v_max);
    let plain0 = GriddedDistribution::from_fn(nt, nv, vm, &dens)?;
    let boosted0 = GriddedDistribution::from_fn(nt, nv, vm, |th, v| dens(th, v - v0))?;
    let (plain, _) = evolve(&plain0, cfg.dt, steps, Force::SelfConsistent)?;
    let (boosted, _) = evolve(&boosted0, cfg.dt, steps, Force::SelfConsistent)?;
    let sp = GridSpline::new(nt, nv, vm, plain.values());
    let discrepancy = compare(&boosted, |th, v| sp.eval(th - v0 * t, v - v0));

    let fine0 = GriddedDistribution::from_fn(2 * nt, 2 * nv, vm, &dens)?;
    let (fine, _) = evolve(&fine0, 0.5 * cfg.dt, 2 * steps, Force::SelfConsistent)?;
    let sf = GridSpline::new(2 * nt, 2 * nv, vm, fine.values());
    let scheme_error = compare(&plain, |th, v| sf.eval(th, v));
    let ratio = discrepancy / scheme_error;
    Ok(GalileanCheck { v0, t, discrepancy, scheme_error, ratio, passed: discrepancy <= 5.0 * scheme_error })
}

/// ‖g − h‖₁ with h evaluated at g's cell centres.
fn compare(g: &GriddedDistribution, h: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
    let nv = g.n_v();
    let rows: Vec<f64> = (0..g.n_theta())
        .into_par_iter()
        .map(|i| {
            let th = g.theta(i);
            let d: Vec<f64> = (0..nv).map(|j| (g.at(i, j) - h(th, g.v(j))).abs()).collect();
            pairwise_sum(&d)
        })
        .collect();
    pairwise_sum(&rows) * g.cell_area()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_checks() {
        let mut c = SimConfig::reference(6.0);
        assert!(c.validate().is_ok());
        assert_eq!(c.steps(), 2000);
        c.dt = 0.0;
        assert!(c.validate().is_err());
        c.dt = 2.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn uniform_in_theta_has_no_field() {
        let g = GriddedDistribution::from_fn(32, 33, 4.0, |_, v| (-v * v).exp()).unwrap();
        let (mx, my) = magnetization(&g);
        assert!(mx.abs() < 1e-14 && my.abs() < 1e-14);
        let (next, clipped) = step(&g, 0.1, Force::SelfConsistent).unwrap();
        assert_eq!(clipped, 0.0);
        assert!(next.l1_distance(&g).unwrap() < 1e-12);
    }
}
