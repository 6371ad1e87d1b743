//! Distribution functions, pseudo-inverses and rearrangements on 𝕋 × ℝ.
//!
//! A [`GriddedDistribution`] holds cell-centre values on
//! θ_i = (i + ½)·2π/n_θ, v_j = −v_max + (j + ½)·2v_max/n_v, stored row-major
//! with one row per θ index. Every cell has the same area, so the
//! decreasing rearrangement of a grid is a sort: f♯ takes the k-th largest
//! value on [k·A, (k+1)·A).

use std::f64::consts::{PI, TAU};
use std::io::{self, Read, Write};

use crate::action::PendulumPotential;
use crate::error::{HmfError, Result};
use crate::profiles::Profile;
use crate::quad::{integrate, integrate_pieces, integrate_to_infinity, Tol};
use crate::steady_state::SteadyState;

#[derive(Debug, Clone, PartialEq)]
pub struct GriddedDistribution {
    n_theta: usize,
    n_v: usize,
    v_max: f64,
    values: Vec<f64>,
}

/// Sum with a fixed binary reduction tree so results do not depend on chunking.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

impl GriddedDistribution {
    pub fn new(n_theta: usize, n_v: usize, v_max: f64, values: Vec<f64>) -> Result<Self> {
        if n_theta == 0 || n_v == 0 {
            return Err(HmfError::Config("grid sizes must be positive".into()));
        }
        if !(v_max > 0.0 && v_max.is_finite()) {
            return Err(HmfError::Config(format!("v_max must be positive and finite, got {v_max}")));
        }
        if values.len() != n_theta * n_v {
            return Err(HmfError::Shape(format!(
                "{} values for a {n_theta} x {n_v} grid",
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(HmfError::Domain(format!("value {} at cell {k} is negative or not finite", values[k])));
        }
        Ok(GriddedDistribution { n_theta, n_v, v_max, values })
    }

    pub fn zeros(n_theta: usize, n_v: usize, v_max: f64) -> Result<Self> {
        Self::new(n_theta, n_v, v_max, vec![0.0; n_theta * n_v])
    }

    /// Samples `f(θ, v)` at cell centres; negative samples are a domain error.
    pub fn from_fn(n_theta: usize, n_v: usize, v_max: f64, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let mut g = Self::zeros(n_theta, n_v, v_max)?;
        for i in 0..n_theta {
            let th = g.theta(i);
            for j in 0..n_v {
                g.values[i * n_v + j] = f(th, g.v(j));
            }
        }
        Self::new(n_theta, n_v, v_max, g.values)
    }

    /// f₀ of a steady state sampled on the grid.
    pub fn sample_steady(ss: &SteadyState, n_theta: usize, n_v: usize, v_max: f64) -> Result<Self> {
        Self::from_fn(n_theta, n_v, v_max, |th, v| ss.f0(th, v))
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access for in-place schemes; callers keep values finite and ≥ 0.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn dtheta(&self) -> f64 {
        TAU / self.n_theta as f64
    }

    pub fn dv(&self) -> f64 {
        2.0 * self.v_max / self.n_v as f64
    }

    pub fn theta(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dtheta()
    }

    pub fn v(&self, j: usize) -> f64 {
        -self.v_max + (j as f64 + 0.5) * self.dv()
    }

    pub fn cell_area(&self) -> f64 {
        self.dtheta() * self.dv()
    }

    /// Cell diameter, the resolution parameter h of the O(h) statements.
    pub fn h(&self) -> f64 {
        self.dtheta().hypot(self.dv())
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_v + j]
    }

    pub fn mass(&self) -> f64 {
        pairwise_sum(&self.values) * self.cell_area()
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.n_theta == other.n_theta && self.n_v == other.n_v && self.v_max == other.v_max
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(HmfError::Shape(format!(
                "grids differ: {}x{} (v_max {}) vs {}x{} (v_max {})",
                self.n_theta, self.n_v, self.v_max, other.n_theta, other.n_v, other.v_max
            )))
        }
    }

    pub fn check_same_shape(&self, n_theta: usize, n_v: usize, v_max: f64) -> Result<()> {
        if self.n_theta == n_theta && self.n_v == n_v && self.v_max == v_max {
            Ok(())
        } else {
            Err(HmfError::Shape(format!(
                "grid is {}x{} (v_max {}), expected {n_theta}x{n_v} (v_max {v_max})",
                self.n_theta, self.n_v, self.v_max
            )))
        }
    }

    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        self.check_grid(other)?;
        let d: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).collect();
        Ok(pairwise_sum(&d) * self.cell_area())
    }

    /// Per-θ-row sums of `w(v)·f`, then a pairwise sum over rows weighted by `u(θ)`.
    fn moment(&self, u: impl Fn(f64) -> f64, w: impl Fn(f64) -> f64) -> f64 {
        let wv: Vec<f64> = (0..self.n_v).map(|j| w(self.v(j))).collect();
        let rows: Vec<f64> = self
            .values
            .chunks_exact(self.n_v)
            .enumerate()
            .map(|(i, row)| {
                let s: Vec<f64> = row.iter().zip(&wv).map(|(f, w)| f * w).collect();
                u(self.theta(i)) * pairwise_sum(&s)
            })
            .collect();
        pairwise_sum(&rows) * self.cell_area()
    }

    /// M_f = ∬ f (cos θ, sin θ).
    pub fn magnetization(&self) -> (f64, f64) {
        (self.moment(f64::cos, |_| 1.0), self.moment(f64::sin, |_| 1.0))
    }

    /// ½∬ v² f.
    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.moment(|_| 1.0, |v| v * v)
    }

    /// ℋ(f) = ½∬ v² f − ½|M_f|².
    pub fn energy(&self) -> f64 {
        let (mx, my) = self.magnetization();
        self.kinetic_energy() - 0.5 * (mx * mx + my * my)
    }

    /// ∬ v f.
    pub fn momentum(&self) -> f64 {
        self.moment(|_| 1.0, |v| v)
    }

    /// ∬ f².
    pub fn casimir2(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        pairwise_sum(&sq) * self.cell_area()
    }

    /// ∬ h(θ, v) f.
    pub fn integrate_against(&self, h: impl Fn(f64, f64) -> f64) -> f64 {
        let rows: Vec<f64> = (0..self.n_theta)
            .map(|i| {
                let th = self.theta(i);
                let s: Vec<f64> = (0..self.n_v).map(|j| h(th, self.v(j)) * self.at(i, j)).collect();
                pairwise_sum(&s)
            })
            .collect();
        pairwise_sum(&rows) * self.cell_area()
    }

    /// Same grid, new values (validated).
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.n_theta, self.n_v, self.v_max, values)
    }

    /// Header: n_θ and n_v as u64, v_max as f64, all little-endian; then the values.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&(self.n_theta as u64).to_le_bytes())?;
        w.write_all(&(self.n_v as u64).to_le_bytes())?;
        w.write_all(&self.v_max.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        let n_theta = u64::from_le_bytes(b) as usize;
        r.read_exact(&mut b)?;
        let n_v = u64::from_le_bytes(b) as usize;
        r.read_exact(&mut b)?;
        let v_max = f64::from_le_bytes(b);
        let len = n_theta
            .checked_mul(n_v)
            .filter(|&n| n <= 1 << 32)
            .ok_or_else(|| HmfError::Shape(format!("implausible grid {n_theta} x {n_v}")))?;
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            r.read_exact(&mut b)?;
            values.push(f64::from_le_bytes(b));
        }
        Self::new(n_theta, n_v, v_max, values)
    }

    /// Columns `theta,v,f`, one row per cell in storage order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "theta,v,f")?;
        for i in 0..self.n_theta {
            for j in 0..self.n_v {
                writeln!(w, "{},{},{}", self.theta(i), self.v(j), self.at(i, j))?;
            }
        }
        w.flush()
    }
}

/// A nonincreasing right-continuous step function on [0, ∞):
/// `values[k]` on [edges[k], edges[k+1]), zero from the last edge on.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneProfile {
    edges: Vec<f64>,
    values: Vec<f64>,
}

impl MonotoneProfile {
    pub fn new(edges: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if edges.len() != values.len() + 1 || edges[0] != 0.0 {
            return Err(HmfError::Shape("need edges 0 = s_0 < ... < s_n and n values".into()));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) || !edges[edges.len() - 1].is_finite() {
            return Err(HmfError::Domain("edges must be finite and strictly increasing".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || values.windows(2).any(|w| w[1] > w[0]) {
            return Err(HmfError::Domain("values must be finite, >= 0 and nonincreasing".into()));
        }
        Ok(MonotoneProfile { edges, values })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, s: f64) -> f64 {
        if !(s >= 0.0) {
            return self.values.first().copied().unwrap_or(0.0);
        }
        let k = self.edges.partition_point(|&e| e <= s);
        if k == 0 || k > self.values.len() {
            0.0
        } else {
            self.values[k - 1]
        }
    }

    /// μ(t) = |{f♯ > t}|, the right-continuous distribution function.
    pub fn mu(&self, t: f64) -> f64 {
        let k = self.values.partition_point(|&v| v > t);
        self.edges[k]
    }

    /// ∫ f♯(s) w(s) ds given an antiderivative `big_w` of w.
    pub fn integrate_against(&self, big_w: impl Fn(f64) -> f64) -> f64 {
        let mut lo = big_w(self.edges[0]);
        let mut terms = Vec::with_capacity(self.values.len());
        for (k, &v) in self.values.iter().enumerate() {
            let hi = big_w(self.edges[k + 1]);
            if v != 0.0 {
                terms.push(v * (hi - lo));
            }
            lo = hi;
        }
        pairwise_sum(&terms)
    }

    pub fn l1(&self) -> f64 {
        self.integrate_against(|s| s)
    }
}

/// μ_g(t) = A·#{cells with value > t}.
pub fn mu(g: &GriddedDistribution, t: f64) -> f64 {
    g.values.iter().filter(|&&v| v > t).count() as f64 * g.cell_area()
}

/// Cell values sorted in decreasing order, ties kept in storage order.
fn sorted_desc(g: &GriddedDistribution) -> Vec<f64> {
    let mut v = g.values.clone();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Exact pseudo-inverse of μ_g: the k-th largest value on [kA, (k+1)A).
pub fn sharp(g: &GriddedDistribution) -> MonotoneProfile {
    let a = g.cell_area();
    let values = sorted_desc(g);
    let edges = (0..=values.len()).map(|k| k as f64 * a).collect();
    MonotoneProfile { edges, values }
}

/// |B(0, r) ∩ 𝕋 × ℝ| with 𝕋 = [−π, π): the disk, minus the two caps beyond |θ| = π.
pub fn strip_disk_area(r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if r <= PI {
        return PI * r * r;
    }
    let cap = r * r * (PI / r).acos() - PI * (r * r - PI * PI).sqrt();
    PI * r * r - 2.0 * cap
}

/// θ folded to [−π, π).
fn canonical_theta(th: f64) -> f64 {
    let t = th.rem_euclid(TAU);
    if t >= PI {
        t - TAU
    } else {
        t
    }
}

/// Cell indices in increasing order of θ² + v² (θ folded to [−π, π)),
/// i.e. increasing strip-disk area; ties broken by index.
fn radial_order(g: &GriddedDistribution) -> Vec<usize> {
    let mut r2: Vec<(f64, usize)> = Vec::with_capacity(g.values.len());
    for i in 0..g.n_theta {
        let th = canonical_theta(g.theta(i));
        for j in 0..g.n_v {
            let v = g.v(j);
            r2.push((th * th + v * v, i * g.n_v + j));
        }
    }
    r2.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    r2.into_iter().map(|(_, k)| k).collect()
}

/// Symmetric decreasing rearrangement f*(θ, v) = f♯(|B(0, √(θ² + v²)) ∩ 𝕋×ℝ|).
///
/// The cell of radial rank k receives f♯ at the midpoint of its rank
/// interval [kA, (k+1)A), which is the k-th largest value. The output is
/// therefore exactly equimeasurable with the input and the map is an L¹
/// contraction on the grid.
pub fn star(g: &GriddedDistribution) -> GriddedDistribution {
    let sorted = sorted_desc(g);
    let mut out = vec![0.0; g.values.len()];
    for (rank, cell) in radial_order(g).into_iter().enumerate() {
        out[cell] = sorted[rank];
    }
    GriddedDistribution { values: out, ..g.clone() }
}

/// f^{*φ}(θ, v) = f♯(a_φ(v²/2 + φ(θ))) evaluated at cell centres.
pub fn rearrange_wrt_energy(g: &GriddedDistribution, pot: &PendulumPotential) -> GriddedDistribution {
    let fs = sharp(g);
    let mut out = vec![0.0; g.values.len()];
    for i in 0..g.n_theta {
        let phi = pot.phi(g.theta(i));
        for j in 0..g.n_v {
            let v = g.v(j);
            out[i * g.n_v + j] = fs.eval(pot.a(0.5 * v * v + phi));
        }
    }
    GriddedDistribution { values: out, ..g.clone() }
}

/// ∫₀^∞ |μ_f − μ_g| dt, which equals ‖f♯ − g♯‖_{L¹(ds)} (area between the two staircases).
pub fn equimeasurability_error(f: &GriddedDistribution, g: &GriddedDistribution) -> Result<f64> {
    f.check_grid(g)?;
    let (a, b) = (sorted_desc(f), sorted_desc(g));
    let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).collect();
    Ok(pairwise_sum(&d) * f.cell_area())
}

/// β_{f*, g*}(s) = |{f* ≤ s < g*}| by cell counting.
pub fn beta_overlap(fstar: &GriddedDistribution, gstar: &GriddedDistribution, s: f64) -> Result<f64> {
    fstar.check_grid(gstar)?;
    let n = fstar.values.iter().zip(&gstar.values).filter(|(&f, &g)| f <= s && s < g).count();
    Ok(n as f64 * fstar.cell_area())
}

/// Φ(t) = ∫₀^t μ_{f₀}(s)² ds with the analytic μ_{f₀} = a_{φ₀} ∘ F⁻¹.
///
/// Substituting s = F(E) gives Φ(F(E)) = Ψ(E) = ∫_E^{e_*} a(e)² |F′(e)| de,
/// which is smooth in E. Ψ is tabulated on nodes E_k = F⁻¹(s_k) with s_k
/// geometric and interpolated by cubic Hermite using the exact Ψ′.
#[derive(Debug, Clone)]
pub struct Mu0Squared {
    profile: Profile,
    pot: PendulumPotential,
    /// increasing energies
    nodes: Vec<f64>,
    psi: Vec<f64>,
    dpsi: Vec<f64>,
    /// Φ at and above max f₀
    total: f64,
    /// F at the last node; below it Φ is extended linearly to 0
    s_floor: f64,
}

const MU0_NODES: usize = 2400;
const MU0_DECADES: f64 = 40.0;
const MU0_TOL: Tol = Tol::new(1e-300, 1e-12);

impl Mu0Squared {
    pub fn new(ss: &SteadyState) -> Result<Self> {
        let profile = *ss.profile();
        let pot = ss.potential();
        let m0 = ss.m0();
        let e_lo = -m0;
        let s_top = profile.f(e_lo);
        let integrand = |e: f64| {
            let a = pot.a(e);
            a * a * profile.f_prime(e).abs()
        };
        // nodes from F⁻¹ of a geometric ladder, plus the separatrix and support edge
        let mut nodes = vec![e_lo];
        let ratio = 10f64.powf(-MU0_DECADES / MU0_NODES as f64);
        let mut s = s_top;
        for _ in 0..MU0_NODES {
            s *= ratio;
            if let Ok(e) = profile.f_inv(s) {
                if e > e_lo && e.is_finite() {
                    nodes.push(e);
                }
            }
        }
        let e_star = profile.e_star();
        if m0 < e_star {
            nodes.push(m0);
        }
        if e_star.is_finite() {
            nodes.push(e_star);
        }
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let last = *nodes.last().expect("at least one node");
        let q = |r: crate::quad::QResult, what: &str| {
            r.map(|e| e.value).map_err(|b| HmfError::Integration {
                what: what.to_string(),
                value: b.value,
                error: b.error,
            })
        };
        let tail = if e_star.is_finite() {
            0.0
        } else {
            q(integrate_to_infinity(integrand, last, &[last + 1.0], MU0_TOL), "mu0^2 tail")?
        };
        let mut psi = vec![0.0; nodes.len()];
        psi[nodes.len() - 1] = tail;
        for k in (0..nodes.len() - 1).rev() {
            let piece = q(integrate(integrand, nodes[k], nodes[k + 1], MU0_TOL), "mu0^2 table")?;
            psi[k] = psi[k + 1] + piece;
        }
        let dpsi = nodes.iter().map(|&e| -integrand(e)).collect();
        Ok(Mu0Squared { profile, pot, total: psi[0], s_floor: profile.f(last), nodes, psi, dpsi })
    }

    /// Ψ(E) = ∫_E^{e_*} a(e)²|F′(e)| de.
    fn psi_at(&self, e: f64) -> f64 {
        let n = self.nodes.len();
        if e <= self.nodes[0] {
            return self.total;
        }
        if e >= self.nodes[n - 1] {
            return self.psi[n - 1];
        }
        let k = self.nodes.partition_point(|&x| x <= e) - 1;
        let (x0, x1) = (self.nodes[k], self.nodes[k + 1]);
        let h = x1 - x0;
        let t = (e - x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.psi[k]
            + (t3 - 2.0 * t2 + t) * h * self.dpsi[k]
            + (-2.0 * t3 + 3.0 * t2) * self.psi[k + 1]
            + (t3 - t2) * h * self.dpsi[k + 1]
    }

    /// Φ(t) = ∫₀^t μ_{f₀}² ds.
    pub fn phi(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t < self.s_floor {
            return self.psi[self.nodes.len() - 1] * t / self.s_floor;
        }
        match self.profile.f_inv(t) {
            Ok(e) => self.psi_at(e),
            Err(_) => self.total,
        }
    }

    /// μ_{f₀}(t).
    pub fn mu0(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.pot.a(self.profile.e_star());
        }
        match self.profile.f_inv(t) {
            Ok(e) => self.pot.a(e),
            Err(_) => 0.0,
        }
    }
}

/// The deficits measuring how far f* is from f₀*.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Deficits {
    /// ∫ s² (f₀♯ − f♯)₊ ds
    pub d1: f64,
    /// ∫ μ_{f₀}(s)² β_{f*, f₀*}(s) ds
    pub d2: f64,
    /// ‖f* − f₀*‖₁
    pub d3: f64,
}

/// Deficits of `f` against the gridded reference `f0`, with μ_{f₀} taken analytically.
///
/// Both grids share cell area A, so f♯ and f₀♯ share their breakpoints and
/// D1 is exact on each step. β counts cells with f*(c) ≤ s < f₀*(c), hence
/// D2 = A·Σ_c [Φ(f₀*(c)) − Φ(f*(c))]₊ and ∫β ds = A·Σ_c (f₀* − f*)₊ exactly.
pub fn deficit_integrals(f: &GriddedDistribution, f0: &GriddedDistribution, mu0: &Mu0Squared) -> Result<Deficits> {
    f.check_grid(f0)?;
    let a = f.cell_area();
    let fs = sorted_desc(f);
    let f0s = sorted_desc(f0);
    let mut t1 = Vec::with_capacity(fs.len());
    let mut t3 = Vec::with_capacity(fs.len());
    for (k, (&x, &y)) in fs.iter().zip(&f0s).enumerate() {
        let d = y - x;
        if d > 0.0 {
            let (lo, hi) = (k as f64, k as f64 + 1.0);
            t1.push(d * (hi * hi * hi - lo * lo * lo) / 3.0);
        }
        t3.push(d.abs());
    }
    // f* and f₀* place the k-th largest values on the same cell, so the
    // pairing by rank is the pairing by cell
    let mut t2 = Vec::new();
    for (&x, &y) in fs.iter().zip(&f0s) {
        if y > x {
            t2.push(mu0.phi(y) - mu0.phi(x));
        }
    }
    Ok(Deficits {
        d1: pairwise_sum(&t1) * a * a * a,
        d2: pairwise_sum(&t2) * a,
        d3: pairwise_sum(&t3) * a,
    })
}

/// ∬_{e < E} e dθ dv for e = v²/2 + φ(θ), by a θ-quadrature of the
/// v-integral V³/3 + 2φV with V = √(2(E − φ)).
fn energy_below(pot: &PendulumPotential, big_e: f64) -> Result<f64> {
    let m = pot.m();
    if m == 0.0 {
        return Ok(if big_e > 0.0 { TAU * (2.0 * big_e).powf(1.5) / 3.0 } else { 0.0 });
    }
    if big_e <= -m {
        return Ok(0.0);
    }
    // even in θ − θ₀; the level set closes at arccos(−E/m) inside the well
    let edge = if big_e >= m { PI } else { (-big_e / m).acos() };
    let g = |u: f64| {
        let phi = -m * u.cos();
        let d = big_e - phi;
        if d <= 0.0 {
            return 0.0;
        }
        let vv = (2.0 * d).sqrt();
        vv * vv * vv / 3.0 + 2.0 * phi * vv
    };
    let r = integrate_pieces(g, &[0.0, edge], Tol::new(1e-14, 1e-13))
        .map_err(|b| HmfError::Integration { what: "energy moment".into(), value: b.value, error: b.error })?;
    Ok(2.0 * r.value)
}

/// ∬ (v²/2 + φ) f^{*φ} dθ dv for the continuum rearrangement of a step profile,
/// summed level set by level set in phase space.
pub fn energy_moment_phase_space(fs: &MonotoneProfile, pot: &PendulumPotential) -> Result<f64> {
    let mut terms = Vec::with_capacity(fs.values.len());
    let mut lo = energy_below(pot, pot.a_inv(fs.edges[0])?)?;
    for (k, &v) in fs.values.iter().enumerate() {
        let hi = energy_below(pot, pot.a_inv(fs.edges[k + 1])?)?;
        terms.push(v * (hi - lo));
        lo = hi;
    }
    Ok(pairwise_sum(&terms))
}

/// ∫ f♯(s) a_φ⁻¹(s) ds with 3-point Gauss–Legendre on each step; the step
/// holding the separatrix area 16√m, where a_φ⁻¹ is not smooth, is adaptive.
pub fn energy_moment_sharp(fs: &MonotoneProfile, pot: &PendulumPotential) -> Result<f64> {
    const X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let s_sep = 16.0 * pot.m().sqrt();
    let mut terms = Vec::with_capacity(fs.values.len());
    for (k, &v) in fs.values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let (a, b) = (fs.edges[k], fs.edges[k + 1]);
        if pot.m() > 0.0 && a <= s_sep && s_sep <= b {
            let mut fail = None;
            let r = integrate_pieces(
                |s| {
                    pot.a_inv(s).unwrap_or_else(|e| {
                        fail.get_or_insert(e);
                        0.0
                    })
                },
                &crate::quad::breakpoints(a, b, &[s_sep]),
                Tol::new(1e-14, 1e-12),
            )
            .map_err(|e| HmfError::Integration { what: "sharp energy moment".into(), value: e.value, error: e.error })?;
            if let Some(e) = fail {
                return Err(e);
            }
            terms.push(v * r.value);
            continue;
        }
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = 0.0;
        for (x, w) in X.iter().zip(W) {
            acc += w * pot.a_inv(c + h * x)?;
        }
        terms.push(v * acc * h);
    }
    Ok(pairwise_sum(&terms))
}
