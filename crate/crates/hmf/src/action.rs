//! Phase-area functions of the pendulum Hamiltonian v²/2 − m cos(θ − θ₀).
//!
//! With x = e/m the normalized quantities are
//!
//! ```text
//! α₁(x)  = 4√2 ∫₀^{θ₁} (x + cos θ)^{1/2} dθ        a_φ(e)  = √m α₁(e/m)
//! α₁′(x) = 2√2 ∫₀^{θ₁} (x + cos θ)^{−1/2} dθ       a_φ′(e) = α₁′(e/m)/√m
//! β₁(x)  = 4√2 ∫₀^{θ₁} cos θ (x + cos θ)^{1/2} dθ  b_φ(e)  = √m β₁(e/m)
//! β₁′(x) = 2√2 ∫₀^{θ₁} cos θ (x + cos θ)^{−1/2} dθ b_φ′(e) = β₁′(e/m)/√m
//! ```
//!
//! Trapped levels (−1 < x < 1) use sin(θ/2) = k sin ψ with k² = (1+x)/2;
//! untrapped levels use θ = 2χ and x + cos θ = (x+1)(1 − κ² sin²χ), κ² = 2/(x+1).
//! Both maps remove the turning-point singularity and leave a smooth integrand
//! on [0, π/2], peaked only when the level approaches the separatrix x = 1.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use crate::error::{HmfError, Result};
use crate::quad::{integrate, Tol};
use crate::roots::brent;

/// |x − 1| below this is reported as the separatrix.
pub const SEPARATRIX_BAND: f64 = 1e-10;

const INNER_TOL: Tol = Tol::new(1e-15, 1e-13);

/// α₁′ and b_φ′ outcome: finite, on the separatrix (log divergence) or below the well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slope {
    Finite(f64),
    Separatrix,
    BelowWell,
}

impl Slope {
    /// +∞ on the separatrix, 0 below the well.
    pub fn value(self) -> f64 {
        match self {
            Slope::Finite(v) => v,
            Slope::Separatrix => f64::INFINITY,
            Slope::BelowWell => 0.0,
        }
    }
}

/// Turning angle θ_m(e): cos θ_m = −e/m inside the well.
pub fn theta_m(e: f64, m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(HmfError::Domain(format!("theta_m needs m > 0, got {m}")));
    }
    Ok(if e <= -m {
        0.0
    } else if e >= m {
        PI
    } else {
        (-e / m).acos()
    })
}

/// ∫₀^{θ₁} g(cos θ)(x + cos θ)^{p} dθ for p = ±1/2, x > −1, x ≠ 1 when p < 0.
fn pendulum_integral<G: Fn(f64) -> f64>(x: f64, half_power: bool, g: G) -> f64 {
    if x < 1.0 {
        let k2 = 0.5 * (1.0 + x);
        let kc2 = 0.5 * (1.0 - x);
        let integrand = |psi: f64| {
            let s = psi.sin();
            let c = psi.cos();
            let delta = (kc2 + k2 * c * c).sqrt();
            let cos_theta = 1.0 - 2.0 * k2 * s * s;
            if half_power {
                g(cos_theta) * c * c / delta
            } else {
                g(cos_theta) / delta
            }
        };
        let v = quad(integrand);
        if half_power {
            2.0 * SQRT_2 * k2 * v
        } else {
            SQRT_2 * v
        }
    } else {
        let kap2 = 2.0 / (x + 1.0);
        let kapc2 = (x - 1.0) / (x + 1.0);
        let integrand = |chi: f64| {
            let s = chi.sin();
            let c = chi.cos();
            let delta = (kapc2 + kap2 * c * c).sqrt();
            let cos_theta = 1.0 - 2.0 * s * s;
            if half_power {
                g(cos_theta) * delta
            } else {
                g(cos_theta) / delta
            }
        };
        let v = quad(integrand);
        if half_power {
            2.0 * (x + 1.0).sqrt() * v
        } else {
            2.0 / (x + 1.0).sqrt() * v
        }
    }
}

fn quad<F: FnMut(f64) -> f64>(f: F) -> f64 {
    match integrate(f, 0.0, FRAC_PI_2, INNER_TOL) {
        Ok(r) => r.value,
        Err(b) => b.value,
    }
}

/// α₁(x); zero for x ≤ −1.
pub fn alpha1(x: f64) -> f64 {
    if x <= -1.0 {
        return 0.0;
    }
    4.0 * SQRT_2 * pendulum_integral(x, true, |_| 1.0)
}

/// β₁(x); zero for x ≤ −1.
pub fn beta1(x: f64) -> f64 {
    if x <= -1.0 {
        return 0.0;
    }
    4.0 * SQRT_2 * pendulum_integral(x, true, |c| c)
}

fn slope(x: f64, v: impl FnOnce() -> f64) -> Slope {
    if x < -1.0 {
        Slope::BelowWell
    } else if (x - 1.0).abs() < SEPARATRIX_BAND {
        Slope::Separatrix
    } else if x == -1.0 {
        Slope::Finite(2.0 * PI)
    } else {
        Slope::Finite(v())
    }
}

/// α₁′(x) with separatrix and below-well outcomes made explicit.
pub fn alpha1_prime(x: f64) -> Slope {
    slope(x, || alpha1_prime_raw(x))
}

/// β₁′(x); on the separatrix it diverges to −∞ (reported as `Separatrix`).
pub fn beta1_prime(x: f64) -> Slope {
    if x == -1.0 {
        return Slope::Finite(2.0 * PI);
    }
    slope(x, || beta1_prime_raw(x))
}

/// α₁′ without band checks; callers must keep x > −1 and x ≠ 1.
pub fn alpha1_prime_raw(x: f64) -> f64 {
    if x <= -1.0 {
        return if x == -1.0 { 2.0 * PI } else { 0.0 };
    }
    2.0 * SQRT_2 * pendulum_integral(x, false, |_| 1.0)
}

pub fn beta1_prime_raw(x: f64) -> f64 {
    if x <= -1.0 {
        return if x == -1.0 { 2.0 * PI } else { 0.0 };
    }
    2.0 * SQRT_2 * pendulum_integral(x, false, |c| c)
}

/// w₁(x) = 2√2 ∫₀^{θ₁} (cos θ − r)² (x + cos θ)^{−1/2} dθ with r = β₁′/α₁′.
///
/// This is the variance-type weight of the stability functional; it stays
/// finite on the separatrix, where it equals 32/3. Also returns r.
pub fn w1(x: f64) -> (f64, f64) {
    if x <= -1.0 {
        return (0.0, 1.0);
    }
    if x == 1.0 {
        return (32.0 / 3.0, -1.0);
    }
    let ap = alpha1_prime_raw(x);
    let bp = beta1_prime_raw(x);
    let r = bp / ap;
    let w = 2.0 * SQRT_2 * pendulum_integral(x, false, |c| (c - r) * (c - r));
    (w, r)
}

/// α₁⁻¹(s) for s ≥ 0, bracketed by the envelope bounds and solved by Brent.
pub fn alpha1_inv(s: f64) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(HmfError::Domain(format!("alpha1_inv needs s >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(-1.0);
    }
    if s == 16.0 {
        return Ok(1.0);
    }
    let q = s * s / (32.0 * PI * PI);
    let mut lo = (q - 1.0).max(-1.0);
    let mut hi = q + 1.0;
    if s < 16.0 {
        // convexity on (−1, 1): α₁(x) ≥ 2π(x + 1)
        hi = hi.min(s / (2.0 * PI) - 1.0).min(1.0);
    } else {
        lo = lo.max(1.0);
    }
    let f = |x: f64| alpha1(x) - s;
    let (mut flo, mut fhi) = (f(lo), f(hi));
    // the bounds are sharp at the ends of their ranges; widen against rounding
    let mut widen = 1e-12;
    while flo > 0.0 && lo > -1.0 {
        lo = (lo - widen * (1.0 + lo.abs())).max(-1.0);
        flo = f(lo);
        widen *= 10.0;
    }
    widen = 1e-12;
    while fhi < 0.0 {
        hi += widen * (1.0 + hi.abs());
        fhi = f(hi);
        widen *= 10.0;
    }
    let xtol = 1e-15 * (1.0 + lo.abs().max(hi.abs()));
    brent(f, lo, hi, flo, fhi, xtol)
        .map_err(|e| HmfError::Domain(format!("alpha1_inv({s}) failed: {e:?}")))
}

/// φ(θ) = −m cos(θ − θ₀).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumPotential {
    m: f64,
    theta0: f64,
}

impl PendulumPotential {
    pub fn new(m: f64, theta0: f64) -> Result<Self> {
        if !(m >= 0.0 && m.is_finite()) {
            return Err(HmfError::Domain(format!("magnetization must be >= 0, got {m}")));
        }
        if !theta0.is_finite() {
            return Err(HmfError::Domain("theta0 must be finite".into()));
        }
        Ok(PendulumPotential { m, theta0: theta0.rem_euclid(2.0 * PI) })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn phi(&self, theta: f64) -> f64 {
        -self.m * (theta - self.theta0).cos()
    }

    /// a_φ(e) = |{v²/2 + φ < e}|.
    pub fn a(&self, e: f64) -> f64 {
        if self.m == 0.0 {
            return if e > 0.0 { 4.0 * PI * (2.0 * e).sqrt() } else { 0.0 };
        }
        self.m.sqrt() * alpha1(e / self.m)
    }

    /// a_φ′(e); +∞ on the separatrix band.
    pub fn a_prime(&self, e: f64) -> f64 {
        if self.m == 0.0 {
            return if e > 0.0 { 2.0 * PI * SQRT_2 / e.sqrt() } else { 0.0 };
        }
        alpha1_prime(e / self.m).value() / self.m.sqrt()
    }

    /// a_φ′ for quadrature nodes, which never sit exactly on the separatrix:
    /// no band check, finite (if large) arbitrarily close to it.
    pub fn a_prime_interior(&self, e: f64) -> f64 {
        if self.m == 0.0 {
            return if e > 0.0 { 2.0 * PI * SQRT_2 / e.sqrt() } else { 0.0 };
        }
        alpha1_prime_raw(e / self.m) / self.m.sqrt()
    }

    /// b_φ′ counterpart of [`Self::a_prime_interior`].
    pub fn b_prime_interior(&self, e: f64) -> f64 {
        if self.m == 0.0 {
            return 0.0;
        }
        beta1_prime_raw(e / self.m) / self.m.sqrt()
    }

    pub fn a_inv(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(HmfError::Domain(format!("a_phi_inv needs s >= 0, got {s}")));
        }
        if self.m == 0.0 {
            return Ok(s * s / (32.0 * PI * PI));
        }
        Ok(self.m * alpha1_inv(s / self.m.sqrt())?)
    }

    /// b_φ(e) = 4√2 ∫₀^{θ_m} cos θ (e + m cos θ)^{1/2} dθ; identically zero when m = 0.
    pub fn b(&self, e: f64) -> f64 {
        if self.m == 0.0 {
            return 0.0;
        }
        self.m.sqrt() * beta1(e / self.m)
    }

    pub fn b_prime(&self, e: f64) -> Slope {
        if self.m == 0.0 {
            return Slope::Finite(0.0);
        }
        match beta1_prime(e / self.m) {
            Slope::Finite(v) => Slope::Finite(v / self.m.sqrt()),
            other => other,
        }
    }

    /// W_m(e) = w₁(e/m)/√m; the m = 0 limit is the θ-average of cos², i.e. a_φ′/2.
    pub fn w(&self, e: f64) -> f64 {
        if self.m == 0.0 {
            return 0.5 * self.a_prime(e);
        }
        w1(e / self.m).0 / self.m.sqrt()
    }
}
