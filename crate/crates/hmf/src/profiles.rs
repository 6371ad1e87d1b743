//! Steady-state profile families F(e).
//!
//! Every family is strictly decreasing on (−∞, e_*) (or on (−e₀, ∞) for the
//! noncompact polytrope) and linear in its amplitude `A`.

use crate::error::{HmfError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// A·exp(−βe).
    MaxwellBoltzmann { a: f64, beta: f64 },
    /// A·(e_* − e)₊^{1/(q−1)}, q > 1.
    PolytropeCompact { a: f64, q: f64, e_star: f64 },
    /// A·(e₀ + e)^{1/(q−1)} for e > −e₀, 1/3 < q < 1; infinite for e ≤ −e₀.
    PolytropeNoncompact { a: f64, q: f64, e0: f64 },
    /// A / (1 + B·exp(βe)).
    LyndenBell { a: f64, b: f64, beta: f64 },
}

fn check(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(HmfError::Config(msg.to_string()))
    }
}

fn finite_pos(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl Profile {
    pub fn maxwell_boltzmann(a: f64, beta: f64) -> Result<Self> {
        check(finite_pos(a), "A must be positive")?;
        check(finite_pos(beta), "beta must be positive")?;
        Ok(Profile::MaxwellBoltzmann { a, beta })
    }

    pub fn polytrope_compact(a: f64, q: f64, e_star: f64) -> Result<Self> {
        check(finite_pos(a), "A must be positive")?;
        check(q.is_finite() && q > 1.0, "compact polytrope requires q > 1")?;
        check(e_star.is_finite(), "e_star must be finite")?;
        Ok(Profile::PolytropeCompact { a, q, e_star })
    }

    pub fn polytrope_noncompact(a: f64, q: f64, e0: f64) -> Result<Self> {
        check(finite_pos(a), "A must be positive")?;
        check(q > 1.0 / 3.0 && q < 1.0, "noncompact polytrope requires 1/3 < q < 1")?;
        check(e0.is_finite(), "e0 must be finite")?;
        Ok(Profile::PolytropeNoncompact { a, q, e0 })
    }

    pub fn lynden_bell(a: f64, b: f64, beta: f64) -> Result<Self> {
        check(finite_pos(a), "A must be positive")?;
        check(finite_pos(b), "B must be positive")?;
        check(finite_pos(beta), "beta must be positive")?;
        Ok(Profile::LyndenBell { a, b, beta })
    }

    pub fn family(&self) -> &'static str {
        match self {
            Profile::MaxwellBoltzmann { .. } => "maxwell_boltzmann",
            Profile::PolytropeCompact { .. } => "polytrope_compact",
            Profile::PolytropeNoncompact { .. } => "polytrope_noncompact",
            Profile::LyndenBell { .. } => "lynden_bell",
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            Profile::MaxwellBoltzmann { a, .. }
            | Profile::PolytropeCompact { a, .. }
            | Profile::PolytropeNoncompact { a, .. }
            | Profile::LyndenBell { a, .. } => a,
        }
    }

    /// Same family with amplitude multiplied by `lambda`; F ↦ λF.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        check(finite_pos(lambda), "scale factor must be positive")?;
        Ok(match *self {
            Profile::MaxwellBoltzmann { a, beta } => Profile::MaxwellBoltzmann { a: a * lambda, beta },
            Profile::PolytropeCompact { a, q, e_star } => {
                Profile::PolytropeCompact { a: a * lambda, q, e_star }
            }
            Profile::PolytropeNoncompact { a, q, e0 } => {
                Profile::PolytropeNoncompact { a: a * lambda, q, e0 }
            }
            Profile::LyndenBell { a, b, beta } => Profile::LyndenBell { a: a * lambda, b, beta },
        })
    }

    /// Support bound e_*; +∞ for the noncompact families.
    pub fn e_star(&self) -> f64 {
        match *self {
            Profile::PolytropeCompact { e_star, .. } => e_star,
            _ => f64::INFINITY,
        }
    }

    /// Energy below which F is undefined (−e₀ for the noncompact polytrope).
    pub fn lower_limit(&self) -> f64 {
        match *self {
            Profile::PolytropeNoncompact { e0, .. } => -e0,
            _ => f64::NEG_INFINITY,
        }
    }

    /// sup F = lim_{e→−∞} F(e) (or the limit at −e₀).
    pub fn sup(&self) -> f64 {
        match *self {
            Profile::LyndenBell { a, .. } => a,
            _ => f64::INFINITY,
        }
    }

    pub fn f(&self, e: f64) -> f64 {
        match *self {
            Profile::MaxwellBoltzmann { a, beta } => a * (-beta * e).exp(),
            Profile::PolytropeCompact { a, q, e_star } => {
                if e >= e_star {
                    0.0
                } else {
                    a * (e_star - e).powf(1.0 / (q - 1.0))
                }
            }
            Profile::PolytropeNoncompact { a, q, e0 } => {
                let d = e0 + e;
                if d <= 0.0 {
                    f64::INFINITY
                } else {
                    a * d.powf(1.0 / (q - 1.0))
                }
            }
            Profile::LyndenBell { a, b, beta } => {
                let x = beta * e;
                if x > 700.0 {
                    a / b * (-x).exp()
                } else {
                    a / (1.0 + b * x.exp())
                }
            }
        }
    }

    /// F′(e); 0 at and beyond a finite support bound.
    pub fn f_prime(&self, e: f64) -> f64 {
        match *self {
            Profile::MaxwellBoltzmann { a, beta } => -a * beta * (-beta * e).exp(),
            Profile::PolytropeCompact { a, q, e_star } => {
                if e >= e_star {
                    0.0
                } else {
                    let n = 1.0 / (q - 1.0);
                    -a * n * (e_star - e).powf(n - 1.0)
                }
            }
            Profile::PolytropeNoncompact { a, q, e0 } => {
                let d = e0 + e;
                if d <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let n = 1.0 / (q - 1.0);
                    a * n * d.powf(n - 1.0)
                }
            }
            Profile::LyndenBell { a, b, beta } => {
                let x = beta * e;
                if x > 0.0 {
                    // a b β e^{−x} / (e^{−x} + b)²
                    let w = (-x).exp();
                    -a * b * beta * w / ((w + b) * (w + b))
                } else {
                    let w = b * x.exp();
                    -a * beta * w / ((1.0 + w) * (1.0 + w))
                }
            }
        }
    }

    /// F⁻¹(t) for 0 < t < sup F.
    pub fn f_inv(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < self.sup()) {
            return Err(HmfError::Domain(format!(
                "F^-1 undefined at t = {t} (range is (0, {}))",
                self.sup()
            )));
        }
        Ok(match *self {
            Profile::MaxwellBoltzmann { a, beta } => -(t / a).ln() / beta,
            Profile::PolytropeCompact { a, q, e_star } => e_star - (t / a).powf(q - 1.0),
            Profile::PolytropeNoncompact { a, q, e0 } => (t / a).powf(q - 1.0) - e0,
            Profile::LyndenBell { a, b, beta } => ((a - t) / (t * b)).ln() / beta,
        })
    }
}
