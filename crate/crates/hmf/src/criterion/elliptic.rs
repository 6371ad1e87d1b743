//! Complete elliptic integrals K(k), E(k) in the modulus convention, by AGM.

use std::f64::consts::FRAC_PI_2;

use crate::error::{HmfError, Result};

/// (K, E) from the complementary modulus k′ = √(1 − k²) ∈ (0, 1].
///
/// Passing k′ directly keeps full relative accuracy as k → 1, where
/// 1 − k² would cancel.
pub fn ke_complementary(kc: f64) -> (f64, f64) {
    debug_assert!(kc > 0.0 && kc <= 1.0);
    let k2 = (1.0 - kc) * (1.0 + kc);
    let mut a = 1.0;
    let mut b = kc;
    let mut sum = 0.5 * k2;
    let mut pow = 0.5;
    for _ in 0..64 {
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
        if c.abs() <= 1e-17 * a {
            break;
        }
    }
    let k = FRAC_PI_2 / a;
    (k, k * (1.0 - sum))
}

/// K(k) for 0 ≤ k < 1.
pub fn elliptic_k(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(HmfError::Domain(format!("K(k) needs 0 <= k < 1, got {k}")));
    }
    Ok(ke_complementary(((1.0 - k) * (1.0 + k)).sqrt()).0)
}

/// E(k) for 0 ≤ k ≤ 1.
pub fn elliptic_e(k: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&k) {
        return Err(HmfError::Domain(format!("E(k) needs 0 <= k <= 1, got {k}")));
    }
    if k == 1.0 {
        return Ok(1.0);
    }
    Ok(ke_complementary(((1.0 - k) * (1.0 + k)).sqrt()).1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_modulus() {
        assert_eq!(elliptic_k(0.0).unwrap(), FRAC_PI_2);
        assert_eq!(elliptic_e(0.0).unwrap(), FRAC_PI_2);
        assert_eq!(elliptic_e(1.0).unwrap(), 1.0);
        assert!(elliptic_k(1.0).is_err());
        assert!(elliptic_e(1.5).is_err());
        assert!(elliptic_k(-0.1).is_err());
    }

    #[test]
    fn legendre_relation() {
        for &k in &[0.3, 0.01, 0.5, 0.9, 0.999_999] {
            let kp = ((1.0f64 - k) * (1.0 + k)).sqrt();
            let (kk, ek) = ke_complementary(kp);
            let (kkp, ekp) = ke_complementary(k);
            let lhs = ek * kkp + ekp * kk - kk * kkp;
            assert!((lhs - FRAC_PI_2).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn log_growth_near_one() {
        // K ≈ ln(4/k′) as k′ → 0
        let kc = 1e-8;
        let (k, e) = ke_complementary(kc);
        assert!((k - (4.0 / kc).ln()).abs() < 1e-12);
        assert!((e - 1.0).abs() < 1e-12);
    }
}
