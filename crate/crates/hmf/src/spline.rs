//! Uniform cubic B-spline interpolation.
//!
//! Coefficients come from the exact recursive prefilter (pole z = √3 − 2).
//! Two boundary models: periodic, and zero extension (the data continues as
//! zeros on the infinite lattice, which is what "f = 0 outside" means for the
//! velocity direction).

const Z: f64 = -0.267_949_192_431_122_7; // √3 − 2

#[inline]
fn weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    let u = 1.0 - t;
    [
        u * u * u / 6.0,
        (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0,
        (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0,
        t3 / 6.0,
    ]
}

/// Periodic prefilter: `c` satisfies (c[i−1] + 4c[i] + c[i+1])/6 = f[i] cyclically.
pub fn periodic_coeffs(f: &[f64], c: &mut [f64]) {
    let n = f.len();
    assert_eq!(c.len(), n);
    if n == 0 {
        return;
    }
    let horizon = n.min(48);
    let zn = Z.powi(n as i32);
    let mut acc = 0.0;
    let mut zk = 1.0;
    for k in 0..horizon {
        acc += zk * f[(n - k) % n];
        zk *= Z;
    }
    c[0] = acc / (1.0 - zn);
    for i in 1..n {
        c[i] = f[i] + Z * c[i - 1];
    }
    let mut acc = 0.0;
    let mut zk = 1.0;
    for k in 0..horizon {
        acc += zk * c[(n - 1 + k) % n];
        zk *= Z;
    }
    c[n - 1] = -Z / (1.0 - zn) * acc;
    for i in (0..n - 1).rev() {
        c[i] = Z * (c[i + 1] - c[i]);
    }
    for v in c.iter_mut() {
        *v *= 6.0;
    }
}

/// Zero-extension prefilter. `c` has length n + 4; `c[j + 2]` is the
/// coefficient of lattice point j for j ∈ [−2, n + 1].
pub fn zero_coeffs(f: &[f64], c: &mut [f64]) {
    let n = f.len();
    assert_eq!(c.len(), n + 4);
    if n == 0 {
        c.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let cp = &mut c[2..n + 2];
    cp[0] = f[0];
    for i in 1..n {
        cp[i] = f[i] + Z * cp[i - 1];
    }
    let last_causal = cp[n - 1];
    cp[n - 1] = -Z * last_causal / (1.0 - Z * Z);
    for i in (0..n - 1).rev() {
        cp[i] = Z * (cp[i + 1] - cp[i]);
    }
    let first = cp[0];
    c[1] = Z * first;
    c[0] = Z * Z * first;
    c[n + 2] = -Z * Z * last_causal / (1.0 - Z * Z);
    c[n + 3] = Z * c[n + 2];
    for v in c.iter_mut() {
        *v *= 6.0;
    }
}

/// out[i] = s(i − shift) for the periodic spline s through `f`.
/// `shift` is in grid cells and may be any real number.
pub fn shift_periodic(f: &[f64], shift: f64, out: &mut [f64], scratch: &mut [f64]) {
    let n = f.len();
    periodic_coeffs(f, scratch);
    let x0 = -shift;
    let fl = x0.floor();
    let w = weights(x0 - fl);
    let base = (fl as i64).rem_euclid(n as i64) as usize;
    for (i, o) in out.iter_mut().enumerate() {
        let j = base + i + n; // keep indices positive for j − 1
        *o = w[0] * scratch[(j - 1) % n]
            + w[1] * scratch[j % n]
            + w[2] * scratch[(j + 1) % n]
            + w[3] * scratch[(j + 2) % n];
    }
}

/// out[i] = s(i − shift) for the zero-extended spline; feet outside
/// [−1, n] (one cell beyond the data) read zero.
pub fn shift_zero(f: &[f64], shift: f64, out: &mut [f64], scratch: &mut [f64]) {
    let n = f.len() as i64;
    zero_coeffs(f, scratch);
    let x0 = -shift;
    let fl = x0.floor();
    let w = weights(x0 - fl);
    let base = fl as i64;
    let coef = |j: i64| -> f64 {
        if (-2..n + 2).contains(&j) {
            scratch[(j + 2) as usize]
        } else {
            0.0
        }
    };
    let t = x0 - fl;
    for (i, o) in out.iter_mut().enumerate() {
        let j = base + i as i64;
        *o = if j < -1 || j > n || (j == n && t > 0.0) {
            0.0
        } else {
            w[0] * coef(j - 1) + w[1] * coef(j) + w[2] * coef(j + 1) + w[3] * coef(j + 2)
        };
    }
}

/// Periodic spline through samples at x_i = origin + i·h.
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    coeffs: Vec<f64>,
    origin: f64,
    h: f64,
}

impl PeriodicSpline {
    pub fn new(samples: &[f64], origin: f64, period: f64) -> Self {
        let mut coeffs = vec![0.0; samples.len()];
        periodic_coeffs(samples, &mut coeffs);
        PeriodicSpline { h: period / samples.len() as f64, coeffs, origin }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.coeffs.len() as i64;
        let u = (x - self.origin) / self.h;
        let fl = u.floor();
        let w = weights(u - fl);
        let j = (fl as i64).rem_euclid(n);
        let c = |k: i64| self.coeffs[(j + k).rem_euclid(n) as usize];
        w[0] * c(-1) + w[1] * c(0) + w[2] * c(1) + w[3] * c(2)
    }
}

/// Evaluates the zero-extended spline with coefficients from [`zero_coeffs`]
/// at fractional index `x`; zero outside [−1, n].
pub fn eval_zero(coeffs: &[f64], x: f64) -> f64 {
    let n = coeffs.len() as i64 - 4;
    if !(x >= -1.0 && x <= n as f64) {
        return 0.0;
    }
    let fl = x.floor();
    let w = weights(x - fl);
    let j = fl as i64;
    let coef = |k: i64| -> f64 {
        if (-2..n + 2).contains(&k) {
            coeffs[(k + 2) as usize]
        } else {
            0.0
        }
    };
    w[0] * coef(j - 1) + w[1] * coef(j) + w[2] * coef(j + 1) + w[3] * coef(j + 2)
}

/// Tensor-product spline on a cell-centred (θ, v) grid: periodic in θ,
/// zero-extended in v. `values` is row-major with one row per θ index.
#[derive(Debug, Clone)]
pub struct GridSpline {
    n_theta: usize,
    n_v: usize,
    v_max: f64,
    /// n_θ rows of n_v + 4 zero-extension coefficients.
    coeffs: Vec<f64>,
}

impl GridSpline {
    pub fn new(n_theta: usize, n_v: usize, v_max: f64, values: &[f64]) -> Self {
        assert_eq!(values.len(), n_theta * n_v);
        let mut by_theta = vec![0.0; n_theta * n_v];
        let mut col = vec![0.0; n_theta];
        let mut c = vec![0.0; n_theta];
        for j in 0..n_v {
            for i in 0..n_theta {
                col[i] = values[i * n_v + j];
            }
            periodic_coeffs(&col, &mut c);
            for i in 0..n_theta {
                by_theta[i * n_v + j] = c[i];
            }
        }
        let w = n_v + 4;
        let mut coeffs = vec![0.0; n_theta * w];
        for i in 0..n_theta {
            zero_coeffs(&by_theta[i * n_v..(i + 1) * n_v], &mut coeffs[i * w..(i + 1) * w]);
        }
        GridSpline { n_theta, n_v, v_max, coeffs }
    }

    pub fn eval(&self, theta: f64, v: f64) -> f64 {
        let dth = std::f64::consts::TAU / self.n_theta as f64;
        let dv = 2.0 * self.v_max / self.n_v as f64;
        let y = (v + self.v_max) / dv - 0.5;
        if !(y >= -1.0 && y <= self.n_v as f64) {
            return 0.0;
        }
        let x = theta / dth - 0.5;
        let xf = x.floor();
        let wx = weights(x - xf);
        let n = self.n_theta as i64;
        let w = self.n_v + 4;
        let mut acc = 0.0;
        for (k, wk) in wx.iter().enumerate() {
            let i = (xf as i64 + k as i64 - 1).rem_euclid(n) as usize;
            acc += wk * eval_zero(&self.coeffs[i * w..(i + 1) * w], y);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(n: usize) -> Vec<f64> {
        (0..n).map(|i| ((i * 7919) % 13) as f64 * 0.1 + (i as f64).sin()).collect()
    }

    #[test]
    fn periodic_interpolates_nodes() {
        let f = samples(37);
        let mut c = vec![0.0; 37];
        periodic_coeffs(&f, &mut c);
        for i in 0..37 {
            let v = (c[(i + 36) % 37] + 4.0 * c[i] + c[(i + 1) % 37]) / 6.0;
            assert!((v - f[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_extension_interpolates_nodes_and_zeros() {
        let f = samples(21);
        let mut c = vec![0.0; 25];
        zero_coeffs(&f, &mut c);
        for i in -3i64..24 {
            let want = if (0..21).contains(&i) { f[i as usize] } else { 0.0 };
            assert!((eval_zero(&c, i as f64) - want).abs() < 1e-12, "node {i}");
        }
    }

    #[test]
    fn integer_shift_is_exact_and_mass_preserving() {
        let f = samples(40);
        let mut out = vec![0.0; 40];
        let mut scr = vec![0.0; 40];
        shift_periodic(&f, 3.0, &mut out, &mut scr);
        for i in 0..40 {
            assert!((out[i] - f[(i + 37) % 40]).abs() < 1e-12);
        }
        shift_periodic(&f, 0.37, &mut out, &mut scr);
        let (a, b): (f64, f64) = (f.iter().sum(), out.iter().sum());
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn smooth_function_is_accurate() {
        let n = 128;
        let h = std::f64::consts::TAU / n as f64;
        let f: Vec<f64> = (0..n).map(|i| (i as f64 * h).cos().exp()).collect();
        let s = PeriodicSpline::new(&f, 0.0, std::f64::consts::TAU);
        for k in 0..50 {
            let x = 0.1 + k as f64 * 0.123;
            assert!((s.eval(x) - x.cos().exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn grid_spline_reproduces_nodes() {
        let (nt, nv, vm) = (24, 17, 3.0);
        let vals: Vec<f64> = (0..nt * nv).map(|k| ((k * 31) % 11) as f64).collect();
        let g = GridSpline::new(nt, nv, vm, &vals);
        let dth = std::f64::consts::TAU / nt as f64;
        let dv = 2.0 * vm / nv as f64;
        for i in 0..nt {
            for j in 0..nv {
                let th = (i as f64 + 0.5) * dth;
                let v = -vm + (j as f64 + 0.5) * dv;
                assert!((g.eval(th, v) - vals[i * nv + j]).abs() < 1e-11);
                assert!((g.eval(th + std::f64::consts::TAU, v) - vals[i * nv + j]).abs() < 1e-10);
            }
        }
        assert_eq!(g.eval(0.3, 10.0), 0.0);
    }
}
