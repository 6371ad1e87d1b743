//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Segments are refined largest-error first. The final sum runs over the
//! segments in left-endpoint order, so the result depends only on the
//! integrand and the tolerance, never on heap internals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tol {
    pub abs: f64,
    pub rel: f64,
    pub max_segments: usize,
}

impl Tol {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tol { abs, rel, max_segments: 4000 }
    }

    pub const fn with_segments(self, max_segments: usize) -> Self {
        Tol { max_segments, ..self }
    }
}

impl Default for Tol {
    fn default() -> Self {
        Tol::new(1e-14, 1e-11)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub segments: usize,
}

/// Returned when the segment budget runs out; carries the partial estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub value: f64,
    pub error: f64,
}

pub type QResult = Result<Estimate, Budget>;

#[derive(Clone, Copy)]
struct Seg {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
    mag: f64,
}

impl PartialEq for Seg {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Seg {}
impl PartialOrd for Seg {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Seg {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err).then(o.a.total_cmp(&self.a))
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    let mut rabs = rk.abs();
    let mut fv = [0.0f64; 14];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        rk += WGK[j] * (f1 + f2);
        rabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            rg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * rk;
    let mut rasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        rasc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let val = rk * h;
    let rasc = rasc * h.abs();
    let rabs = rabs * h.abs();
    let mut err = ((rk - rg) * h).abs();
    if rasc != 0.0 && err != 0.0 {
        err = rasc * (200.0 * err / rasc).powf(1.5).min(1.0);
    }
    if rabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * rabs);
    }
    if !val.is_finite() {
        err = f64::INFINITY;
    }
    (val, err, rabs)
}

fn pairwise(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise(&xs[..mid]) + pairwise(&xs[mid..])
}

/// Integrates `f` over the pieces delimited by `points` (sorted, at least two).
/// Breakpoints are never evaluated, so integrable endpoint singularities are
/// allowed there.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], tol: Tol) -> QResult {
    debug_assert!(points.len() >= 2);
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Seg> = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (val, err, mag) = gk15(&mut f, a, b);
        heap.push(Seg { a, b, val, err, mag });
    }
    if heap.is_empty() {
        return Ok(Estimate { value: 0.0, error: 0.0, segments: 0 });
    }
    loop {
        let (total, err, mag) = heap
            .iter()
            .chain(done.iter())
            .fold((0.0, 0.0, 0.0), |(v, e, m), s| (v + s.val, e + s.err, m + s.mag));
        // cancellation can make the relative target unreachable; never ask for
        // more than the rounding floor of the absolute integrand
        let target = tol.abs.max(tol.rel * total.abs()).max(100.0 * f64::EPSILON * mag);
        let n = heap.len() + done.len();
        let finish = |heap: BinaryHeap<Seg>, done: Vec<Seg>| {
            let mut all: Vec<Seg> = heap.into_vec();
            all.extend(done);
            all.sort_by(|x, y| x.a.total_cmp(&y.a));
            let vals: Vec<f64> = all.iter().map(|s| s.val).collect();
            let errs: Vec<f64> = all.iter().map(|s| s.err).collect();
            (pairwise(&vals), pairwise(&errs))
        };
        if err <= target {
            let (value, error) = finish(heap, done);
            return Ok(Estimate { value, error, segments: n });
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => {
                let (value, error) = finish(heap, done);
                return Err(Budget { value, error });
            }
        };
        if n >= tol.max_segments {
            heap.push(worst);
            let (value, error) = finish(heap, done);
            return Err(Budget { value, error });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let scale = worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE);
        if worst.b - worst.a <= 64.0 * f64::EPSILON * scale || mid <= worst.a || mid >= worst.b {
            // cannot be split further; its error is final
            done.push(worst);
            continue;
        }
        let (v1, e1, m1) = gk15(&mut f, worst.a, mid);
        let (v2, e2, m2) = gk15(&mut f, mid, worst.b);
        heap.push(Seg { a: worst.a, b: mid, val: v1, err: e1, mag: m1 });
        heap.push(Seg { a: mid, b: worst.b, val: v2, err: e2, mag: m2 });
    }
}

pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: Tol) -> QResult {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0, segments: 0 });
    }
    if b < a {
        return integrate(f, b, a, tol)
            .map(|e| Estimate { value: -e.value, ..e })
            .map_err(|e| Budget { value: -e.value, ..e });
    }
    integrate_pieces(f, &[a, b], tol)
}

/// ∫_a^∞ f via x = a + (t/(1−t))².
///
/// The square makes algebraic tails f ~ x^{−q} behave like (1−t)^{2q−3} in t,
/// regular already for q = 3/2, and it reaches x ~ 1e30 before t rounds to 1.
/// Optional finite breakpoints (> a) are mapped into t-space so that kinks
/// and log singularities stay on segment edges.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    breaks: &[f64],
    tol: Tol,
) -> QResult {
    let mut pts = vec![0.0];
    for &x in breaks {
        if x > a && x.is_finite() {
            let d = (x - a).sqrt();
            pts.push(d / (1.0 + d));
        }
    }
    pts.push(1.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    integrate_pieces(
        |t| {
            let s = 1.0 - t;
            let u = t / s;
            let v = f(a + u * u);
            if v == 0.0 {
                0.0
            } else {
                v * 2.0 * u / (s * s)
            }
        },
        &pts,
        tol,
    )
}

/// Sorted, deduplicated breakpoints restricted to `[a, b]` with both ends included.
pub fn breakpoints(a: f64, b: f64, interior: &[f64]) -> Vec<f64> {
    let mut pts = vec![a];
    pts.extend(interior.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}
