//! Quadrature rules: Gauss–Hermite for Gaussian expectations and a
//! double-exponential (tanh-sinh) rule for integrands with algebraic
//! endpoint singularities.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

/// Gauss–Hermite rule normalised to the standard Gaussian measure:
/// `sum_i weights[i] * f(nodes[i]) ~ E[f(X)]`, `X ~ N(0, 1)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Rule with `n` nodes; rules are cached per size.
    pub fn new(n: usize) -> Arc<GaussHermite> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("quadrature cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(Self::compute(n)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn expect(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    // Golub-Welsch eigenvalues as starting points, polished by Newton steps on
    // the orthonormal physicists' Hermite functions.
    fn compute(n: usize) -> GaussHermite {
        assert!(n >= 1);
        let pim4 = PI.powf(-0.25);
        let mut diag = vec![0.0; n];
        let mut off: Vec<f64> = (1..=n).map(|k| if k < n { (k as f64 / 2.0).sqrt() } else { 0.0 }).collect();
        tridiagonal_eigenvalues(&mut diag, &mut off);
        diag.sort_by(f64::total_cmp);
        let nf = n as f64;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for &start in &diag {
            let mut z = start;
            let mut pp = 1.0;
            let mut damp = 1.0;
            for _ in 0..8 {
                damp = (-0.5 * z * z).exp();
                let mut p1 = pim4 * damp;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                if pp == 0.0 {
                    break;
                }
                let step = p1 / pp;
                z -= step;
                if step.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            let w = if pp == 0.0 { 0.0 } else { 2.0 * (damp / pp) * (damp / pp) };
            nodes.push(z * std::f64::consts::SQRT_2);
            weights.push(w / PI.sqrt());
        }
        GaussHermite { nodes, weights }
    }
}

// Implicit QL on a symmetric tridiagonal matrix; `off[i]` couples rows i and
// i + 1. Eigenvalues are left in `diag`.
fn tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) {
    let n = diag.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 100, "tridiagonal QL failed to converge");
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
}

/// Tanh-sinh rule on `(0, len)`.
///
/// The integrand receives `(s, len - s)`, both computed without cancellation,
/// so singular factors such as `s^{-D}` or `(len - s)^{-D}` stay accurate
/// arbitrarily close to either endpoint. `level` sets the step `h = 2^-level`.
pub fn tanh_sinh(len: f64, level: u32, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    let h = 0.5_f64.powi(level as i32);
    let half = 0.5 * len;
    // t = 0 term: midpoint, weight pi/2
    let mut sum = FRAC_PI_2 * f(half, half);
    let mut k = 1usize;
    loop {
        let t = k as f64 * h;
        let u = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u).exp();
        // distance from the nearer endpoint: len / (1 + e^{2u})
        let dist = len * e / (1.0 + e);
        let cosh_u = u.cosh();
        let weight = FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
        if dist <= f64::MIN_POSITIVE * 1e3 || weight < 1e-300 || t > 6.5 {
            break;
        }
        let far = len - dist;
        sum += weight * (f(dist, far) + f(far, dist));
        k += 1;
    }
    sum * h * half
}

/// Tanh-sinh nodes on `(0, 1)` as `(x, 1 - x, weight)`, dropping nodes closer
/// than `1e-150` to an endpoint.
pub fn tanh_sinh_nodes(level: u32) -> Vec<(f64, f64, f64)> {
    let h = 0.5_f64.powi(level as i32);
    let mut nodes = vec![(0.5, 0.5, 0.5 * h * FRAC_PI_2)];
    let mut k = 1usize;
    loop {
        let t = k as f64 * h;
        let u = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u).exp();
        let dist = e / (1.0 + e);
        let cosh_u = u.cosh();
        let weight = 0.5 * h * FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
        if dist < 1e-150 {
            break;
        }
        let far = 1.0 / (1.0 + e);
        nodes.push((dist, far, weight));
        nodes.push((far, dist, weight));
        k += 1;
    }
    nodes
}

/// Tanh-sinh with level doubling until two successive levels agree to `tol`
/// (absolute). Returns the estimate and the last difference.
pub fn tanh_sinh_adaptive(
    len: f64,
    tol: f64,
    max_level: u32,
    mut f: impl FnMut(f64, f64) -> f64,
) -> (f64, f64) {
    let mut prev = tanh_sinh(len, 2, &mut f);
    let mut diff = f64::INFINITY;
    for level in 3..=max_level {
        let cur = tanh_sinh(len, level, &mut f);
        diff = (cur - prev).abs();
        prev = cur;
        if diff < tol {
            break;
        }
    }
    (prev, diff)
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_KRONROD: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes
const GK_GAUSS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 7/15-point Gauss-Kronrod pair on `[a, b]` for a vector integrand.
fn gauss_kronrod(a: f64, b: f64, f: &mut impl FnMut(f64) -> Vec<f64>) -> (Vec<f64>, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kron: Vec<f64> = Vec::new();
    let mut gauss: Vec<f64> = Vec::new();
    let add = |acc: &mut Vec<f64>, v: &[f64], w: f64| {
        if acc.is_empty() {
            acc.resize(v.len(), 0.0);
        }
        for (s, x) in acc.iter_mut().zip(v) {
            *s += w * x;
        }
    };
    for (k, &node) in GK_NODES.iter().enumerate() {
        let points: &[f64] = if node == 0.0 { &[0.0] } else { &[-node, node] };
        for &t in points {
            let v = f(mid + half * t);
            add(&mut kron, &v, GK_KRONROD[k]);
            if k % 2 == 1 {
                add(&mut gauss, &v, GK_GAUSS[k / 2]);
            }
        }
    }
    let err = kron.iter().zip(&gauss).map(|(k, g)| (k - g).abs()).fold(0.0, f64::max) * half;
    (kron.into_iter().map(|v| v * half).collect(), err)
}

/// Adaptive Gauss-Kronrod for a vector-valued integrand on `[a, b]`.
///
/// Subintervals are bisected until each one's error estimate is below its
/// share `tol * len / (b - a)`, or `max_depth` bisections deep. Returns the
/// integral and the summed error estimate.
pub fn gauss_kronrod_adaptive(
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
    mut f: impl FnMut(f64) -> Vec<f64>,
) -> (Vec<f64>, f64) {
    let total = b - a;
    let mut sum: Vec<f64> = Vec::new();
    let mut err = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e) = gauss_kronrod(lo, hi, &mut f);
        if e <= tol * (hi - lo) / total || depth >= max_depth {
            if sum.is_empty() {
                sum.resize(v.len(), 0.0);
            }
            for (s, x) in sum.iter_mut().zip(&v) {
                *s += x;
            }
            err += e;
        } else {
            let m = 0.5 * (lo + hi);
            stack.push((m, hi, depth + 1));
            stack.push((lo, m, depth + 1));
        }
    }
    (sum, err)
}
