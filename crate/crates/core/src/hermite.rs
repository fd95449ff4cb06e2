//! Hermite polynomials (leading coefficient one), Hermite coefficients
//! `alpha_{p,q}(r) = E[1{G(X,Y) <= r} H_p(X) H_q(Y)]` of indicator kernels,
//! the projection `h1`, and Hermite-rank detection.
//!
//! Coefficients are computed by integrating the inner variable exactly over
//! the sublevel set `{y : G(x, y) <= r}` with
//! `int_{-inf}^{a} H_q(y) phi(y) dy = -H_{q-1}(a) phi(a)` (`q >= 1`), and the
//! outer variable by Gauss–Hermite quadrature with node doubling. For the
//! built-in kernels the sublevel set is known in closed form. For custom
//! kernels it is located by scanning and bisection, and the outer integral is
//! split wherever the shape of the sublevel set changes, with each piece
//! integrated by adaptive Gauss-Kronrod; the result is accurate to about
//! `1e-5`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_kronrod_adaptive, GaussHermite};
use crate::special::{big_phi, phi, phi_dot};

/// Default tolerance for declaring a coefficient nonzero.
pub const DEFAULT_RANK_TOL: f64 = 1e-6;

const START_NODES: usize = 64;
const MAX_NODES: usize = 512;
const CONVERGED: f64 = 1e-9;
const FAIL_BUILTIN: f64 = 1e-6;
const FAIL_CUSTOM: f64 = 1e-5;

// sublevel-set scan for custom kernels
const SCAN_HALF_WIDTH: f64 = 12.0;
const SCAN_STEPS: usize = 4800;
// outer breakpoint search for custom kernels
const OUTER_HALF_WIDTH: f64 = 16.0;
const OUTER_STEPS: usize = 1280;
const OUTER_TOL: f64 = 1e-9;
const OUTER_DEPTH: u32 = 40;

/// `H_p(x)` by the three-term recurrence `H_{p+1} = x H_p - p H_{p-1}`.
pub fn hermite_eval(p: usize, x: f64) -> f64 {
    let mut h_prev = 1.0;
    if p == 0 {
        return h_prev;
    }
    let mut h = x;
    for k in 1..p {
        let next = x * h - k as f64 * h_prev;
        h_prev = h;
        h = next;
    }
    h
}

/// `[H_0(x), ..., H_pmax(x)]`.
pub fn hermite_all(pmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(pmax + 1);
    out.push(1.0);
    if pmax >= 1 {
        out.push(x);
    }
    for k in 1..pmax {
        let next = x * out[k] - k as f64 * out[k - 1];
        out.push(next);
    }
    out
}

/// `int_{-inf}^{a} H_q(y) phi(y) dy`.
pub fn lower_tail_moment(q: usize, a: f64) -> f64 {
    if q == 0 {
        return big_phi(a);
    }
    if a.is_infinite() {
        return 0.0;
    }
    -hermite_eval(q - 1, a) * phi(a)
}

/// User-supplied symmetric kernel `G`.
#[derive(Clone)]
pub struct CustomKernel {
    name: String,
    g: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl CustomKernel {
    pub fn new(name: impl Into<String>, g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        CustomKernel {
            name: name.into(),
            g: Arc::new(g),
        }
    }
}

/// Symmetric bivariate function `G` defining `h(x, y, r) = 1{G(x, y) <= r}`.
#[derive(Clone)]
pub enum Kernel {
    /// `G(x, y) = (x + y) / 2`
    PairAverage,
    /// `G(x, y) = x + y`
    PairSum,
    /// `G(x, y) = |x - y|`
    AbsDiff,
    Custom(CustomKernel),
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Kernel({})", self.name())
    }
}

impl Kernel {
    pub fn custom(name: impl Into<String>, g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Kernel::Custom(CustomKernel::new(name, g))
    }

    pub fn from_name(name: &str) -> Result<Kernel> {
        match name.to_ascii_lowercase().as_str() {
            "average" | "pair_average" | "pairaverage" => Ok(Kernel::PairAverage),
            "sum" | "pair_sum" | "pairsum" => Ok(Kernel::PairSum),
            "absdiff" | "abs_diff" => Ok(Kernel::AbsDiff),
            other => Err(Error::domain(format!("unknown kernel '{other}'"))),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Kernel::PairAverage => "pair_average",
            Kernel::PairSum => "pair_sum",
            Kernel::AbsDiff => "abs_diff",
            Kernel::Custom(c) => &c.name,
        }
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self, Kernel::Custom(_))
    }

    #[inline]
    pub fn g(&self, x: f64, y: f64) -> f64 {
        match self {
            Kernel::PairAverage => (x + y) / 2.0,
            Kernel::PairSum => x + y,
            Kernel::AbsDiff => (x - y).abs(),
            Kernel::Custom(c) => (c.g)(x, y),
        }
    }

    #[inline]
    pub fn h(&self, x: f64, y: f64, r: f64) -> bool {
        self.g(x, y) <= r
    }

    /// `{y : G(x, y) <= r}` as a union of closed intervals.
    fn sublevel_set(&self, x: f64, r: f64) -> Vec<(f64, f64)> {
        match self {
            Kernel::PairAverage => vec![(f64::NEG_INFINITY, 2.0 * r - x)],
            Kernel::PairSum => vec![(f64::NEG_INFINITY, r - x)],
            Kernel::AbsDiff => {
                if r < 0.0 {
                    Vec::new()
                } else {
                    vec![(x - r, x + r)]
                }
            }
            Kernel::Custom(_) => self.scan_sublevel_set(x, r),
        }
    }

    fn scan_sublevel_set(&self, x: f64, r: f64) -> Vec<(f64, f64)> {
        let step = 2.0 * SCAN_HALF_WIDTH / SCAN_STEPS as f64;
        let at = |i: usize| -SCAN_HALF_WIDTH + i as f64 * step;
        let excess = |y: f64| self.g(x, y) - r;
        let inside = |y: f64| self.h(x, y, r);
        // boundary between lo and hi where membership switches away from lo_inside
        let refine = |mut lo: f64, mut hi: f64, lo_inside: bool| {
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if inside(mid) == lo_inside {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        // golden-section search for the extremum of sign * excess on [lo, hi]
        let extremum = |mut lo: f64, mut hi: f64, sign: f64| {
            let g = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                let a = hi - g * (hi - lo);
                let b = lo + g * (hi - lo);
                if sign * excess(a) < sign * excess(b) {
                    hi = b;
                } else {
                    lo = a;
                }
            }
            0.5 * (lo + hi)
        };
        let vals: Vec<f64> = (0..=SCAN_STEPS).map(|i| excess(at(i))).collect();
        let flags: Vec<bool> = (0..=SCAN_STEPS).map(|i| inside(at(i))).collect();
        // membership switches, in increasing order
        let mut edges = Vec::new();
        for i in 1..=SCAN_STEPS {
            if flags[i] != flags[i - 1] {
                edges.push(refine(at(i - 1), at(i), flags[i - 1]));
            } else if i < SCAN_STEPS && flags[i + 1] == flags[i] {
                // a narrow interval or hole between grid points shows up as a local extremum
                let (l, m, h) = (vals[i - 1], vals[i], vals[i + 1]);
                let sign = if flags[i] { -1.0 } else { 1.0 };
                if sign * m <= sign * l && sign * m <= sign * h && (m != l || m != h) {
                    let y = extremum(at(i - 1), at(i + 1), sign);
                    if inside(y) != flags[i] {
                        edges.push(refine(at(i - 1), y, flags[i]));
                        edges.push(refine(y, at(i + 1), !flags[i]));
                    }
                }
            }
        }
        edges.sort_by(f64::total_cmp);
        let mut out = Vec::new();
        let mut start = if flags[0] { Some(f64::NEG_INFINITY) } else { None };
        for e in edges {
            match start.take() {
                Some(s) => out.push((s, e)),
                None => start = Some(e),
            }
        }
        if let Some(s) = start {
            out.push((s, f64::INFINITY));
        }
        out
    }

    fn inner_moments(&self, x: f64, r: f64, qmax: usize) -> Vec<f64> {
        let mut acc = vec![0.0; qmax + 1];
        for (a, b) in self.sublevel_set(x, r) {
            for (q, slot) in acc.iter_mut().enumerate() {
                *slot += lower_tail_moment(q, b) - lower_tail_moment(q, a);
            }
        }
        acc
    }

    /// `h1(x, r) = int h(x, y, r) phi(y) dy`.
    pub fn h1(&self, x: f64, r: f64) -> f64 {
        match self {
            Kernel::PairAverage => big_phi(2.0 * r - x),
            Kernel::PairSum => big_phi(r - x),
            Kernel::AbsDiff => {
                if r < 0.0 {
                    0.0
                } else {
                    (big_phi(x + r) - big_phi(x - r)).max(0.0)
                }
            }
            Kernel::Custom(_) => self.inner_moments(x, r, 0)[0],
        }
    }

    /// `U(r) = E[h(X, Y, r)]` for independent standard Gaussians.
    pub fn u(&self, r: f64) -> Result<f64> {
        match self.u_closed(r) {
            Some(v) => Ok(v),
            None => alpha_pq(self, 0, 0, r),
        }
    }

    pub fn u_closed(&self, r: f64) -> Option<f64> {
        let s2 = std::f64::consts::SQRT_2;
        match self {
            Kernel::PairAverage => Some(big_phi(s2 * r)),
            Kernel::PairSum => Some(big_phi(r / s2)),
            Kernel::AbsDiff => Some(if r <= 0.0 { 0.0 } else { (2.0 * big_phi(r / s2) - 1.0).max(0.0) }),
            Kernel::Custom(_) => None,
        }
    }

    /// Closed-form `alpha_{p,q}(r)` for the built-in kernels, obtained by
    /// Gaussian integration by parts: the coefficient equals
    /// `E[d^p/dx^p d^q/dy^q h(X, Y, r)]`.
    pub fn alpha_closed(&self, p: usize, q: usize, r: f64) -> Option<f64> {
        let k = p + q;
        let s2 = std::f64::consts::SQRT_2;
        if k == 0 {
            return self.u_closed(r);
        }
        let scale = 2f64.powf(-(k as f64) / 2.0);
        match self {
            Kernel::PairAverage => {
                let z = s2 * r;
                Some(-scale * hermite_eval(k - 1, z) * phi(z))
            }
            Kernel::PairSum => {
                let z = r / s2;
                Some(-scale * hermite_eval(k - 1, z) * phi(z))
            }
            Kernel::AbsDiff => {
                if k % 2 == 1 || r <= 0.0 {
                    return Some(0.0);
                }
                let z = r / s2;
                let sign_q = if q % 2 == 0 { 1.0 } else { -1.0 };
                // k - 1 is odd here, so (-1)^{k-1} = -1
                Some(-sign_q * 2.0 * scale * hermite_eval(k - 1, z) * phi(z))
            }
            Kernel::Custom(_) => None,
        }
    }
}

/// Coefficients `alpha[p][q]`, `0 <= p, q <= pmax`, at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaTable {
    pub r: f64,
    pub values: Vec<Vec<f64>>,
    /// Outer quadrature nodes used for the accepted estimate.
    pub nodes: usize,
    /// Largest change between the last two node counts, or the summed
    /// Gauss-Kronrod error estimate for custom kernels.
    pub change: f64,
}

impl AlphaTable {
    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.values[p][q]
    }
}

fn table_with_rule(kernel: &Kernel, pmax: usize, qmax: usize, r: f64, rule: &GaussHermite) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; qmax + 1]; pmax + 1];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let hp = hermite_all(pmax, x);
        let inner = kernel.inner_moments(x, r, qmax);
        for (row, &h) in out.iter_mut().zip(&hp) {
            let wh = w * h;
            for (cell, &iq) in row.iter_mut().zip(&inner) {
                *cell += wh * iq;
            }
        }
    }
    out
}

fn max_change(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Number of intervals and whether the set is unbounded below and above.
fn set_shape(set: &[(f64, f64)]) -> (usize, bool, bool) {
    (
        set.len(),
        set.first().is_some_and(|s| s.0 == f64::NEG_INFINITY),
        set.last().is_some_and(|s| s.1 == f64::INFINITY),
    )
}

/// Outer pieces on which the sublevel set of a custom kernel keeps its shape,
/// so that the outer integrand is smooth inside each piece.
fn outer_pieces(kernel: &Kernel, r: f64) -> Vec<(f64, f64)> {
    let shape = |x: f64| set_shape(&kernel.sublevel_set(x, r));
    let step = 2.0 * OUTER_HALF_WIDTH / OUTER_STEPS as f64;
    let at = |i: usize| -OUTER_HALF_WIDTH + i as f64 * step;
    let mut cuts = vec![-OUTER_HALF_WIDTH];
    let mut prev = shape(at(0));
    for i in 1..=OUTER_STEPS {
        let cur = shape(at(i));
        if cur != prev {
            let (mut lo, mut hi) = (at(i - 1), at(i));
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if shape(mid) == prev {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cuts.push(0.5 * (lo + hi));
            prev = cur;
        }
    }
    cuts.push(OUTER_HALF_WIDTH);
    cuts.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| b > a).collect()
}

fn table_piecewise(kernel: &Kernel, pmax: usize, qmax: usize, r: f64, pieces: &[(f64, f64)]) -> (Vec<Vec<f64>>, f64, usize) {
    let mut flat = vec![0.0; (pmax + 1) * (qmax + 1)];
    let mut err = 0.0;
    let mut used = 0;
    for &(a, b) in pieces {
        let (v, e) = gauss_kronrod_adaptive(a, b, OUTER_TOL * (b - a) / (2.0 * OUTER_HALF_WIDTH), OUTER_DEPTH, |x| {
            used += 1;
            let w = phi(x);
            let hp = hermite_all(pmax, x);
            let inner = kernel.inner_moments(x, r, qmax);
            hp.iter().flat_map(|&h| inner.iter().map(move |&iq| w * h * iq)).collect()
        });
        for (s, x) in flat.iter_mut().zip(&v) {
            *s += x;
        }
        err += e;
    }
    (flat.chunks(qmax + 1).map(<[f64]>::to_vec).collect(), err, used)
}

fn adaptive_table(kernel: &Kernel, pmax: usize, qmax: usize, r: f64) -> Result<AlphaTable> {
    let mut change = f64::INFINITY;
    let (values, nodes) = if kernel.is_builtin() {
        let mut nodes = START_NODES;
        let mut prev = table_with_rule(kernel, pmax, qmax, r, &GaussHermite::new(nodes));
        while nodes < MAX_NODES {
            nodes *= 2;
            let cur = table_with_rule(kernel, pmax, qmax, r, &GaussHermite::new(nodes));
            change = max_change(&prev, &cur);
            prev = cur;
            if change < CONVERGED {
                break;
            }
        }
        (prev, nodes)
    } else {
        let pieces = outer_pieces(kernel, r);
        let (values, err, used) = table_piecewise(kernel, pmax, qmax, r, &pieces);
        change = err;
        (values, used)
    };
    let fail = if kernel.is_builtin() { FAIL_BUILTIN } else { FAIL_CUSTOM };
    if change > fail {
        return Err(Error::numeric(format!(
            "Hermite coefficients of {} at r={r} uncertain by {change:e} after {nodes} nodes",
            kernel.name()
        )));
    }
    Ok(AlphaTable {
        r,
        values,
        nodes,
        change,
    })
}

/// All `alpha_{p,q}(r)` with `p, q <= pmax`.
pub fn alpha_table(kernel: &Kernel, pmax: usize, r: f64) -> Result<AlphaTable> {
    adaptive_table(kernel, pmax, pmax, r)
}

/// `alpha_{p,q}(r) = E[h(X, Y, r) H_p(X) H_q(Y)]`.
pub fn alpha_pq(kernel: &Kernel, p: usize, q: usize, r: f64) -> Result<f64> {
    // the table is built over rows 0..=p and columns 0..=q
    Ok(adaptive_table(kernel, p, q, r)?.get(p, q))
}

/// `h1(x, r)`; closed form for built-ins, exact inner integral otherwise.
pub fn h1(kernel: &Kernel, x: f64, r: f64) -> f64 {
    kernel.h1(x, r)
}

/// Coefficient table and ranks over a threshold grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HermiteReport {
    pub kernel: String,
    pub grid: Vec<f64>,
    pub p_max: usize,
    pub tol: f64,
    /// `alpha[i][p][q]` at `grid[i]`.
    pub alpha: Vec<Vec<Vec<f64>>>,
    /// Hermite rank of the class `{h(., ., r) - U(r)}`.
    pub m: usize,
    /// Hermite rank of the class `{h1(., r) - U(r)}`, if detected.
    pub tau: Option<usize>,
    pub m_per_r: Vec<Option<usize>>,
    pub tau_per_r: Vec<Option<usize>>,
}

/// Detect the Hermite ranks `m` and `tau` of a kernel over `r_grid`.
pub fn hermite_rank(kernel: &Kernel, r_grid: &[f64], p_max: usize, tol: f64) -> Result<HermiteReport> {
    if r_grid.is_empty() {
        return Err(Error::domain("empty threshold grid"));
    }
    if p_max == 0 {
        return Err(Error::domain("P_max must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("rank tolerance must be positive"));
    }
    let mut alpha = Vec::with_capacity(r_grid.len());
    let mut m_per_r = Vec::with_capacity(r_grid.len());
    let mut tau_per_r = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let table = alpha_table(kernel, p_max, r)?;
        let m_r = (1..=2 * p_max).find(|&k| {
            (0..=k)
                .filter(|&p| p <= p_max && k - p <= p_max)
                .any(|p| table.get(p, k - p).abs() > tol)
        });
        let tau_r = (1..=p_max).find(|&p| table.get(p, 0).abs() > tol);
        m_per_r.push(m_r);
        tau_per_r.push(tau_r);
        alpha.push(table.values);
    }
    let m = m_per_r
        .iter()
        .flatten()
        .copied()
        .min()
        .ok_or(Error::RankUndetected {
            max_degree: 2 * p_max,
            tol,
        })?;
    let tau = tau_per_r.iter().flatten().copied().min();
    Ok(HermiteReport {
        kernel: kernel.name().to_string(),
        grid: r_grid.to_vec(),
        p_max,
        tol,
        alpha,
        m,
        tau,
        m_per_r,
        tau_per_r,
    })
}

/// `-phi(r sqrt 2) / sqrt 2`: `alpha_{1,0}` of the pair-average kernel.
pub fn pair_average_alpha10(r: f64) -> f64 {
    let s2 = std::f64::consts::SQRT_2;
    -phi(r * s2) / s2
}

/// `phi'(r / sqrt 2)`: `alpha_{2,0}` of the absolute-difference kernel.
pub fn abs_diff_alpha20(r: f64) -> f64 {
    phi_dot(r / std::f64::consts::SQRT_2)
}
