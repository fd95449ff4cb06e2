//! Limit-law constants, the Gaussian-regime covariance series, cumulants of
//! `a Z2 + b Z1^2` and a finite-n sampler for that mixture.

use std::collections::HashMap;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{self, Kernel};
use crate::io;
use crate::lrd_sim::{CovarianceModel, Simulator};
use crate::quadrature::{tanh_sinh_nodes, GaussHermite};
use crate::rng::{self, Purpose};
use crate::special::{beta, factorial, phi};

fn check_decay(d: f64) -> Result<()> {
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::domain(format!("decay exponent D={d} outside (0,1)")));
    }
    Ok(())
}

fn check_rosenblatt(d: f64) -> Result<()> {
    check_decay(d)?;
    if d >= 0.5 {
        return Err(Error::regime(format!(
            "D={d}: Rosenblatt-type limits require D < 1/2 (rank 2 non-central regime D < 1/m)"
        )));
    }
    Ok(())
}

/// `k(D) = B((1 - D)/2, D)`.
pub fn k_of_d(d: f64) -> Result<f64> {
    check_decay(d)?;
    Ok(beta((1.0 - d) / 2.0, d))
}

/// `E[Z1(1)^2] = 2 k(D) / ((1 - D)(2 - D))`.
pub fn var_z1(d: f64) -> Result<f64> {
    Ok(k_of_d(d)? * var_hl_normalized(d)?)
}

/// Variance of `k(D)^{-1/2} Z1(1)`, `2 / ((1 - D)(2 - D))`.
pub fn var_hl_normalized(d: f64) -> Result<f64> {
    check_decay(d)?;
    Ok(2.0 / ((1.0 - d) * (2.0 - d)))
}

/// `E[Z2(1)^2] = 4 k(D)^2 / ((1 - 2D)(2 - 2D))`, defined for `D < 1/2`.
pub fn var_z2(d: f64) -> Result<f64> {
    check_rosenblatt(d)?;
    let k = k_of_d(d)?;
    Ok(4.0 * k * k / ((1.0 - 2.0 * d) * (2.0 - 2.0 * d)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitVariances {
    pub var_z1: f64,
    pub var_z2: f64,
    pub var_hl_normalized: f64,
}

pub fn limit_variances(d: f64) -> Result<LimitVariances> {
    Ok(LimitVariances {
        var_z1: var_z1(d)?,
        var_z2: var_z2(d)?,
        var_hl_normalized: var_hl_normalized(d)?,
    })
}

/// Shape of a limiting law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LimitFamily {
    /// Centered Gaussian.
    Gaussian { variance: f64 },
    /// `premultiplier * (a Z2(1) + b Z1(1)^2)`.
    RosenblattMix { a: f64, b: f64, premultiplier: f64 },
}

/// `n^{rate_exponent} * rate_constant * (estimate - target)` converges to `family`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitDescriptor {
    pub rate_exponent: f64,
    pub rate_constant: f64,
    pub family: LimitFamily,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "kD")]
    pub k_d: f64,
}

impl LimitDescriptor {
    pub fn normalization(&self, n: usize) -> f64 {
        (n as f64).powf(self.rate_exponent) * self.rate_constant
    }

    /// Gaussian rank-1 limit at rate `n^{D/2} L^{-1/2}` with the given variance.
    pub fn rank_one(model: &CovarianceModel, variance: f64) -> Result<Self> {
        let d = model.decay_exponent();
        Ok(LimitDescriptor {
            rate_exponent: d / 2.0,
            rate_constant: model.l_const().powf(-0.5),
            family: LimitFamily::Gaussian { variance },
            d,
            k_d: k_of_d(d)?,
        })
    }

    /// Rank-2 limit at rate `k(D) n^D / L`.
    pub fn rank_two(model: &CovarianceModel, a: f64, b: f64, premultiplier: f64) -> Result<Self> {
        let d = model.decay_exponent();
        check_rosenblatt(d)?;
        let k = k_of_d(d)?;
        Ok(LimitDescriptor {
            rate_exponent: d,
            rate_constant: k / model.l_const(),
            family: LimitFamily::RosenblattMix { a, b, premultiplier },
            d,
            k_d: k,
        })
    }

    /// Gaussian limit at the usual `sqrt(n)` rate.
    pub fn root_n(model: &CovarianceModel, variance: f64) -> Result<Self> {
        let d = model.decay_exponent();
        Ok(LimitDescriptor {
            rate_exponent: 0.5,
            rate_constant: 1.0,
            family: LimitFamily::Gaussian { variance },
            d,
            k_d: k_of_d(d)?,
        })
    }
}

/// Truncation settings for [`clt_covariance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltOptions {
    pub p_max: usize,
    pub l_max: usize,
    pub tol: f64,
}

impl Default for CltOptions {
    fn default() -> Self {
        CltOptions { p_max: 30, l_max: 100_000, tol: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltCovariance {
    pub value: f64,
    pub tail_bound: f64,
}

/// Coefficients `alpha_{p,0}(r)` for `p = 0..=p_max`.
fn alpha_column(kernel: &Kernel, p_max: usize, r: f64) -> Result<Vec<f64>> {
    if kernel.is_builtin() {
        return Ok((0..=p_max).map(|p| kernel.alpha_closed(p, 0, r).unwrap_or(0.0)).collect());
    }
    let table = hermite::alpha_table(kernel, p_max, r)?;
    Ok((0..=p_max).map(|p| table.get(p, 0)).collect())
}

/// `E[h1(X, s) h1(X, t)] - U(s) U(t)` by Gauss-Hermite.
fn h1_covariance(kernel: &Kernel, s: f64, t: f64) -> f64 {
    let gh = GaussHermite::new(512);
    let es = gh.expect(|x| kernel.h1(x, s));
    let et = gh.expect(|x| kernel.h1(x, t));
    gh.expect(|x| kernel.h1(x, s) * kernel.h1(x, t)) - es * et
}

/// `sum_{l >= 1} rho(l)^p` over the supplied lags plus an integral estimate of
/// the remaining tail `L^p (l_max + 1/2)^{1 - pD} / (pD - 1)`.
fn lag_power_sum(rho: &[f64], p: usize, tail: Option<(f64, f64)>) -> (f64, f64) {
    let head: f64 = rho.iter().map(|r| r.powi(p as i32)).sum();
    let rest = match tail {
        Some((d, l)) if p as f64 * d > 1.0 => {
            let pd = p as f64 * d;
            l.powi(p as i32) * (rho.len() as f64 + 0.5).powf(1.0 - pd) / (pd - 1.0)
        }
        Some(_) => f64::INFINITY,
        None => 0.0,
    };
    (head, rest)
}

/// Covariance of the Gaussian limit `W` from an explicit correlation sequence
/// `rho[l - 1] = rho(l)`, `l = 1..=rho.len()`. `tail` carries `(D, L)` when
/// the correlations continue as `L l^{-D}` beyond the supplied lags.
pub fn clt_covariance_from_correlations(
    kernel: &Kernel,
    s: f64,
    t: f64,
    rho: &[f64],
    tail: Option<(f64, f64)>,
    opts: &CltOptions,
) -> Result<CltCovariance> {
    if opts.p_max == 0 {
        return Err(Error::domain("p_max must be positive"));
    }
    let a_s = alpha_column(kernel, opts.p_max, s)?;
    let a_t = alpha_column(kernel, opts.p_max, t)?;
    let rank_tol = 1e-10;
    if tail.is_some() && (a_s[1].abs() > rank_tol || a_t[1].abs() > rank_tol) {
        return Err(Error::regime(format!(
            "kernel {} has a nonzero first Hermite coefficient; the sqrt(n) Gaussian limit needs rank 2",
            kernel.name()
        )));
    }
    let mut value = 0.0;
    let mut lag_tail = 0.0;
    for p in 1..=opts.p_max {
        let coef = a_s[p] * a_t[p] / factorial(p);
        if coef == 0.0 {
            continue;
        }
        let (head, rest) = lag_power_sum(rho, p, tail);
        value += coef * (1.0 + 2.0 * (head + rest));
        lag_tail += (coef * 2.0 * rest).abs();
    }
    if !lag_tail.is_finite() {
        return Err(Error::regime("lag series diverges: D <= 1/2 for a rank-2 kernel"));
    }
    // Hermite tail by Cauchy-Schwarz with the remaining variance of h1
    let used = |a: &[f64]| (1..=opts.p_max).map(|p| a[p] * a[p] / factorial(p)).sum::<f64>();
    let rem_s = (h1_covariance(kernel, s, s) - used(&a_s)).max(0.0);
    let rem_t = (h1_covariance(kernel, t, t) - used(&a_t)).max(0.0);
    let (head, rest) = lag_power_sum(rho, opts.p_max + 1, tail.map(|(d, l)| (d, l.abs())));
    let abs_head: f64 = rho.iter().map(|r| r.abs().powi(opts.p_max as i32 + 1)).sum();
    let lag_factor = 1.0 + 2.0 * (abs_head.max(head) + rest.abs());
    let p_tail = (rem_s * rem_t).sqrt() * lag_factor;
    let tail_bound = 4.0 * (lag_tail + p_tail);
    if tail_bound > opts.tol {
        return Err(Error::Truncation { bound: tail_bound, tol: opts.tol });
    }
    Ok(CltCovariance { value: 4.0 * value, tail_bound })
}

/// `E[W(s) W(t)]` for the Gaussian limit of `sqrt(n)(U_n - U)` when `D > 1/2`.
pub fn clt_covariance(
    kernel: &Kernel,
    s: f64,
    t: f64,
    model: &CovarianceModel,
    opts: &CltOptions,
) -> Result<CltCovariance> {
    model.validate()?;
    let d = model.decay_exponent();
    if d <= 0.5 {
        return Err(Error::regime(format!(
            "D={d}: the sqrt(n) Gaussian limit requires D > 1/2 for rank-2 kernels"
        )));
    }
    let rho = model.correlations(opts.l_max + 1)?;
    clt_covariance_from_correlations(kernel, s, t, &rho[1..], Some((d, model.l_const())), opts)
}

/// `1 / (sqrt(2) Phi^{-1}(3/4))`.
pub fn shamos_constant() -> f64 {
    1.0 / (std::f64::consts::SQRT_2 * crate::special::big_phi_inv(0.75))
}

/// Variance of the Gaussian limit of `sqrt(n)(sigma_BL - sigma)` for unit `sigma`.
pub fn shamos_clt_variance(model: &CovarianceModel, opts: &CltOptions) -> Result<f64> {
    let c = shamos_constant();
    let w = clt_covariance(&Kernel::AbsDiff, 1.0 / c, 1.0 / c, model, opts)?.value;
    let dens = phi(1.0 / (c * std::f64::consts::SQRT_2));
    Ok(c * c * w / (2.0 * dens * dens))
}

/// Variance of the Gaussian limit of `sqrt(n)(sd - 1)` when `D > 1/2`:
/// `(1/2) sum_{k in Z} rho(k)^2`.
pub fn sd_clt_variance(model: &CovarianceModel, opts: &CltOptions) -> Result<f64> {
    model.validate()?;
    let d = model.decay_exponent();
    if d <= 0.5 {
        return Err(Error::regime(format!("D={d}: sqrt(n) limit of the standard deviation requires D > 1/2")));
    }
    let rho = model.correlations(opts.l_max + 1)?;
    let (head, rest) = lag_power_sum(&rho[1..], 2, Some((d, model.l_const())));
    Ok(0.5 * (1.0 + 2.0 * (head + rest)))
}

/// Integration route for [`limit_cumulant`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum CumulantMethod {
    SubsetQuadrature,
    McIntegration { samples: usize, seed: u64 },
}

/// Cumulant of order `p` of `a Z2(1) + b Z1(1)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantRequest {
    pub p: usize,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub method: CumulantMethod,
}

impl CumulantRequest {
    pub fn quadrature(p: usize, a: f64, b: f64, d: f64) -> Self {
        CumulantRequest { p, a, b, d, method: CumulantMethod::SubsetQuadrature }
    }

    pub fn validate(&self) -> Result<()> {
        check_rosenblatt(self.d)?;
        if self.p < 2 {
            return Err(Error::domain(format!("cumulant order p={} must be at least 2", self.p)));
        }
        if !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::domain("mixture coefficients must be finite"));
        }
        match self.method {
            CumulantMethod::SubsetQuadrature if self.p > 4 => Err(Error::domain(format!(
                "subset quadrature supports p <= 4, got p={}; use Monte Carlo integration",
                self.p
            ))),
            CumulantMethod::McIntegration { samples, .. } if samples < 2 => {
                Err(Error::domain("MC integration needs at least 2 samples"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantValue {
    pub p: usize,
    pub value: f64,
    /// Monte Carlo standard error; quadrature error estimate otherwise.
    pub std_error: f64,
}

/// Lengths of the paths left after collapsing the coordinates in `subset`:
/// the cyclic gaps between consecutive indices outside the subset.
fn subset_gaps(p: usize, subset: u32) -> Vec<usize> {
    let outside: Vec<usize> = (0..p).filter(|j| subset & (1 << j) == 0).collect();
    (0..outside.len())
        .map(|i| {
            let next = if i + 1 < outside.len() { outside[i + 1] } else { outside[0] + p };
            next - outside[i]
        })
        .collect()
}

/// `J_L = <1, T^L 1>` and `C_p = Tr(T^p)` for the operator with kernel
/// `|u - v|^{-D}` on `[0, 1]`.
#[derive(Debug, Clone, Copy)]
struct ChainIntegrals {
    path: [f64; 5],
    cycle: [f64; 5],
    error: f64,
}

/// Path integral `J_1` in closed form.
pub fn path_integral_1(d: f64) -> f64 {
    2.0 / ((1.0 - d) * (2.0 - d))
}

/// `J_2 = 2 (B(1-D, 1-D) + 2/(1-D)) / ((2 - 2D)(3 - 2D))`.
pub fn path_integral_2(d: f64) -> f64 {
    2.0 * (beta(1.0 - d, 1.0 - d) + 2.0 / (1.0 - d)) / ((2.0 - 2.0 * d) * (3.0 - 2.0 * d))
}

/// `C_2 = 2 / ((1 - 2D)(2 - 2D))`.
pub fn cycle_integral_2(d: f64) -> f64 {
    2.0 / ((1.0 - 2.0 * d) * (2.0 - 2.0 * d))
}

/// `C_3 = 6 B(1-D, 1-D) / ((2 - 3D)(3 - 3D))`.
pub fn cycle_integral_3(d: f64) -> f64 {
    6.0 * beta(1.0 - d, 1.0 - d) / ((2.0 - 3.0 * d) * (3.0 - 3.0 * d))
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// Integral over `[0,1]^m` of `prod |v_a - v_b|^{-D}` over the edges of a
/// path (or cycle) through all `m` points. Each ordering of the points is
/// written in its gaps `g = s t`, the radial part is integrated exactly, and
/// the simplex part uses tensor tanh-sinh in stick-breaking coordinates.
pub fn chain_integral(m: usize, cyclic: bool, d: f64, level: u32) -> f64 {
    assert!(m >= 2 && !(cyclic && m < 3));
    let pair_index = |i: usize, j: usize| {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        a * m + b
    };
    let mut classes: HashMap<Vec<usize>, f64> = HashMap::new();
    for perm in permutations(m) {
        let mut edges: Vec<usize> = perm.windows(2).map(|w| pair_index(w[0], w[1])).collect();
        if cyclic {
            edges.push(pair_index(perm[m - 1], perm[0]));
        }
        edges.sort_unstable();
        *classes.entry(edges).or_insert(0.0) += 1.0;
    }
    let classes: Vec<(Vec<usize>, f64)> = classes.into_iter().collect();
    let e = if cyclic { m } else { m - 1 } as f64;
    let radial = 1.0 / ((m as f64 - 1.0 - e * d) * (m as f64 - e * d));
    let dims = m - 2;
    let nodes = tanh_sinh_nodes(level);
    let mut gaps = vec![0.0; m - 1];
    let mut powered = vec![0.0; m * m];
    let mut eval = |gaps: &[f64]| -> f64 {
        for i in 0..m {
            let mut dist = 0.0;
            for j in (i + 1)..m {
                dist += gaps[j - 1];
                powered[i * m + j] = dist.powf(-d);
            }
        }
        classes
            .iter()
            .map(|(edges, count)| count * edges.iter().map(|&k| powered[k]).product::<f64>())
            .sum()
    };
    let simplex = if dims == 0 {
        gaps[0] = 1.0;
        eval(&gaps)
    } else {
        // stick-breaking: gap_i = x_i prod_{j<i} (1 - x_j), last gap = prod (1 - x_j)
        let mut total = 0.0;
        let mut idx = vec![0usize; dims];
        loop {
            let mut remaining = 1.0;
            let mut weight = 1.0;
            for (level_i, &k) in idx.iter().enumerate() {
                let (x, one_minus_x, w) = nodes[k];
                gaps[level_i] = remaining * x;
                weight *= w * one_minus_x.powi((dims - 1 - level_i) as i32);
                remaining *= one_minus_x;
            }
            gaps[dims] = remaining;
            if weight > 0.0 && gaps.iter().all(|&g| g > 0.0) {
                total += weight * eval(&gaps);
            }
            let mut pos = dims;
            loop {
                if pos == 0 {
                    return total * radial;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < nodes.len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    };
    simplex * radial
}

fn chain_integrals(d: f64, p: usize) -> ChainIntegrals {
    let mut path = [f64::NAN; 5];
    let mut cycle = [f64::NAN; 5];
    let mut error = 0.0_f64;
    path[1] = path_integral_1(d);
    path[2] = path_integral_2(d);
    cycle[2] = cycle_integral_2(d);
    cycle[3] = cycle_integral_3(d);
    let refined = |m: usize, cyclic: bool, level: u32, error: &mut f64| {
        let fine = chain_integral(m, cyclic, d, level);
        let coarse = chain_integral(m, cyclic, d, level - 1);
        *error = error.max(((fine - coarse) / fine).abs());
        fine
    };
    if p >= 3 {
        path[3] = refined(4, false, 4, &mut error);
    }
    if p >= 4 {
        path[4] = refined(5, false, 3, &mut error);
        cycle[4] = refined(4, true, 4, &mut error);
    }
    ChainIntegrals { path, cycle, error }
}

fn cumulant_prefactor(p: usize, k: f64) -> f64 {
    2f64.powi(p as i32 - 1) * factorial(p - 1) * k.powi(p as i32)
}

/// Draw the next chain point from `x` with density proportional to
/// `|x - y|^{-e}` on `[0, 1]`; returns the point and the normalising mass.
fn chain_step<R: Rng + ?Sized>(x: f64, e: f64, rng: &mut R) -> (f64, f64) {
    let q = 1.0 - e;
    let left = x.powf(q);
    let right = (1.0 - x).powf(q);
    let mass = (left + right) / q;
    let u: f64 = rng.random();
    let v: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let y = if u * (left + right) < left {
        x - x * v.powf(1.0 / q)
    } else {
        x + (1.0 - x) * v.powf(1.0 / q)
    };
    (y, mass)
}

/// One unbiased draw of `J_len`.
fn path_draw<R: Rng + ?Sized>(len: usize, d: f64, rng: &mut R) -> f64 {
    let mut x: f64 = rng.random();
    let mut w = 1.0;
    for _ in 0..len {
        let (y, mass) = chain_step(x, d, rng);
        w *= mass;
        x = y;
    }
    w
}

/// One unbiased draw of `C_p`.
fn cycle_draw<R: Rng + ?Sized>(p: usize, d: f64, rng: &mut R) -> f64 {
    let start: f64 = rng.random();
    if p == 2 {
        return chain_step(start, 2.0 * d, rng).1;
    }
    let mut x = start;
    let mut w = 1.0;
    for _ in 0..(p - 1) {
        let (y, mass) = chain_step(x, d, rng);
        w *= mass;
        x = y;
    }
    w * (x - start).abs().powf(-d)
}

/// `kappa_p = 2^{p-1} (p-1)! k(D)^p sum_S a^{|S|} b^{p-|S|} I_S`.
pub fn limit_cumulant(req: &CumulantRequest) -> Result<CumulantValue> {
    req.validate()?;
    let p = req.p;
    let k = k_of_d(req.d)?;
    let pref = cumulant_prefactor(p, k);
    let full = (1u32 << p) - 1;
    let weight = |subset: u32| {
        let size = subset.count_ones() as i32;
        req.a.powi(size) * req.b.powi(p as i32 - size)
    };
    match req.method {
        CumulantMethod::SubsetQuadrature => {
            let ints = chain_integrals(req.d, p);
            let mut sum = 0.0;
            for subset in 0..=full {
                let w = weight(subset);
                if w == 0.0 {
                    continue;
                }
                let term = if subset == full {
                    ints.cycle[p]
                } else {
                    subset_gaps(p, subset).iter().map(|&g| ints.path[g]).product()
                };
                sum += w * term;
            }
            let value = pref * sum;
            Ok(CumulantValue { p, value, std_error: ints.error * value.abs() })
        }
        CumulantMethod::McIntegration { samples, seed } => {
            let plans: Vec<(f64, Option<Vec<usize>>)> = (0..=full)
                .filter_map(|s| {
                    let w = weight(s);
                    (w != 0.0).then(|| (w, (s != full).then(|| subset_gaps(p, s))))
                })
                .collect();
            let draws: Vec<f64> = (0..samples as u64)
                .into_par_iter()
                .map(|i| {
                    let mut rng = rng::stream(seed, Purpose::Integration, i);
                    plans
                        .iter()
                        .map(|(w, gaps)| {
                            let term = match gaps {
                                None => cycle_draw(p, req.d, &mut rng),
                                Some(g) => g.iter().map(|&len| path_draw(len, req.d, &mut rng)).product(),
                            };
                            w * term
                        })
                        .sum()
                })
                .collect();
            let n = draws.len() as f64;
            let mean = draws.iter().sum::<f64>() / n;
            let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            Ok(CumulantValue { p, value: pref * mean, std_error: pref.abs() * (var / n).sqrt() })
        }
    }
}

/// Settings for [`sample_limit_law`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitLawConfig {
    pub a: f64,
    pub b: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub n_approx: usize,
    pub reps: usize,
    pub seed: u64,
    /// Defaults to fGn with `H = 1 - D/2`.
    #[serde(default)]
    pub model: Option<CovarianceModel>,
}

impl LimitLawConfig {
    pub fn new(a: f64, b: f64, d: f64, n_approx: usize, reps: usize, seed: u64) -> Self {
        LimitLawConfig { a, b, d, n_approx, reps, seed, model: None }
    }
}

pub const MIN_N_APPROX: usize = 1 << 10;

/// Draws of `A_n = k(D) n^{D-2} / L [a n sum (X_i^2 - 1) + b (sum X_i)^2]`.
pub fn sample_limit_law(cfg: &LimitLawConfig) -> Result<Vec<f64>> {
    check_rosenblatt(cfg.d)?;
    if cfg.n_approx < MIN_N_APPROX {
        return Err(Error::domain(format!("n_approx={} below {MIN_N_APPROX}", cfg.n_approx)));
    }
    if cfg.reps == 0 {
        return Err(Error::domain("reps must be positive"));
    }
    let model = match cfg.model {
        Some(m) => {
            m.validate()?;
            if (m.decay_exponent() - cfg.d).abs() > 1e-12 {
                return Err(Error::domain(format!(
                    "model decay exponent {} differs from D={}",
                    m.decay_exponent(),
                    cfg.d
                )));
            }
            m
        }
        None => CovarianceModel::fgn_with_decay(cfg.d)?,
    };
    let sim = Simulator::new(model, cfg.n_approx)?;
    let n = cfg.n_approx as f64;
    let scale = k_of_d(cfg.d)? * n.powf(cfg.d - 2.0) / model.l_const();
    let draws = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng::stream(cfg.seed, Purpose::LimitLaw, rep);
            let x = sim.embedding().sample(&mut rng);
            let (mut sum, mut sq) = (0.0, 0.0);
            for v in &x {
                sum += v;
                sq += v * v - 1.0;
            }
            scale * (cfg.a * n * sq + cfg.b * sum * sum)
        })
        .collect();
    Ok(draws)
}

pub fn write_samples_csv(path: &Path, samples: &[f64]) -> Result<()> {
    io::write_column_csv(path, "value", samples)
}

/// Constants for one `D`, written by the `limits` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitTable {
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "kD")]
    pub k_d: f64,
    pub var_z1: f64,
    pub var_hl_normalized: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var_z2: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cumulants: Vec<CumulantEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantEntry {
    pub p: usize,
    pub a: f64,
    pub b: f64,
    pub value: f64,
    pub std_error: f64,
}

impl LimitTable {
    pub fn new(d: f64) -> Result<Self> {
        Ok(LimitTable {
            d,
            k_d: k_of_d(d)?,
            var_z1: var_z1(d)?,
            var_hl_normalized: var_hl_normalized(d)?,
            var_z2: if d < 0.5 { Some(var_z2(d)?) } else { None },
            cumulants: Vec::new(),
        })
    }
}
