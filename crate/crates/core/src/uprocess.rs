//! The U-process `U_n(r)`, its Hoeffding decomposition, generalized inverse,
//! and exact selection of pairwise order statistics.

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::Kernel;
use crate::io;
use crate::rng::{self, Purpose};

/// Largest sample accepted by the quadratic-cost path for custom kernels
/// unless [`UProcessOptions::allow_large`] is set.
pub const GENERIC_SIZE_LIMIT: usize = 20_000;

#[derive(Debug, Clone, Copy, Default)]
pub struct UProcessOptions {
    pub allow_large: bool,
}

/// `U_n` evaluated over a sorted grid, optionally with the Hoeffding terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UProcessCurve {
    pub kernel: String,
    pub n: usize,
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
    pub w: Option<Vec<f64>>,
    pub rres: Option<Vec<f64>>,
}

/// JSON metadata written next to a curve CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveMetadata {
    pub kernel: String,
    pub n: usize,
    pub points: usize,
    pub decomposition: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra: Option<serde_json::Value>,
}

impl UProcessCurve {
    /// Add `W_n(r)` and `R_n(r)` for the supplied `U(r)`.
    pub fn decompose(mut self, data: &[f64], kernel: &Kernel, u_of_r: impl Fn(f64) -> f64) -> Result<Self> {
        let mut w = Vec::with_capacity(self.grid.len());
        let mut rres = Vec::with_capacity(self.grid.len());
        for (&r, &un) in self.grid.iter().zip(&self.u) {
            let u = u_of_r(r);
            let wn = linear_term(data, kernel, r, u);
            w.push(wn);
            rres.push((un - u) - wn);
        }
        self.w = Some(w);
        self.rres = Some(rres);
        Ok(self)
    }

    pub fn metadata(&self) -> CurveMetadata {
        CurveMetadata {
            kernel: self.kernel.clone(),
            n: self.n,
            points: self.grid.len(),
            decomposition: self.w.is_some(),
            extra: None,
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut headers = vec!["r", "u"];
        let mut cols: Vec<&[f64]> = vec![&self.grid, &self.u];
        if let (Some(w), Some(rres)) = (&self.w, &self.rres) {
            headers.extend(["w", "rres"]);
            cols.push(w);
            cols.push(rres);
        }
        io::columns_csv(&headers, &cols)
    }

    /// Write `path` (columns r, u[, w, rres]) and a JSON metadata sidecar.
    pub fn write(&self, path: &Path, extra: Option<serde_json::Value>) -> Result<()> {
        io::write_atomic(path, self.to_csv()?.as_bytes())?;
        let mut meta = self.metadata();
        meta.extra = extra;
        io::write_json_atomic(&io::sidecar_path(path), &meta)
    }
}

fn check_data(data: &[f64]) -> Result<()> {
    if data.len() < 2 {
        return Err(Error::domain(format!("need at least 2 observations, got {}", data.len())));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("observations must be finite"));
    }
    Ok(())
}

fn sorted_copy(data: &[f64]) -> Vec<f64> {
    let mut x = data.to_vec();
    x.sort_unstable_by(f64::total_cmp);
    x
}

/// Number of unordered pairs `n (n - 1) / 2`.
pub fn pair_count(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// `#{i < j : x_i + x_j <= t}` on sorted data.
fn count_sum_le(x: &[f64], t: f64) -> u64 {
    let (mut i, mut j) = (0usize, x.len().saturating_sub(1));
    let mut count = 0u64;
    while i < j {
        if x[i] + x[j] <= t {
            count += (j - i) as u64;
            i += 1;
        } else {
            j -= 1;
        }
    }
    count
}

/// `#{i < j : x_j - x_i <= t}` on sorted data.
fn count_diff_le(x: &[f64], t: f64) -> u64 {
    let n = x.len();
    let mut j = 0usize;
    let mut count = 0u64;
    for i in 0..n {
        j = j.max(i);
        while j + 1 < n && x[j + 1] - x[i] <= t {
            j += 1;
        }
        count += (j - i) as u64;
    }
    count
}

/// Pairs with `G(X_i, X_j) <= r` for a built-in kernel on sorted data.
fn builtin_count(sorted: &[f64], kernel: &Kernel, r: f64) -> u64 {
    match kernel {
        // (x + y) / 2 <= r  <=>  x + y <= 2r in floating point
        Kernel::PairAverage => count_sum_le(sorted, 2.0 * r),
        Kernel::PairSum => count_sum_le(sorted, r),
        Kernel::AbsDiff => count_diff_le(sorted, r),
        Kernel::Custom(_) => unreachable!("custom kernels use the pairwise path"),
    }
}

fn all_pair_values(data: &[f64], kernel: &Kernel) -> Vec<f64> {
    let n = data.len();
    let mut vals = Vec::with_capacity(pair_count(n) as usize);
    for i in 0..n {
        for j in (i + 1)..n {
            vals.push(kernel.g(data[i], data[j]));
        }
    }
    vals
}

fn check_generic_size(n: usize, opts: &UProcessOptions) -> Result<()> {
    if n > GENERIC_SIZE_LIMIT && !opts.allow_large {
        return Err(Error::domain(format!(
            "custom kernels cost O(n^2); n={n} exceeds {GENERIC_SIZE_LIMIT} without allow_large"
        )));
    }
    Ok(())
}

/// `U_n(r)` over `grid`.
pub fn u_process(data: &[f64], kernel: &Kernel, grid: &[f64]) -> Result<UProcessCurve> {
    u_process_with(data, kernel, grid, &UProcessOptions::default())
}

pub fn u_process_with(data: &[f64], kernel: &Kernel, grid: &[f64], opts: &UProcessOptions) -> Result<UProcessCurve> {
    check_data(data)?;
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::domain("grid must be sorted ascending"));
    }
    let n = data.len();
    let total = pair_count(n) as f64;
    let counts: Vec<u64> = if kernel.is_builtin() {
        let x = sorted_copy(data);
        grid.par_iter().map(|&r| builtin_count(&x, kernel, r)).collect()
    } else {
        check_generic_size(n, opts)?;
        let mut vals = all_pair_values(data, kernel);
        vals.sort_unstable_by(f64::total_cmp);
        grid.iter()
            .map(|&r| vals.partition_point(|&v| v <= r) as u64)
            .collect()
    };
    Ok(UProcessCurve {
        kernel: kernel.name().to_string(),
        n,
        grid: grid.to_vec(),
        u: counts.into_iter().map(|c| c as f64 / total).collect(),
        w: None,
        rres: None,
    })
}

/// `#{i < j : G(X_i, X_j) <= r}`.
pub fn count_pairs_le(data: &[f64], kernel: &Kernel, r: f64) -> Result<u64> {
    check_data(data)?;
    if kernel.is_builtin() {
        return Ok(builtin_count(&sorted_copy(data), kernel, r));
    }
    check_generic_size(data.len(), &UProcessOptions::default())?;
    Ok(all_pair_values(data, kernel).into_iter().filter(|&v| v <= r).count() as u64)
}

/// `U_n(r)` at a single threshold.
pub fn u_stat(data: &[f64], kernel: &Kernel, r: f64) -> Result<f64> {
    Ok(u_process(data, kernel, &[r])?.u[0])
}

/// `U_n(r) - U(r) = W_n(r) + R_n(r)` at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingTerms {
    pub u_n: f64,
    pub u: f64,
    pub w_n: f64,
    pub r_n: f64,
}

fn linear_term(data: &[f64], kernel: &Kernel, r: f64, u: f64) -> f64 {
    let n = data.len() as f64;
    2.0 / n * data.iter().map(|&x| kernel.h1(x, r) - u).sum::<f64>()
}

/// Hoeffding decomposition with `W_n = (2/n) sum (h1(X_i, r) - U(r))` and
/// `R_n = (U_n - U) - W_n`.
pub fn hoeffding_terms(data: &[f64], kernel: &Kernel, r: f64, u_of_r: f64) -> Result<HoeffdingTerms> {
    let u_n = u_stat(data, kernel, r)?;
    let w_n = linear_term(data, kernel, r, u_of_r);
    Ok(HoeffdingTerms {
        u_n,
        u: u_of_r,
        w_n,
        r_n: (u_n - u_of_r) - w_n,
    })
}

/// Pair transform for [`pairwise_kth`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairTransform {
    /// `(x_i + x_j) / 2`
    Average,
    /// `|x_i - x_j|`
    AbsDiff,
}

impl PairTransform {
    #[inline]
    fn value(self, x: &[f64], i: usize, j: usize) -> f64 {
        match self {
            PairTransform::Average => (x[i] + x[j]) / 2.0,
            PairTransform::AbsDiff => x[j] - x[i],
        }
    }
}

/// Exact `k`-th smallest (1-based) of `{T(X_i, X_j) : i < j}`.
pub fn pairwise_kth(data: &[f64], transform: PairTransform, k: u64) -> Result<f64> {
    check_data(data)?;
    let total = pair_count(data.len());
    if k < 1 || k > total {
        return Err(Error::domain(format!("rank k={k} outside 1..={total}")));
    }
    Ok(kth_sorted(&sorted_copy(data), transform, k))
}

/// First index `j` in `0..=n` of each row with `T(i, j) >= pivot` (or `> pivot`
/// when `strict_above`), computed with one monotone pointer.
fn row_boundaries(x: &[f64], transform: PairTransform, pivot: f64, strict_above: bool, out: &mut [usize]) {
    let n = x.len();
    let past = |v: f64| if strict_above { v > pivot } else { v >= pivot };
    match transform {
        PairTransform::Average => {
            // nonincreasing in i
            let mut j = n;
            for i in 0..n {
                while j > 0 && past(transform.value(x, i, j - 1)) {
                    j -= 1;
                }
                out[i] = j;
            }
        }
        PairTransform::AbsDiff => {
            // nondecreasing in i
            let mut j = 0usize;
            for i in 0..n {
                while j < n && !past(transform.value(x, i, j)) {
                    j += 1;
                }
                out[i] = j;
            }
        }
    }
}

/// Randomised pivoting over the active pair windows; every row keeps a
/// contiguous window `[left, right)` of candidate columns.
fn kth_sorted(x: &[f64], transform: PairTransform, k: u64) -> f64 {
    let n = x.len();
    let mut left: Vec<usize> = (1..=n).collect();
    let mut right: Vec<usize> = vec![n; n];
    let mut below = vec![0usize; n];
    let mut upto = vec![0usize; n];
    let mut rank = k;
    let mut rng = rng::stream(0x5ca1_ab1e, Purpose::Selection, n as u64);
    let enumerate_limit = 4 * n as u64 + 256;
    loop {
        let active: u64 = left.iter().zip(&right).map(|(l, r)| (r - l) as u64).sum();
        if active <= enumerate_limit {
            let mut vals = Vec::with_capacity(active as usize);
            for i in 0..n {
                for j in left[i]..right[i] {
                    vals.push(transform.value(x, i, j));
                }
            }
            let idx = (rank - 1) as usize;
            let (_, v, _) = vals.select_nth_unstable_by(idx, f64::total_cmp);
            return *v;
        }
        let mut target = rng.random_range(0..active);
        let mut pivot = f64::NAN;
        for i in 0..n {
            let width = (right[i] - left[i]) as u64;
            if target < width {
                pivot = transform.value(x, i, left[i] + target as usize);
                break;
            }
            target -= width;
        }
        row_boundaries(x, transform, pivot, false, &mut below);
        row_boundaries(x, transform, pivot, true, &mut upto);
        let mut lt = 0u64;
        let mut le = 0u64;
        for i in 0..n {
            let (l, r) = (left[i], right[i]);
            below[i] = below[i].clamp(l, r);
            upto[i] = upto[i].clamp(l, r);
            lt += (below[i] - l) as u64;
            le += (upto[i] - l) as u64;
        }
        if rank <= lt {
            right.copy_from_slice(&below);
        } else if rank <= le {
            return pivot;
        } else {
            rank -= le;
            left.copy_from_slice(&upto);
        }
    }
}

/// Rank `ceil(p N)` used for the generalized inverse at level `p`.
pub fn quantile_rank(p: f64, pairs: u64) -> u64 {
    ((p * pairs as f64).ceil() as u64).clamp(1, pairs)
}

/// Generalized inverse `inf{r : U_n(r) >= p}`.
pub fn u_quantile(data: &[f64], kernel: &Kernel, p: f64) -> Result<f64> {
    u_quantile_with(data, kernel, p, &UProcessOptions::default())
}

pub fn u_quantile_with(data: &[f64], kernel: &Kernel, p: f64, opts: &UProcessOptions) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("level p={p} outside (0,1)")));
    }
    check_data(data)?;
    let k = quantile_rank(p, pair_count(data.len()));
    match kernel {
        Kernel::PairAverage => pairwise_kth(data, PairTransform::Average, k),
        // x + y = 2 * ((x + y) / 2) exactly
        Kernel::PairSum => Ok(2.0 * pairwise_kth(data, PairTransform::Average, k)?),
        Kernel::AbsDiff => pairwise_kth(data, PairTransform::AbsDiff, k),
        Kernel::Custom(_) => {
            check_generic_size(data.len(), opts)?;
            let mut vals = all_pair_values(data, kernel);
            let (_, v, _) = vals.select_nth_unstable_by((k - 1) as usize, f64::total_cmp);
            Ok(*v)
        }
    }
}
