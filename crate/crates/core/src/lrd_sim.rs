//! Long-memory Gaussian correlation models, exact simulation by circulant
//! embedding, and additive-outlier contamination.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::io;
use crate::rng::{self, Purpose};

/// Embedding eigenvalues above this (negative) threshold are treated as roundoff.
pub const EMBEDDING_TOLERANCE: f64 = -1e-10;

/// Relative size of the neglected AR(1) geometric tail in the ARFIMA
/// correlation convolution.
const AR_TAIL_TOLERANCE: f64 = 1e-14;

/// Stationary unit-variance Gaussian correlation model with
/// `rho(k) ~ L k^{-D}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum CovarianceModel {
    /// Fractional Gaussian noise with Hurst exponent in (1/2, 1).
    Fgn { hurst: f64 },
    /// ARFIMA(1, d, 0): `(I - phi B) Y = (I - B)^{-d} Z`.
    Arfima { phi: f64, d: f64 },
}

impl CovarianceModel {
    pub fn fgn(hurst: f64) -> Result<Self> {
        let m = CovarianceModel::Fgn { hurst };
        m.validate()?;
        Ok(m)
    }

    pub fn arfima(phi: f64, d: f64) -> Result<Self> {
        let m = CovarianceModel::Arfima { phi, d };
        m.validate()?;
        Ok(m)
    }

    /// fGn whose decay exponent is `d_exp`, i.e. `H = 1 - D/2`.
    pub fn fgn_with_decay(d_exp: f64) -> Result<Self> {
        if !(d_exp > 0.0 && d_exp < 1.0) {
            return Err(Error::domain(format!("decay exponent D={d_exp} outside (0,1)")));
        }
        Self::fgn(1.0 - d_exp / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CovarianceModel::Fgn { hurst } => {
                if !(hurst > 0.5 && hurst < 1.0) {
                    return Err(Error::domain(format!("Hurst exponent H={hurst} outside (1/2,1)")));
                }
            }
            CovarianceModel::Arfima { phi, d } => {
                if !(phi.abs() < 1.0) {
                    return Err(Error::domain(format!("AR coefficient phi={phi} outside (-1,1)")));
                }
                if !(d > 0.0 && d < 0.5) {
                    return Err(Error::domain(format!("memory parameter d={d} outside (0,1/2)")));
                }
            }
        }
        Ok(())
    }

    /// Decay exponent `D`: `2 - 2H` for fGn, `1 - 2d` for ARFIMA.
    pub fn decay_exponent(&self) -> f64 {
        match *self {
            CovarianceModel::Fgn { hurst } => 2.0 - 2.0 * hurst,
            CovarianceModel::Arfima { d, .. } => 1.0 - 2.0 * d,
        }
    }

    /// Limit of `rho(k) k^D` as `k -> infinity`.
    pub fn l_const(&self) -> f64 {
        match *self {
            CovarianceModel::Fgn { hurst } => hurst * (2.0 * hurst - 1.0),
            CovarianceModel::Arfima { phi, d } => {
                let ratio = (ln_gamma(1.0 - d) - ln_gamma(d)).exp();
                let g0 = arfima_unnormalized(phi, d, 1).map(|g| g[0]).unwrap_or(f64::NAN);
                ratio * (1.0 + phi) / ((1.0 - phi) * g0)
            }
        }
    }

    /// Correlation at lag `k`.
    pub fn rho(&self, k: usize) -> f64 {
        match *self {
            CovarianceModel::Fgn { hurst } => fgn_rho(hurst, k),
            CovarianceModel::Arfima { phi, d } => arfima_correlation(phi, d, k)
                .map(|v| v[k])
                .unwrap_or(f64::NAN),
        }
    }

    /// Correlations at lags `0..len`.
    pub fn correlations(&self, len: usize) -> Result<Vec<f64>> {
        if len == 0 {
            return Ok(Vec::new());
        }
        match *self {
            CovarianceModel::Fgn { hurst } => Ok((0..len).map(|k| fgn_rho(hurst, k)).collect()),
            CovarianceModel::Arfima { phi, d } => arfima_correlation(phi, d, len - 1),
        }
    }
}

/// Autocorrelation of fractional Gaussian noise,
/// `(|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2`.
pub fn fgn_correlation(hurst: f64, k: usize) -> Result<f64> {
    CovarianceModel::fgn(hurst)?;
    Ok(fgn_rho(hurst, k))
}

fn fgn_rho(hurst: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let two_h = 2.0 * hurst;
    let kf = k as f64;
    // k^{2H} [ (1+1/k)^{2H} - 2 + (1-1/k)^{2H} ] / 2, without the cancellation
    // of the naive form at large lags
    let x = 1.0 / kf;
    let up = (two_h * x.ln_1p()).exp_m1();
    let down = (two_h * (-x).ln_1p()).exp_m1();
    0.5 * kf.powf(two_h) * (up + down)
}

/// Correlations `rho(0..=max_lag)` of the stationary ARFIMA(1, d, 0) process.
///
/// The ARFIMA(0, d, 0) autocorrelation `prod_{j<=k} (j-1+d)/(j-d)` is
/// convolved with the two-sided AR(1) filter `phi^{|m|}`, truncated where the
/// geometric tail drops below `1e-14`.
pub fn arfima_correlation(phi: f64, d: f64, max_lag: usize) -> Result<Vec<f64>> {
    CovarianceModel::arfima(phi, d)?;
    let g = arfima_unnormalized(phi, d, max_lag + 1)?;
    let g0 = g[0];
    Ok(g.into_iter().map(|v| v / g0).collect())
}

fn arfima_unnormalized(phi: f64, d: f64, len: usize) -> Result<Vec<f64>> {
    let a = phi.abs();
    let trunc = if a == 0.0 {
        0usize
    } else {
        // 2 a^{M+1} / (1 - a) < tol
        let m = ((AR_TAIL_TOLERANCE * (1.0 - a) / 2.0).ln() / a.ln()).ceil();
        if !m.is_finite() || m > 1e7 {
            return Err(Error::numeric(format!(
                "AR(1) filter with phi={phi} needs {m} terms to converge"
            )));
        }
        m.max(0.0) as usize
    };
    let total = len + trunc;
    let mut frac = Vec::with_capacity(total);
    frac.push(1.0);
    for j in 1..total {
        let jf = j as f64;
        let prev = frac[j - 1];
        frac.push(prev * (jf - 1.0 + d) / (jf - d));
    }
    let mut weights = Vec::with_capacity(trunc + 1);
    let mut w = 1.0;
    for _ in 0..=trunc {
        weights.push(w);
        w *= phi;
    }
    let out = (0..len)
        .map(|k| {
            let mut s = frac[k];
            for (m, &wm) in weights.iter().enumerate().skip(1) {
                s += wm * (frac[k + m] + frac[(k as isize - m as isize).unsigned_abs()]);
            }
            s
        })
        .collect();
    Ok(out)
}

/// Circulant embedding of the `n x n` Toeplitz correlation matrix.
///
/// The generator is the linear map `noise -> Re(F (sqrt(lambda/m) * xi))`,
/// where `xi` packs `2m` real standard normals into `m` complex ones.
#[derive(Clone)]
pub struct CirculantEmbedding {
    n: usize,
    m: usize,
    sqrt_eig: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantEmbedding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantEmbedding")
            .field("n", &self.n)
            .field("m", &self.m)
            .finish()
    }
}

impl CirculantEmbedding {
    pub fn new(model: &CovarianceModel, n: usize) -> Result<Self> {
        model.validate()?;
        if n < 2 {
            return Err(Error::domain(format!("path length n={n} must be at least 2")));
        }
        Self::from_correlations(&model.correlations(n)?)
    }

    /// Embedding of the Toeplitz matrix with first row `rho`.
    pub fn from_correlations(rho: &[f64]) -> Result<Self> {
        let n = rho.len();
        if n < 2 {
            return Err(Error::domain("need at least two correlations"));
        }
        let m = 2 * (n - 1);
        let mut c: Vec<Complex<f64>> = (0..m)
            .map(|j| {
                let lag = if j < n { j } else { m - j };
                Complex::new(rho[lag], 0.0)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut c);
        let min = c.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        if min < EMBEDDING_TOLERANCE {
            return Err(Error::Embedding {
                min_eigenvalue: min,
                size: m,
            });
        }
        let mf = m as f64;
        let sqrt_eig = c.iter().map(|z| (z.re.max(0.0) / mf).sqrt()).collect();
        Ok(CirculantEmbedding {
            n,
            m,
            sqrt_eig,
            fft,
        })
    }

    pub fn path_len(&self) -> usize {
        self.n
    }

    /// Number of standard normal inputs consumed by [`apply`](Self::apply).
    pub fn noise_len(&self) -> usize {
        2 * self.m
    }

    /// Deterministic part of the generator: maps `2m` standard normals to a
    /// path of length `n`.
    pub fn apply(&self, noise: &[f64]) -> Vec<f64> {
        assert_eq!(noise.len(), self.noise_len(), "noise length mismatch");
        let mut buf: Vec<Complex<f64>> = self
            .sqrt_eig
            .iter()
            .enumerate()
            .map(|(k, &s)| Complex::new(s * noise[2 * k], s * noise[2 * k + 1]))
            .collect();
        self.fft.process(&mut buf);
        buf[..self.n].iter().map(|z| z.re).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let noise: Vec<f64> = (0..self.noise_len())
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        self.apply(&noise)
    }
}

/// Seed bookkeeping for a simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub stream: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContaminationScheme {
    /// `W_t ~ Bernoulli(p/2)` with values in {0, 1}.
    BernoulliHalf,
    /// `W_t` in {-1, 0, 1} with `P(W_t = 1) = P(W_t = -1) = p/2`.
    Rademacher,
}

/// Additive outliers `X_t = Y_t + omega W_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContaminationSpec {
    pub omega: f64,
    pub p: f64,
    pub scheme: ContaminationScheme,
}

impl ContaminationSpec {
    pub fn new(omega: f64, p: f64, scheme: ContaminationScheme) -> Result<Self> {
        let spec = ContaminationSpec { omega, p, scheme };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.p) {
            return Err(Error::domain(format!("contamination probability p={} outside [0,1)", self.p)));
        }
        if !self.omega.is_finite() {
            return Err(Error::domain("outlier magnitude must be finite"));
        }
        Ok(())
    }

    /// Mean of `omega W_t`.
    pub fn mean_shift(&self) -> f64 {
        match self.scheme {
            ContaminationScheme::BernoulliHalf => self.omega * self.p / 2.0,
            ContaminationScheme::Rademacher => 0.0,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let half = self.p / 2.0;
        match self.scheme {
            ContaminationScheme::BernoulliHalf => {
                if u < half {
                    1.0
                } else {
                    0.0
                }
            }
            ContaminationScheme::Rademacher => {
                if u < half {
                    1.0
                } else if u < self.p {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContaminationRecord {
    pub spec: ContaminationSpec,
    pub seed: SeedRecord,
}

/// Observed series together with how it was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    #[serde(skip)]
    pub values: Vec<f64>,
    pub model: CovarianceModel,
    pub seed: SeedRecord,
    pub contamination: Option<ContaminationRecord>,
}

/// Sidecar metadata written next to a path CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathSidecar {
    pub n: usize,
    pub model: CovarianceModel,
    pub seed: SeedRecord,
    pub contamination: Option<ContaminationRecord>,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sidecar(&self) -> PathSidecar {
        PathSidecar {
            n: self.values.len(),
            model: self.model,
            seed: self.seed,
            contamination: self.contamination,
        }
    }

    /// Write the single-column CSV and its JSON sidecar (`<stem>.json`).
    pub fn write(&self, csv_path: &Path) -> Result<()> {
        io::write_column_csv(csv_path, "value", &self.values)?;
        io::write_json_atomic(&io::sidecar_path(csv_path), &self.sidecar())
    }

    /// Read a path CSV back together with its sidecar.
    pub fn read(csv_path: &Path) -> Result<SamplePath> {
        let values = io::read_column_csv(csv_path)?;
        let text = fs::read_to_string(io::sidecar_path(csv_path))?;
        let side: PathSidecar = serde_json::from_str(&text)?;
        side.model.validate()?;
        Ok(SamplePath {
            values,
            model: side.model,
            seed: side.seed,
            contamination: side.contamination,
        })
    }
}

/// Reusable simulator for many paths of one model and length.
#[derive(Debug, Clone)]
pub struct Simulator {
    model: CovarianceModel,
    embedding: CirculantEmbedding,
}

impl Simulator {
    pub fn new(model: CovarianceModel, n: usize) -> Result<Self> {
        let embedding = CirculantEmbedding::new(&model, n)?;
        Ok(Simulator { model, embedding })
    }

    pub fn model(&self) -> &CovarianceModel {
        &self.model
    }

    pub fn embedding(&self) -> &CirculantEmbedding {
        &self.embedding
    }

    /// Path number `stream` of the experiment seeded by `seed`.
    pub fn sample(&self, seed: u64, stream: u64) -> SamplePath {
        let mut rng = rng::stream(seed, Purpose::Simulation, stream);
        SamplePath {
            values: self.embedding.sample(&mut rng),
            model: self.model,
            seed: SeedRecord { seed, stream },
            contamination: None,
        }
    }
}

/// Exact stationary Gaussian path of length `n` (stream 0 of `seed`).
pub fn simulate_gaussian(model: &CovarianceModel, n: usize, seed: u64) -> Result<SamplePath> {
    Ok(Simulator::new(*model, n)?.sample(seed, 0))
}

/// Add outliers to `path`, drawing `W` from stream 0 of `seed`.
pub fn contaminate(path: &SamplePath, spec: &ContaminationSpec, seed: u64) -> Result<SamplePath> {
    contaminate_stream(path, spec, seed, 0)
}

pub fn contaminate_stream(
    path: &SamplePath,
    spec: &ContaminationSpec,
    seed: u64,
    stream: u64,
) -> Result<SamplePath> {
    spec.validate()?;
    let mut rng = rng::stream(seed, Purpose::Contamination, stream);
    let values = path
        .values
        .iter()
        .map(|&y| y + spec.omega * spec.draw(&mut rng))
        .collect();
    Ok(SamplePath {
        values,
        model: path.model,
        seed: path.seed,
        contamination: Some(ContaminationRecord {
            spec: *spec,
            seed: SeedRecord { seed, stream },
        }),
    })
}
