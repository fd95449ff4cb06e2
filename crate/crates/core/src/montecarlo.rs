//! Replicated experiments over simulated (optionally contaminated) paths,
//! kernel density estimates, distribution distances and rate regressions.

use std::path::Path;

use indexmap::IndexMap;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::asymptotics::LimitDescriptor;
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::io;
use crate::lrd_sim::{contaminate_stream, ContaminationSpec, CovarianceModel, Simulator};
use crate::rng::{self, Purpose};
use crate::special::INV_SQRT_2PI;

/// Experiment description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub model: CovarianceModel,
    pub n: usize,
    pub reps: usize,
    pub estimators: Vec<EstimatorKind>,
    #[serde(default)]
    pub contamination: Option<ContaminationSpec>,
    pub seed: u64,
    #[serde(default)]
    pub grid_sizes: Option<Vec<usize>>,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.reps < 2 {
            return Err(Error::domain(format!("reps={} must be at least 2", self.reps)));
        }
        if self.n < 2 {
            return Err(Error::domain(format!("path length n={} must be at least 2", self.n)));
        }
        if self.estimators.is_empty() {
            return Err(Error::domain("no estimators requested"));
        }
        if let Some(c) = &self.contamination {
            c.validate()?;
        }
        if let Some(sizes) = &self.grid_sizes {
            if sizes.iter().any(|&n| n < 2) {
                return Err(Error::domain("grid sizes must be at least 2"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: McConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Gaussian-kernel density estimate on an even grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
    /// Set when every sample equals this value; the curve is then empty.
    pub point_mass: Option<f64>,
}

impl DensityCurve {
    /// Trapezoidal integral of the curve.
    pub fn integral(&self) -> f64 {
        self.x
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1]))
            .sum()
    }

    pub fn to_csv(&self) -> Result<String> {
        io::columns_csv(&["x", "density"], &[&self.x, &self.density])
    }
}

pub const MIN_DENSITY_SAMPLES: usize = 30;
const MIN_DENSITY_POINTS: usize = 512;
const MAX_DENSITY_POINTS: usize = 1 << 16;

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = if x.len() > 1 {
        x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Silverman's rule `1.06 sd N^{-1/5}`.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let (_, var) = mean_var(samples);
    1.06 * var.sqrt() * (samples.len() as f64).powf(-0.2)
}

/// Kernel density estimate; `bandwidth = None` uses Silverman's rule.
pub fn empirical_density(samples: &[f64], bandwidth: Option<f64>) -> Result<DensityCurve> {
    if samples.len() < MIN_DENSITY_SAMPLES {
        return Err(Error::domain(format!(
            "density estimation needs at least {MIN_DENSITY_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("samples must be finite"));
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(DensityCurve { x: Vec::new(), density: Vec::new(), bandwidth: 0.0, point_mass: Some(lo) });
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(Error::domain(format!("bandwidth {h} must be positive"))),
        None => silverman_bandwidth(samples),
    };
    let (a, b) = (lo - 4.0 * h, hi + 4.0 * h);
    let points = (((b - a) / (h / 4.0)).ceil() as usize + 1).clamp(MIN_DENSITY_POINTS, MAX_DENSITY_POINTS);
    let step = (b - a) / (points - 1) as f64;
    let x: Vec<f64> = (0..points).map(|i| a + step * i as f64).collect();
    let norm = INV_SQRT_2PI / (h * samples.len() as f64);
    let density = x
        .par_iter()
        .map(|&g| {
            samples
                .iter()
                .map(|&s| {
                    let z = (g - s) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect();
    Ok(DensityCurve { x, density, bandwidth: h, point_mass: None })
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("KS distance needs two nonempty samples"));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::domain("samples must not contain NaN"));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_unstable_by(f64::total_cmp);
    y.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best = 0.0_f64;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(best)
}

/// Least-squares fit of `log sd` on `log n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
}

/// Slope of `log sd` against `log n` with a 95% Student-t interval.
pub fn rate_regression(sizes: &[usize], sds: &[f64]) -> Result<RateFit> {
    if sizes.len() != sds.len() {
        return Err(Error::domain("sizes and standard deviations differ in length"));
    }
    if sizes.len() < 4 {
        return Err(Error::domain(format!("rate regression needs at least 4 sizes, got {}", sizes.len())));
    }
    let min = *sizes.iter().min().unwrap() as f64;
    let max = *sizes.iter().max().unwrap() as f64;
    if max < 4.0 * min {
        return Err(Error::domain("grid sizes must span at least two octaves"));
    }
    if sds.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::domain("standard deviations must be positive and finite"));
    }
    let x: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = sds.iter().map(|s| s.ln()).collect();
    let m = x.len() as f64;
    let xm = x.iter().sum::<f64>() / m;
    let ym = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let rss: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let df = m - 2.0;
    let std_error = (rss / df / sxx).sqrt();
    let level = 0.95;
    let t = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::numeric(e.to_string()))?
        .inverse_cdf(0.5 + level / 2.0);
    Ok(RateFit {
        slope,
        intercept,
        std_error,
        ci_low: slope - t * std_error,
        ci_high: slope + t * std_error,
        level,
    })
}

/// Per-estimator summary of the draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub target: f64,
    pub mean: f64,
    pub bias: f64,
    pub variance: f64,
    pub std_error: f64,
    pub failures: usize,
    pub limit: Option<LimitDescriptor>,
    /// Factor applied to `estimate - target` for the density curve.
    pub normalization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub config: McConfig,
    pub draws: IndexMap<String, Vec<f64>>,
    pub summaries: IndexMap<String, EstimatorSummary>,
    #[serde(skip)]
    pub densities: IndexMap<String, DensityCurve>,
    pub warnings: Vec<String>,
}

impl McResult {
    /// Draws of `normalization * (estimate - target)`.
    pub fn standardized(&self, name: &str) -> Option<Vec<f64>> {
        let s = self.summaries.get(name)?;
        Some(self.draws[name].iter().map(|v| s.normalization * (v - s.target)).collect())
    }

    /// Write `draws.csv`, `summary.json` and `density_<name>.csv` into `dir`.
    /// Files are staged in a sibling temporary directory and moved into place.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        let parent = match dir.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => std::path::PathBuf::from("."),
        };
        std::fs::create_dir_all(&parent)?;
        let stage = tempfile::Builder::new().prefix(".lrdu-mc").tempdir_in(&parent)?;
        let names: Vec<&str> = self.draws.keys().map(String::as_str).collect();
        let cols: Vec<&[f64]> = self.draws.values().map(Vec::as_slice).collect();
        io::write_columns_csv(&stage.path().join("draws.csv"), &names, &cols)?;
        io::write_json_atomic(&stage.path().join("summary.json"), self)?;
        for (name, curve) in &self.densities {
            io::write_atomic(&stage.path().join(format!("density_{name}.csv")), curve.to_csv()?.as_bytes())?;
        }
        std::fs::create_dir_all(dir)?;
        for entry in std::fs::read_dir(stage.path())? {
            let entry = entry?;
            std::fs::rename(entry.path(), dir.join(entry.file_name()))?;
        }
        Ok(())
    }
}

/// Raw replication draws: `draws[e][r]` for estimator `e`, replication `r`.
pub fn replicate(config: &McConfig) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    let sim = Simulator::new(config.model, config.n)?;
    let per_rep: Vec<Vec<f64>> = (0..config.reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut path = sim.sample(config.seed, r);
            if let Some(spec) = &config.contamination {
                path = contaminate_stream(&path, spec, config.seed, r).expect("validated contamination");
            }
            config
                .estimators
                .iter()
                .map(|k| k.estimate(&path.values).map(|e| e.estimate).unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    Ok((0..config.estimators.len())
        .map(|e| per_rep.iter().map(|row| row[e]).collect())
        .collect())
}

/// Run all replications and summarise each estimator.
pub fn run_experiment(config: &McConfig) -> Result<McResult> {
    let raw = replicate(config)?;
    let mut draws = IndexMap::new();
    let mut summaries = IndexMap::new();
    let mut densities = IndexMap::new();
    let mut warnings = Vec::new();
    for (kind, values) in config.estimators.iter().zip(raw) {
        let name = kind.name().to_string();
        let ok: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        let failures = values.len() - ok.len();
        if failures > 0 {
            warnings.push(format!("{name}: {failures} replications failed"));
        }
        let (mean, variance) = if ok.is_empty() { (f64::NAN, f64::NAN) } else { mean_var(&ok) };
        let limit = match kind.limit(&config.model) {
            Ok(l) => Some(l),
            Err(e) => {
                warnings.push(format!("{name}: no limit law ({e})"));
                None
            }
        };
        let normalization = limit.map(|l| l.normalization(config.n)).unwrap_or(1.0);
        let target = kind.target();
        let standardized: Vec<f64> = ok.iter().map(|v| normalization * (v - target)).collect();
        match empirical_density(&standardized, None) {
            Ok(curve) => {
                if curve.point_mass.is_some() {
                    warnings.push(format!("{name}: all draws equal; density is a point mass"));
                }
                densities.insert(name.clone(), curve);
            }
            Err(e) => warnings.push(format!("{name}: no density ({e})")),
        }
        summaries.insert(
            name.clone(),
            EstimatorSummary {
                target,
                mean,
                bias: mean - target,
                variance,
                std_error: (variance / ok.len() as f64).sqrt(),
                failures,
                limit,
                normalization,
            },
        );
        draws.insert(name, values);
    }
    Ok(McResult { config: config.clone(), draws, summaries, densities, warnings })
}

/// Per-size standard deviations and the fitted slope for each estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateStudy {
    pub sizes: Vec<usize>,
    pub sds: IndexMap<String, Vec<f64>>,
    pub fits: IndexMap<String, RateFit>,
}

/// Seed used for the experiment at path length `n` in a rate study.
pub fn size_seed(seed: u64, n: usize) -> u64 {
    rng::stream(seed, Purpose::Auxiliary, n as u64).next_u64()
}

/// Replicate at every size in `config.grid_sizes` and regress the spread.
pub fn run_rate_study(config: &McConfig) -> Result<RateStudy> {
    let sizes = config
        .grid_sizes
        .clone()
        .ok_or_else(|| Error::domain("rate study needs grid_sizes"))?;
    let mut sds: IndexMap<String, Vec<f64>> =
        config.estimators.iter().map(|k| (k.name().to_string(), Vec::new())).collect();
    for &n in &sizes {
        let cfg = McConfig { n, seed: size_seed(config.seed, n), grid_sizes: None, ..config.clone() };
        for (kind, values) in config.estimators.iter().zip(replicate(&cfg)?) {
            let ok: Vec<f64> = values.into_iter().filter(|v| v.is_finite()).collect();
            sds[kind.name()].push(mean_var(&ok).1.sqrt());
        }
    }
    let mut fits = IndexMap::new();
    for (name, s) in &sds {
        fits.insert(name.clone(), rate_regression(&sizes, s)?);
    }
    Ok(RateStudy { sizes, sds, fits })
}

/// Sample cumulants of orders 2 and 3 with delta-method standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleCumulants {
    pub mean: f64,
    pub k2: f64,
    pub k3: f64,
    pub se_k2: f64,
    pub se_k3: f64,
}

pub fn sample_cumulants(x: &[f64]) -> Result<SampleCumulants> {
    if x.len() < 8 {
        return Err(Error::domain("need at least 8 samples for cumulant errors"));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let m = |k: i32| x.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / n;
    let (m2, m3, m4, m6) = (m(2), m(3), m(4), m(6));
    let k2 = m2 * n / (n - 1.0);
    let k3 = m3 * n * n / ((n - 1.0) * (n - 2.0));
    let se_k2 = ((m4 - m2 * m2) / n).sqrt();
    let se_k3 = ((m6 - m3 * m3 - 6.0 * m4 * m2 + 9.0 * m2.powi(3)) / n).max(0.0).sqrt();
    Ok(SampleCumulants { mean, k2, k3, se_k2, se_k3 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrd_sim::ContaminationScheme;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, seed: u64, shift: f64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).map(|z: f64| z + shift).collect()
    }

    #[test]
    fn ks_examples() {
        let x = normals(100, 1, 0.0);
        assert_eq!(ks_distance(&x, &x).unwrap(), 0.0);
        assert!(ks_distance(&normals(5000, 2, 0.0), &normals(5000, 3, 0.0)).unwrap() < 0.04);
        let shifted = ks_distance(&normals(5000, 4, 0.0), &normals(5000, 5, 0.5)).unwrap();
        // sup |Phi(x) - Phi(x - 0.5)| = 2 Phi(0.25) - 1
        let exact = 2.0 * crate::special::big_phi(0.25) - 1.0;
        assert!((shifted - exact).abs() < 0.03, "{shifted} vs {exact}");
        assert_eq!(ks_distance(&[0.0, 1.0], &[2.0, 3.0]).unwrap(), 1.0);
        assert!(ks_distance(&[], &[1.0]).is_err());
    }

    #[test]
    fn density_examples() {
        let x = normals(5000, 7, 0.0);
        let c = empirical_density(&x, None).unwrap();
        assert!((c.integral() - 1.0).abs() < 1e-3);
        let worst = c
            .x
            .iter()
            .zip(&c.density)
            .map(|(&x, &f)| (f - crate::special::phi(x)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.05, "{worst}");
        let flat = empirical_density(&[1.5; 40], None).unwrap();
        assert_eq!(flat.point_mass, Some(1.5));
        assert!(empirical_density(&[1.0; 10], None).is_err());
    }

    #[test]
    fn regression_examples() {
        let sizes = [512, 1024, 2048, 4096];
        let sds: Vec<f64> = sizes.iter().map(|&n| 3.0 * (n as f64).powf(-0.5)).collect();
        let fit = rate_regression(&sizes, &sds).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!(fit.ci_low <= fit.slope && fit.slope <= fit.ci_high);
        assert!(rate_regression(&sizes[..3], &sds[..3]).is_err());
        assert!(rate_regression(&[512, 600, 700, 800], &sds).is_err());
    }

    #[test]
    fn config_json_and_validation() {
        let text = r#"{"model":{"kind":"arfima","params":{"phi":0.2,"d":0.1}},"n":64,"reps":2,
            "estimators":["hl","mean"],"seed":3}"#;
        let cfg = McConfig::from_json(text).unwrap();
        assert_eq!(cfg.estimators, vec![EstimatorKind::HodgesLehmann, EstimatorKind::Mean]);
        assert!(McConfig::from_json(&text.replace("\"reps\":2", "\"reps\":1")).is_err());
        assert!(McConfig::from_json(&text.replace("\"hl\"", "\"qn\"")).is_err());
    }

    #[test]
    fn experiment_is_deterministic() {
        let cfg = McConfig {
            model: CovarianceModel::arfima(0.2, 0.1).unwrap(),
            n: 100,
            reps: 40,
            estimators: vec![EstimatorKind::HodgesLehmann, EstimatorKind::Sd],
            contamination: Some(ContaminationSpec::new(10.0, 0.1, ContaminationScheme::Rademacher).unwrap()),
            seed: 9,
            grid_sizes: None,
        };
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.draws["hl"].len(), 40);
        assert!((a.densities["hl"].integral() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn cumulants_of_known_sample() {
        let x = normals(20000, 12, 0.0);
        let c = sample_cumulants(&x).unwrap();
        assert!((c.k2 - 1.0).abs() < 4.0 * c.se_k2);
        assert!(c.k3.abs() < 4.0 * c.se_k3);
    }
}
