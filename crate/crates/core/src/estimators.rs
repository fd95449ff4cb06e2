//! Location and scale estimators built on pairwise order statistics, the
//! Wilcoxon signed-rank statistic, the sample correlation integral, and the
//! classical mean and standard deviation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{self, CltOptions, LimitDescriptor};
use crate::error::{Error, Result};
use crate::hermite::Kernel;
use crate::io;
use crate::lrd_sim::CovarianceModel;
use crate::special::phi_dot;
use crate::uprocess::{self, pair_count, PairTransform, UProcessCurve};

/// Point estimate with an optional limiting-law descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub name: String,
    pub estimate: f64,
    pub n: usize,
    pub limit: Option<LimitDescriptor>,
}

impl EstimatorReport {
    fn bare(kind: EstimatorKind, estimate: f64, n: usize) -> Self {
        EstimatorReport { name: kind.name().to_string(), estimate, n, limit: None }
    }

    /// Attach the limit law under `model`.
    pub fn with_limit(mut self, model: &CovarianceModel) -> Result<Self> {
        let kind: EstimatorKind = self.name.parse()?;
        self.limit = Some(kind.limit(model)?);
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    #[serde(rename = "hl")]
    HodgesLehmann,
    Shamos,
    Mean,
    Sd,
    Wilcoxon,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::HodgesLehmann,
        EstimatorKind::Shamos,
        EstimatorKind::Mean,
        EstimatorKind::Sd,
        EstimatorKind::Wilcoxon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::HodgesLehmann => "hl",
            EstimatorKind::Shamos => "shamos",
            EstimatorKind::Mean => "mean",
            EstimatorKind::Sd => "sd",
            EstimatorKind::Wilcoxon => "wilcoxon",
        }
    }

    /// Value estimated on a clean unit-variance centered path.
    pub fn target(self) -> f64 {
        match self {
            EstimatorKind::HodgesLehmann | EstimatorKind::Mean => 0.0,
            EstimatorKind::Shamos | EstimatorKind::Sd => 1.0,
            EstimatorKind::Wilcoxon => 0.5,
        }
    }

    pub fn estimate(self, data: &[f64]) -> Result<EstimatorReport> {
        match self {
            EstimatorKind::HodgesLehmann => hodges_lehmann(data),
            EstimatorKind::Shamos => shamos(data),
            EstimatorKind::Mean => sample_mean(data),
            EstimatorKind::Sd => sample_sd(data),
            EstimatorKind::Wilcoxon => Ok(wilcoxon_signed_rank(data)?.report()),
        }
    }

    /// Limiting law for unit-variance data from `model`.
    pub fn limit(self, model: &CovarianceModel) -> Result<LimitDescriptor> {
        model.validate()?;
        let d = model.decay_exponent();
        match self {
            EstimatorKind::HodgesLehmann | EstimatorKind::Mean => {
                LimitDescriptor::rank_one(model, asymptotics::var_hl_normalized(d)?)
            }
            EstimatorKind::Wilcoxon => LimitDescriptor::rank_one(
                model,
                asymptotics::var_hl_normalized(d)? / std::f64::consts::PI,
            ),
            EstimatorKind::Shamos | EstimatorKind::Sd if d < 0.5 => {
                LimitDescriptor::rank_two(model, 1.0, -1.0, 0.5)
            }
            EstimatorKind::Shamos if d > 0.5 => LimitDescriptor::root_n(
                model,
                asymptotics::shamos_clt_variance(model, &CltOptions::default())?,
            ),
            EstimatorKind::Sd if d > 0.5 => {
                LimitDescriptor::root_n(model, asymptotics::sd_clt_variance(model, &CltOptions::default())?)
            }
            _ => Err(Error::regime(format!(
                "D={d}: no limit law for {} at the boundary D = 1/2",
                self.name()
            ))),
        }
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hl" | "hodges_lehmann" | "hodges-lehmann" => Ok(EstimatorKind::HodgesLehmann),
            "shamos" | "bl" => Ok(EstimatorKind::Shamos),
            "mean" => Ok(EstimatorKind::Mean),
            "sd" | "std" => Ok(EstimatorKind::Sd),
            "wilcoxon" => Ok(EstimatorKind::Wilcoxon),
            other => Err(Error::domain(format!("unknown estimator '{other}'"))),
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parse a comma-separated estimator list.
pub fn parse_estimators(list: &str) -> Result<Vec<EstimatorKind>> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

fn need(data: &[f64], min: usize) -> Result<()> {
    if data.len() < min {
        return Err(Error::domain(format!("need at least {min} observations, got {}", data.len())));
    }
    Ok(())
}

fn median_rank(n: usize) -> u64 {
    pair_count(n).div_ceil(2)
}

/// Median of the pairwise averages `(X_i + X_j)/2`, `i < j`.
pub fn hodges_lehmann(data: &[f64]) -> Result<EstimatorReport> {
    need(data, 2)?;
    let est = uprocess::pairwise_kth(data, PairTransform::Average, median_rank(data.len()))?;
    Ok(EstimatorReport::bare(EstimatorKind::HodgesLehmann, est, data.len()))
}

/// `c` times the median of `|X_i - X_j|`, `i < j`.
pub fn shamos(data: &[f64]) -> Result<EstimatorReport> {
    need(data, 2)?;
    let med = uprocess::pairwise_kth(data, PairTransform::AbsDiff, median_rank(data.len()))?;
    Ok(EstimatorReport::bare(
        EstimatorKind::Shamos,
        asymptotics::shamos_constant() * med,
        data.len(),
    ))
}

pub fn sample_mean(data: &[f64]) -> Result<EstimatorReport> {
    need(data, 1)?;
    let mean = data.iter().sum::<f64>() / data.len() as f64;
    Ok(EstimatorReport::bare(EstimatorKind::Mean, mean, data.len()))
}

/// Standard deviation with divisor `n - 1`.
pub fn sample_sd(data: &[f64]) -> Result<EstimatorReport> {
    need(data, 2)?;
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let ss: f64 = data.iter().map(|x| (x - mean) * (x - mean)).sum();
    Ok(EstimatorReport::bare(EstimatorKind::Sd, (ss / (n - 1.0)).sqrt(), data.len()))
}

/// `T_n = n U_{n,1} + n(n-1)/2 U_{n,2}` with its two counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonStatistic {
    pub n: usize,
    pub t_n: u64,
    pub positives: u64,
    pub positive_pairs: u64,
    pub u_n1: f64,
    /// Zero when `n = 1`.
    pub u_n2: f64,
}

impl WilcoxonStatistic {
    /// `2 T_n / (n(n-1)) - 1/(n-1)`, which tends to 1/2 under symmetry.
    pub fn centered_form(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        let n = self.n as f64;
        2.0 * self.t_n as f64 / (n * (n - 1.0)) - 1.0 / (n - 1.0)
    }

    pub fn report(&self) -> EstimatorReport {
        EstimatorReport::bare(EstimatorKind::Wilcoxon, self.centered_form(), self.n)
    }
}

/// Signed-rank statistic through its pairwise form, in `O(n log n)`.
pub fn wilcoxon_signed_rank(data: &[f64]) -> Result<WilcoxonStatistic> {
    need(data, 1)?;
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("observations must be finite"));
    }
    let n = data.len();
    let positives = data.iter().filter(|&&x| x > 0.0).count() as u64;
    let pairs = pair_count(n);
    let positive_pairs = if n < 2 {
        0
    } else {
        pairs - uprocess::count_pairs_le(data, &Kernel::PairSum, 0.0)?
    };
    Ok(WilcoxonStatistic {
        n,
        t_n: positives + positive_pairs,
        positives,
        positive_pairs,
        u_n1: positives as f64 / n as f64,
        u_n2: if pairs == 0 { 0.0 } else { positive_pairs as f64 / pairs as f64 },
    })
}

/// `U_n(r)` for the kernel `|x - y|`.
pub fn correlation_integral(data: &[f64], grid: &[f64]) -> Result<UProcessCurve> {
    uprocess::u_process(data, &Kernel::AbsDiff, grid)
}

/// Limit of the normalised correlation integral over a grid avoiding 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CurveLimit {
    /// `sqrt(n)(U_n - U)` tends to a centered Gaussian process with this covariance.
    Gaussian { grid: Vec<f64>, covariance: Vec<Vec<f64>> },
    /// `k(D) n^D / L (U_n(r) - U(r))` tends to `coefficients[r] (Z2 - Z1^2)`.
    RosenblattMix { grid: Vec<f64>, coefficients: Vec<f64>, descriptor: LimitDescriptor },
}

pub fn correlation_integral_limit(grid: &[f64], model: &CovarianceModel, opts: &CltOptions) -> Result<CurveLimit> {
    if grid.iter().any(|r| !(r.abs() > 1e-8)) {
        return Err(Error::domain("limit descriptors need a grid bounded away from 0"));
    }
    model.validate()?;
    let d = model.decay_exponent();
    if d < 0.5 {
        let coefficients = grid.iter().map(|&r| phi_dot(r / std::f64::consts::SQRT_2)).collect();
        Ok(CurveLimit::RosenblattMix {
            grid: grid.to_vec(),
            coefficients,
            descriptor: LimitDescriptor::rank_two(model, 1.0, -1.0, 1.0)?,
        })
    } else {
        let mut covariance = vec![vec![0.0; grid.len()]; grid.len()];
        for i in 0..grid.len() {
            for j in i..grid.len() {
                let v = asymptotics::clt_covariance(&Kernel::AbsDiff, grid[i], grid[j], model, opts)?.value;
                covariance[i][j] = v;
                covariance[j][i] = v;
            }
        }
        Ok(CurveLimit::Gaussian { grid: grid.to_vec(), covariance })
    }
}

/// Apply each estimator to each named path.
pub fn estimate_batch(paths: &[(String, Vec<f64>)], kinds: &[EstimatorKind]) -> Result<Vec<Vec<f64>>> {
    paths
        .iter()
        .map(|(_, data)| kinds.iter().map(|k| Ok(k.estimate(data)?.estimate)).collect())
        .collect()
}

/// CSV with one row per path: `path,<estimator>...`.
pub fn batch_csv(names: &[String], kinds: &[EstimatorKind], rows: &[Vec<f64>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["path".to_string()];
    header.extend(kinds.iter().map(|k| k.name().to_string()));
    w.write_record(&header)?;
    for (name, row) in names.iter().zip(rows) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(|&v| io::fmt_f64(v)));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        assert_eq!(hodges_lehmann(&[1.0, 2.0, 3.0]).unwrap().estimate, 2.0);
        let c = asymptotics::shamos_constant();
        assert_eq!(shamos(&[0.0, 1.0]).unwrap().estimate, c);
        assert_eq!(sample_mean(&[1.0, 2.0, 3.0]).unwrap().estimate, 2.0);
        assert_eq!(sample_sd(&[1.0, 2.0, 3.0]).unwrap().estimate, 1.0);
        assert!(hodges_lehmann(&[1.0]).is_err());
        assert!(shamos(&[1.0]).is_err());
        assert!(sample_sd(&[1.0]).is_err());
    }

    #[test]
    fn wilcoxon_examples() {
        let w = wilcoxon_signed_rank(&[1.0, -2.0, 3.0]).unwrap();
        assert_eq!((w.positives, w.positive_pairs, w.t_n), (2, 2, 4));
        let w = wilcoxon_signed_rank(&[-1.0, -0.5, -3.0]).unwrap();
        assert_eq!(w.t_n, 0);
        let w = wilcoxon_signed_rank(&[2.0]).unwrap();
        assert_eq!((w.t_n, w.u_n1, w.u_n2), (1, 1.0, 0.0));
        assert!(wilcoxon_signed_rank(&[]).is_err());
        // zeros count as non-positive
        let w = wilcoxon_signed_rank(&[0.0, 0.0]).unwrap();
        assert_eq!(w.t_n, 0);
    }

    #[test]
    fn correlation_integral_examples() {
        let c = correlation_integral(&[1.0, 2.0, 4.0], &[2.0, 10.0]).unwrap();
        assert!((c.u[0] - 4.0 / 6.0).abs() < 1e-15);
        assert_eq!(c.u[1], 1.0);
    }

    #[test]
    fn names_round_trip() {
        for k in EstimatorKind::ALL {
            assert_eq!(k.name().parse::<EstimatorKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
        assert!(parse_estimators("hl,foo").is_err());
        assert_eq!(parse_estimators("hl, sd").unwrap().len(), 2);
    }

    #[test]
    fn limit_descriptors_follow_regimes() {
        let lrd = CovarianceModel::arfima(0.2, 0.35).unwrap();
        let d = lrd.decay_exponent();
        let hl = EstimatorKind::HodgesLehmann.limit(&lrd).unwrap();
        assert!((hl.rate_exponent - d / 2.0).abs() < 1e-15);
        let sh = EstimatorKind::Shamos.limit(&lrd).unwrap();
        assert!((sh.rate_exponent - d).abs() < 1e-15);
        let weak = CovarianceModel::fgn(0.6).unwrap();
        let sh = EstimatorKind::Shamos.limit(&weak).unwrap();
        assert_eq!(sh.rate_exponent, 0.5);
        assert!(matches!(sh.family, asymptotics::LimitFamily::Gaussian { variance } if variance > 0.0));
        let edge = CovarianceModel::fgn(0.75).unwrap();
        assert!(matches!(EstimatorKind::Sd.limit(&edge), Err(Error::Regime(_))));
    }

    #[test]
    fn batch_output() {
        let paths = vec![("a".to_string(), vec![1.0, 2.0, 3.0]), ("b".to_string(), vec![0.0, 2.0, 4.0])];
        let kinds = [EstimatorKind::Mean, EstimatorKind::HodgesLehmann];
        let rows = estimate_batch(&paths, &kinds).unwrap();
        assert_eq!(rows, vec![vec![2.0, 2.0], vec![2.0, 2.0]]);
        let names: Vec<String> = paths.iter().map(|p| p.0.clone()).collect();
        let text = batch_csv(&names, &kinds, &rows).unwrap();
        assert!(text.starts_with("path,mean,hl\na,"));
    }

    #[test]
    fn curve_limit_regimes() {
        let grid = [0.5, 1.0];
        let lrd = CovarianceModel::fgn(0.85).unwrap();
        assert!(matches!(
            correlation_integral_limit(&grid, &lrd, &CltOptions::default()).unwrap(),
            CurveLimit::RosenblattMix { .. }
        ));
        let weak = CovarianceModel::fgn(0.6).unwrap();
        match correlation_integral_limit(&grid, &weak, &CltOptions::default()).unwrap() {
            CurveLimit::Gaussian { covariance, .. } => {
                assert!(covariance[0][0] > 0.0 && covariance[1][1] > 0.0);
                assert_eq!(covariance[0][1], covariance[1][0]);
            }
            other => panic!("{other:?}"),
        }
        assert!(correlation_integral_limit(&[0.0, 1.0], &weak, &CltOptions::default()).is_err());
    }
}
