//! A small robustness experiment written to a directory of CSV and JSON files.

use std::path::PathBuf;

use lrdu::estimators::EstimatorKind;
use lrdu::lrd_sim::{ContaminationScheme, ContaminationSpec, CovarianceModel};
use lrdu::montecarlo::{self, McConfig};

fn main() -> lrdu::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("lrdu-mc"));
    let config = McConfig {
        model: CovarianceModel::arfima(0.2, 0.35)?,
        n: 600,
        reps: 200,
        estimators: vec![EstimatorKind::Mean, EstimatorKind::HodgesLehmann, EstimatorKind::Sd, EstimatorKind::Shamos],
        contamination: Some(ContaminationSpec::new(10.0, 0.1, ContaminationScheme::BernoulliHalf)?),
        seed: 2024,
        grid_sizes: None,
    };
    let res = montecarlo::run_experiment(&config)?;
    println!("{:>7} {:>9} {:>9} {:>9}", "", "bias", "variance", "std err");
    for (name, s) in &res.summaries {
        println!("{name:>7} {:>+9.4} {:>9.5} {:>9.5}", s.bias, s.variance, s.std_error);
    }
    for w in &res.warnings {
        println!("warning: {w}");
    }
    res.write_dir(&out)?;
    println!("wrote {}", out.display());
    Ok(())
}
