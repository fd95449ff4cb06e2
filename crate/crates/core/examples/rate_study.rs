//! Log-log regression of estimator spread on the sample size.

use lrdu::estimators::EstimatorKind;
use lrdu::lrd_sim::CovarianceModel;
use lrdu::montecarlo::{self, McConfig};

fn main() -> lrdu::Result<()> {
    let model = CovarianceModel::arfima(0.2, 0.35)?;
    let config = McConfig {
        model,
        n: 512,
        reps: 200,
        estimators: vec![EstimatorKind::HodgesLehmann, EstimatorKind::Shamos, EstimatorKind::Mean],
        contamination: None,
        seed: 5,
        grid_sizes: Some(vec![512, 1024, 2048, 4096, 8192]),
    };
    let study = montecarlo::run_rate_study(&config)?;
    let d = model.decay_exponent();
    println!("D = {d:.2}: rank-one slope {:.3}, rank-two slope {:.3}", -d / 2.0, -d);
    for (name, fit) in &study.fits {
        println!(
            "{name:>7}: slope {:+.3} [{:+.3}, {:+.3}] sds {:?}",
            fit.slope,
            fit.ci_low,
            fit.ci_high,
            study.sds[name].iter().map(|s| (s * 1e4).round() / 1e4).collect::<Vec<_>>()
        );
    }
    Ok(())
}
