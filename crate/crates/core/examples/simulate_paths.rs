//! Exact simulation of long-memory Gaussian paths with additive outliers.
//!
//! Run with `cargo run --example simulate_paths [OUT_DIR]`.

use std::path::PathBuf;

use lrdu::lrd_sim::{contaminate, ContaminationScheme, ContaminationSpec, CovarianceModel, SamplePath, Simulator};

fn main() -> lrdu::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&out)?;

    for model in [CovarianceModel::fgn(0.85)?, CovarianceModel::arfima(0.2, 0.35)?] {
        println!(
            "{model:?}: D = {:.3}, L = {:.4}, rho(1..4) = {:?}",
            model.decay_exponent(),
            model.l_const(),
            (1..=4).map(|k| (model.rho(k) * 1e4).round() / 1e4).collect::<Vec<_>>()
        );
    }

    // one simulator serves many replications
    let sim = Simulator::new(CovarianceModel::arfima(0.2, 0.35)?, 600)?;
    let paths: Vec<SamplePath> = (0..3).map(|r| sim.sample(7, r)).collect();
    for p in &paths {
        let mean = p.values.iter().sum::<f64>() / p.len() as f64;
        println!("stream {}: mean {mean:+.4}", p.seed.stream);
    }

    let spec = ContaminationSpec::new(10.0, 0.1, ContaminationScheme::BernoulliHalf)?;
    let dirty = contaminate(&paths[0], &spec, 7)?;
    let moved = dirty.values.iter().zip(&paths[0].values).filter(|(a, b)| a != b).count();
    println!("contaminated {moved} of {} points, expected shift {}", dirty.len(), spec.mean_shift());

    let file = out.join("arfima_path.csv");
    dirty.write(&file)?;
    let back = SamplePath::read(&file)?;
    assert_eq!(back.values, dirty.values);
    println!("wrote {} and its sidecar", file.display());
    Ok(())
}
