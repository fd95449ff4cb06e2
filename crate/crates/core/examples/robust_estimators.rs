//! Hodges-Lehmann, Shamos and Wilcoxon on clean and contaminated data, with
//! the limit laws attached.

use lrdu::estimators::{self, EstimatorKind};
use lrdu::lrd_sim::{contaminate, simulate_gaussian, ContaminationScheme, ContaminationSpec, CovarianceModel};

fn main() -> lrdu::Result<()> {
    let model = CovarianceModel::arfima(0.2, 0.35)?;
    let clean = simulate_gaussian(&model, 600, 42)?;
    let spec = ContaminationSpec::new(10.0, 0.1, ContaminationScheme::Rademacher)?;
    let dirty = contaminate(&clean, &spec, 42)?;

    println!("{:>9} {:>10} {:>10}", "", "clean", "outliers");
    for kind in EstimatorKind::ALL {
        let a = kind.estimate(&clean.values)?.estimate;
        let b = kind.estimate(&dirty.values)?.estimate;
        println!("{:>9} {a:>10.4} {b:>10.4}", kind.name());
    }

    let w = estimators::wilcoxon_signed_rank(&clean.values)?;
    println!("T_n = {} = {} + {}", w.t_n, w.positives, w.positive_pairs);

    for kind in [EstimatorKind::HodgesLehmann, EstimatorKind::Shamos] {
        let rep = kind.estimate(&clean.values)?.with_limit(&model)?;
        let lim = rep.limit.unwrap();
        println!(
            "{}: rate n^{:.3} x {:.4}, family {:?}",
            rep.name, lim.rate_exponent, lim.rate_constant, lim.family
        );
    }

    let paths = vec![("clean".to_string(), clean.values), ("dirty".to_string(), dirty.values)];
    let kinds = [EstimatorKind::Mean, EstimatorKind::HodgesLehmann];
    let rows = estimators::estimate_batch(&paths, &kinds)?;
    let names: Vec<String> = paths.into_iter().map(|p| p.0).collect();
    print!("{}", estimators::batch_csv(&names, &kinds, &rows)?);
    Ok(())
}
