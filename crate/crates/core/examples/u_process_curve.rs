//! The empirical U-process of a path, its Hoeffding split and its quantiles.

use lrdu::hermite::Kernel;
use lrdu::lrd_sim::{simulate_gaussian, CovarianceModel};
use lrdu::uprocess::{self, PairTransform};

fn main() -> lrdu::Result<()> {
    let path = simulate_gaussian(&CovarianceModel::fgn(0.7)?, 2000, 1)?;
    let x = &path.values;
    let grid: Vec<f64> = (1..=8).map(|i| 0.25 * i as f64).collect();

    let kernel = Kernel::AbsDiff;
    let curve = uprocess::u_process(x, &kernel, &grid)?.decompose(x, &kernel, |r| kernel.u_closed(r).unwrap())?;
    println!("{:>6} {:>10} {:>10} {:>11} {:>11}", "r", "U_n", "U", "W_n", "R_n");
    for (i, &r) in grid.iter().enumerate() {
        println!(
            "{r:>6.2} {:>10.6} {:>10.6} {:>+11.2e} {:>+11.2e}",
            curve.u[i],
            kernel.u_closed(r).unwrap(),
            curve.w.as_ref().unwrap()[i],
            curve.rres.as_ref().unwrap()[i]
        );
    }

    for p in [0.25, 0.5, 0.75] {
        let q = uprocess::u_quantile(x, &kernel, p)?;
        println!("U_n^-1({p}) = {q:.6}, U_n at it = {:.6}", uprocess::u_stat(x, &kernel, q)?);
    }

    let k = uprocess::pair_count(x.len()) / 10;
    println!("10% pairwise average: {:.6}", uprocess::pairwise_kth(x, PairTransform::Average, k)?);
    Ok(())
}
