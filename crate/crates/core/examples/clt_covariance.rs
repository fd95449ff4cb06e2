//! Gaussian limits in the weakly dependent regime D > 1/2.

use lrdu::asymptotics::{self, CltOptions};
use lrdu::estimators::{correlation_integral_limit, CurveLimit};
use lrdu::hermite::Kernel;
use lrdu::lrd_sim::CovarianceModel;

fn main() -> lrdu::Result<()> {
    let model = CovarianceModel::fgn_with_decay(0.8)?;
    let opts = CltOptions::default();

    let c = asymptotics::clt_covariance(&Kernel::AbsDiff, 1.0, 1.0, &model, &opts)?;
    println!("Var W(1) = {:.6} (tail bound {:.1e})", c.value, c.tail_bound);
    println!("Shamos sqrt(n) variance: {:.5}", asymptotics::shamos_clt_variance(&model, &opts)?);
    println!("sd sqrt(n) variance:     {:.5}", asymptotics::sd_clt_variance(&model, &opts)?);

    if let CurveLimit::Gaussian { grid, covariance } = correlation_integral_limit(&[0.5, 1.0, 2.0], &model, &opts)? {
        for (r, row) in grid.iter().zip(&covariance) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.5}")).collect();
            println!("r = {r}: {}", cells.join(" "));
        }
    }

    // the same request in the long-memory regime is refused
    let lrd = CovarianceModel::fgn(0.85)?;
    if let Err(e) = asymptotics::clt_covariance(&Kernel::AbsDiff, 1.0, 1.0, &lrd, &opts) {
        println!("H = 0.85: {e}");
    }
    Ok(())
}
