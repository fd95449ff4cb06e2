//! Constants, cumulants and samples of the non-central limit laws.

use lrdu::asymptotics::{self, CumulantMethod, CumulantRequest, LimitLawConfig, LimitTable};
use lrdu::montecarlo::sample_cumulants;

fn main() -> lrdu::Result<()> {
    for d in [0.2, 0.3, 0.4, 0.7] {
        let t = LimitTable::new(d)?;
        println!(
            "D = {d}: k(D) = {:.5}, Var Z1 = {:.5}, Var HL = {:.5}, Var Z2 = {:?}",
            t.k_d, t.var_z1, t.var_hl_normalized, t.var_z2
        );
    }

    let d = 0.3;
    for p in 2..=4 {
        let v = asymptotics::limit_cumulant(&CumulantRequest::quadrature(p, 1.0, -1.0, d))?;
        println!("kappa_{p}(Z2 - Z1^2) = {:.4}", v.value);
    }
    let mc = asymptotics::limit_cumulant(&CumulantRequest {
        p: 3,
        a: 1.0,
        b: -1.0,
        d,
        method: CumulantMethod::McIntegration { samples: 200_000, seed: 1 },
    })?;
    println!("kappa_3 by Monte Carlo = {:.4} +- {:.4}", mc.value, mc.std_error);

    let draws = asymptotics::sample_limit_law(&LimitLawConfig::new(1.0, -1.0, d, 4096, 2000, 3))?;
    let c = sample_cumulants(&draws)?;
    println!("sampler: k2 = {:.3} +- {:.3}, k3 = {:.1} +- {:.1}", c.k2, c.se_k2, c.k3, c.se_k3);

    match asymptotics::var_z2(0.6) {
        Err(e) => println!("D = 0.6: {e}"),
        Ok(v) => println!("unexpected {v}"),
    }
    Ok(())
}
