//! Hermite coefficients and ranks of the pair kernels, including a custom one.

use lrdu::hermite::{self, Kernel, DEFAULT_RANK_TOL};

fn main() -> lrdu::Result<()> {
    let r = 1.0;
    for kernel in [Kernel::PairAverage, Kernel::AbsDiff] {
        let table = hermite::alpha_table(&kernel, 4, r)?;
        println!("{} at r = {r}:", kernel.name());
        for p in 0..=2 {
            let row: Vec<String> = (0..=2).map(|q| format!("{:+.6}", table.get(p, q))).collect();
            println!("  alpha[{p}][..] = {}", row.join(" "));
        }
    }

    let grid = [-1.0, 0.5, 1.0, 2.0];
    for kernel in [Kernel::PairAverage, Kernel::PairSum, Kernel::AbsDiff] {
        let rep = hermite::hermite_rank(&kernel, &grid, 4, DEFAULT_RANK_TOL)?;
        println!("{:>12}: m = {}, tau = {:?}", rep.kernel, rep.m, rep.tau);
    }

    // |x| + |y| is even in each argument, so the linear coefficients vanish
    let l1 = Kernel::custom("l1_norm", |x: f64, y: f64| x.abs() + y.abs());
    let rep = hermite::hermite_rank(&l1, &[1.0, 2.0], 4, 1e-4)?;
    println!("{:>12}: m = {}, tau = {:?}", rep.kernel, rep.m, rep.tau);
    println!("U(1) for l1_norm = {:.6}", l1.u(1.0)?);

    // for max(x, y) the sublevel set in y vanishes abruptly once x > r
    let max_kernel = Kernel::custom("max", f64::max);
    let t = hermite::alpha_table(&max_kernel, 2, 0.0)?;
    println!("max at r = 0: alpha00 = {:.8}, alpha10 = {:.8} ({} outer nodes)", t.get(0, 0), t.get(1, 0), t.nodes);
    Ok(())
}
