//! Chambers-Mallows-Stuck draws checked against the distribution function.

use sagarch::hypothesis::kolmogorov_statistic;
use sagarch::stable::StableDist;

fn main() -> sagarch::Result<()> {
    let n = 20_000;
    for alpha in [0.7, 1.0, 1.5, 1.95] {
        let d = StableDist::new(alpha)?;
        let xs = d.sample(n, 42);
        let u: Vec<f64> = xs.iter().map(|&x| d.cdf(x)).collect::<sagarch::Result<_>>()?;
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        println!(
            "alpha {alpha:<5} median {:+.4}  90% quantile {:.4} (exact {:.4})  sqrt(n) KS {:.3}",
            sorted[n / 2],
            sorted[n * 9 / 10],
            d.quantile(0.9)?,
            kolmogorov_statistic(&u)
        );
    }
    Ok(())
}
