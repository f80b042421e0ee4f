//! Density, distribution function, quantiles and log-density derivatives of
//! the standardized symmetric stable law.

use sagarch::stable::StableDist;

fn main() -> sagarch::Result<()> {
    for alpha in [0.8, 1.0, 1.5, 1.9] {
        let d = StableDist::new(alpha)?;
        println!("alpha = {alpha}");
        println!("  {:>6} {:>12} {:>12} {:>12} {:>12}", "x", "pdf", "cdf", "dlogf/dx", "dlogf/dalpha");
        for x in [0.0, 0.5, 2.0, 10.0, 50.0] {
            println!(
                "  {x:>6} {:>12.6e} {:>12.8} {:>12.6} {:>12.6}",
                d.pdf(x)?,
                d.cdf(x)?,
                d.dlogf_dx(x)?,
                d.dlogf_dalpha(x)?
            );
        }
        println!("  quantiles 0.9 / 0.99: {:.6} / {:.6}", d.quantile(0.9)?, d.quantile(0.99)?);
    }
    Ok(())
}
