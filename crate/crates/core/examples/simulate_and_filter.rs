//! Simulate a path, then run the volatility filter at the true parameter.

use sagarch::model::{filter, simulate, ParamVector};

fn main() -> sagarch::Result<()> {
    let theta = ParamVector::new(0.2, 0.1, 0.2, 0.5, 1.5)?;
    let path = simulate(&theta, 1000, 7, 500)?;
    let y = &path.series;
    let out = filter(&theta, y);
    println!("n = {}, truncated = {}", y.n(), path.truncated);
    println!("{:>4} {:>12} {:>12} {:>12} {:>12}", "t", "y_t", "sigma2_t", "eta_t", "eta_hat_t");
    for t in [1, 2, 10, 100, 1000] {
        println!(
            "{t:>4} {:>12.5} {:>12.5} {:>12.5} {:>12.5}",
            y.values()[t],
            out.sigma2[t - 1],
            path.innovations[t - 1],
            out.residuals[t - 1]
        );
    }
    println!("d sigma2_1000 / d(omega, phi+, phi-, psi) = {:?}", out.dsigma2[999]);
    Ok(())
}
