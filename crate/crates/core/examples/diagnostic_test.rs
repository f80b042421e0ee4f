//! Goodness-of-fit test of the innovation exponent via the transformed
//! Kolmogorov statistic.

use sagarch::hypothesis::diagnostic_test;
use sagarch::mle::FitConfig;
use sagarch::model::{simulate, ParamVector};

fn main() -> sagarch::Result<()> {
    let theta = ParamVector::new(0.2, 0.1, 0.2, 0.5, 1.5)?;
    let y = simulate(&theta, 1000, 4, 500)?.series;
    for alpha_star in [1.0, 1.3, 1.5, 1.7, 1.9] {
        let d = diagnostic_test(&y, alpha_star, 0.05, &FitConfig::default())?;
        let r = &d.report;
        println!(
            "alpha* {alpha_star}: T^D {:.3} (critical {:.4}), p-value {:.3}, reject {}",
            r.statistic,
            r.critical_value.unwrap(),
            r.p_value.unwrap(),
            r.reject
        );
    }
    Ok(())
}
