//! Strict stationarity and explosivity tests on a stationary and an
//! explosive path.

use sagarch::hypothesis::stationarity_test;
use sagarch::mle::{fit, FitConfig, FitMode};
use sagarch::model::{simulate, ParamVector};

fn main() -> sagarch::Result<()> {
    let cfg = FitConfig {
        mode: FitMode::Free,
        ..FitConfig::default()
    };
    for theta in [ParamVector::new(0.2, 0.1, 0.2, 0.5, 1.5)?, ParamVector::new(0.1, 0.1, 0.2, 0.5, 1.0)?] {
        let y = simulate(&theta, 1000, 21, 0)?.series;
        let f = fit(&y, &cfg)?;
        let r = stationarity_test(&f, &y, 0.05)?;
        println!(
            "gamma_hat {:+.4}  T_n {:+.3}  reject stationarity: {} (p {:.4})  reject explosivity: {} (p {:.4})",
            r.gamma.gamma_hat,
            r.stationarity.statistic,
            r.stationarity.reject,
            r.stationarity.p_value.unwrap(),
            r.explosivity.reject,
            r.explosivity.p_value.unwrap()
        );
    }
    Ok(())
}
