//! Fisher information estimators and the universal variance estimator.

use sagarch::inference::{asd, sigma_hat, universal_variance, upsilon_hat};
use sagarch::lyapunov::EstimatorKind;
use sagarch::mle::{fit, FitConfig};
use sagarch::model::{simulate, ParamVector};

fn main() -> sagarch::Result<()> {
    let theta = ParamVector::new(0.2, 0.1, 0.2, 0.5, 1.5)?;
    let y = simulate(&theta, 2000, 5, 500)?.series;
    let f = fit(&y, &FitConfig::default())?;
    for kind in [EstimatorKind::Int, EstimatorKind::Res] {
        let s = sigma_hat(kind, &f, &y)?;
        let u = upsilon_hat(kind, &f, &y)?;
        println!("{kind:?}: Sigma eigenvalues {:.4?}", s.eigenvalues());
        println!("{kind:?}: Upsilon eigenvalues {:.4?}", u.eigenvalues());
        println!("{kind:?}: ASD {:.4?}", asd(&s, y.n())?.values);
    }
    let star = universal_variance(&f, &y)?;
    println!("universal ASD for {:?}: {:.4?}", star.names, asd(&star, y.n())?.values);
    Ok(())
}
