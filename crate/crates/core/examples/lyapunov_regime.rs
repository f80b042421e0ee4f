//! Top Lyapunov exponent: quadrature and residual estimators, regime.

use sagarch::lyapunov::{gamma_closed_form_cauchy, gamma_int, gamma_res};
use sagarch::model::{filter_log, simulate, ParamVector};

fn main() -> sagarch::Result<()> {
    for (w, pp, pm, psi, a) in [(0.1, 0.1, 0.2, 0.3, 1.0), (0.2, 0.1, 0.2, 0.5, 1.5), (0.1, 0.1, 0.2, 0.5, 1.0)] {
        let theta = ParamVector::new(w, pp, pm, psi, a)?;
        let coef = theta.coefficient()?;
        let y = simulate(&theta, 5000, 3, 500)?.series;
        let r = gamma_res(&coef, &filter_log(&theta, &y, 0.0).residuals)?;
        let i = gamma_int(&coef, a, y.n())?;
        print!("theta {:?}: int {:+.4}  res {:+.4} ({:?})", theta.to_array(), i.gamma_hat, r.gamma_hat, r.regime);
        if a == 1.0 {
            print!("  closed form {:+.4}", gamma_closed_form_cauchy(pp, pm, psi)?);
        }
        println!();
    }
    Ok(())
}
