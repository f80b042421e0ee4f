//! Maximum likelihood fit with asymptotic standard deviations.

use sagarch::io::Report;
use sagarch::mle::{fit, FitConfig};
use sagarch::model::{simulate, ParamVector};

fn main() -> sagarch::Result<()> {
    let theta = ParamVector::new(0.2, 0.1, 0.2, 0.5, 1.5)?;
    let y = simulate(&theta, 1000, 11, 500)?.series;
    let f = fit(&y, &FitConfig::default())?;
    println!("true     {:?}", theta.to_array());
    println!("converged {} after {} iterations, |grad| {:.2e}", f.converged, f.iterations, f.gradient_norm);
    for s in &f.starts {
        let ll = s.loglik.map_or_else(|| "failed".to_string(), |l| format!("{l:.6}"));
        let start: Vec<String> = s.start.iter().map(|v| format!("{v:.3}")).collect();
        println!("  start [{}] -> loglik {ll}", start.join(", "));
    }
    print!("{}", Report::from_fit(&f, &y).to_table());
    Ok(())
}
