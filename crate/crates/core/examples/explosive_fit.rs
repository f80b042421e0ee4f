//! Fitting an explosive path: omega is flagged, the other parameters use
//! the universal estimator.

use sagarch::io::Report;
use sagarch::mle::{fit, FitConfig, FitMode};
use sagarch::model::{simulate, ParamVector};

fn main() -> sagarch::Result<()> {
    let theta = ParamVector::new(0.1, 0.1, 0.2, 0.5, 1.0)?;
    let path = simulate(&theta, 2000, 13, 0)?;
    let y = &path.series;
    println!("last |y| = {:.3e}", y.values().last().unwrap().abs());
    let cfg = FitConfig {
        mode: FitMode::Free,
        ..FitConfig::default()
    };
    let f = fit(y, &cfg)?;
    println!("omega inferential: {}", f.omega_inferential);
    print!("{}", Report::from_fit(&f, y).to_table());
    Ok(())
}
