//! Innovation expectations entering the Fisher information, by quadrature.

use sagarch::inference::EtaFactors;
use sagarch::stable::{Functional, StableDist};

fn main() -> sagarch::Result<()> {
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "alpha", "E lx^2", "c1", "c2", "c3");
    for alpha in [0.8, 1.0, 1.3, 1.5, 1.8] {
        let loc = StableDist::new(alpha)?.expect(&Functional::LocationInformation)?.value;
        let f = EtaFactors::by_quadrature(alpha)?;
        println!("{alpha:>6} {loc:>10.6} {:>10.6} {:>10.6} {:>10.6}", f.c1, f.c2, f.c3);
    }
    let k = 0.577_215_664_901_532_9 - 1.0 + 2f64.ln();
    println!("Cauchy closed forms: 0.5, 0.5, {:.6}, {:.6}", k / 2.0, k * k / 2.0 + std::f64::consts::PI.powi(2) / 12.0);
    Ok(())
}
