//! A small MLE experiment and a test-size experiment.

use sagarch::io::experiment_table;
use sagarch::montecarlo::{run, table1_design, Alternative, ExperimentSpec, Innovation, TestSelection};

fn main() -> sagarch::Result<()> {
    let spec = ExperimentSpec::mle("alpha1.5", table1_design(), vec![500], 40, 2024);
    print!("{}", experiment_table(&run(&spec)?));

    let alts = vec![
        Alternative {
            label: "stable 1.5".into(),
            theta: None,
            innovation: None,
        },
        Alternative {
            label: "student t3".into(),
            theta: None,
            innovation: Some(Innovation::StudentT { nu: 3.0 }),
        },
    ];
    let spec = ExperimentSpec::test("diagnostic", table1_design(), 500, 40, 2025, TestSelection::Diagnostic { alpha_star: 1.5 }, alts);
    print!("{}", experiment_table(&run(&spec)?));
    Ok(())
}
