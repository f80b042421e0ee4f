//! Read a CSV return series and write a JSON report.

use sagarch::hypothesis::{stationarity_test, symmetry_test};
use sagarch::io::{emit_report, ingest_csv, write_csv, Report};
use sagarch::mle::{fit, FitConfig};
use sagarch::model::{simulate, ParamVector};

fn main() -> sagarch::Result<()> {
    let dir = std::env::temp_dir();
    let csv = dir.join("sagarch_example.csv");
    let theta = ParamVector::new(0.2, 0.1, 0.2, 0.5, 1.5)?;
    write_csv(&csv, &simulate(&theta, 800, 9, 500)?.series)?;

    let y = ingest_csv(&csv)?;
    let f = fit(&y, &FitConfig::default())?;
    let report = Report::from_fit(&f, &y)
        .with_test(&stationarity_test(&f, &y, 0.05)?.explosivity)
        .with_test(&symmetry_test(&f, &y, 0.05)?);
    let json = dir.join("sagarch_example.json");
    emit_report(&report, &json)?;
    print!("{}", report.to_table());
    println!("report written to {}", json.display());
    Ok(())
}
