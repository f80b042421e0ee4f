//! Simulated quantiles of sup |B(r)| on [0, 1].

use sagarch::hypothesis::{sup_brownian_critical_values, sup_brownian_table, SUP_BROWNIAN_CRITICAL};

fn main() -> sagarch::Result<()> {
    let t = sup_brownian_critical_values(20_000, 2_000, 1, &[0.90, 0.95, 0.99])?;
    let table = sup_brownian_table();
    for (q, (level, c)) in t.quantiles.iter().zip(SUP_BROWNIAN_CRITICAL) {
        println!(
            "level {level}: simulated {q:.4}, embedded table {:.4}, reference {c}",
            table.quantile(1.0 - level)
        );
    }
    Ok(())
}
