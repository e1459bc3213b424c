//! Runs every verification suite and prints the JSON report.

use einsub::verify::{full_report, Tolerances, DEFAULT_SEED};

fn main() -> einsub::Result<()> {
    let report = full_report(&Tolerances::default(), DEFAULT_SEED)?;
    print!("{}", report.to_json()?);
    Ok(())
}
