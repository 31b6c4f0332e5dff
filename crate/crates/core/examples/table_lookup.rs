//! Uniform-frequency assignment straight from a package-power table.

use turboscale::model::ProcessorSpec;
use turboscale::solver::solve_lookup_uniform;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ProcessorSpec::load(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/specs/package_power_table.json"
    ))?;
    let table = spec
        .power
        .lookup_table
        .as_ref()
        .ok_or("spec has no lookup table")?;
    for (active, budget) in [(2, 132.0), (2, 131.0), (4, 139.0), (1, 150.0)] {
        match solve_lookup_uniform(table, active, budget)? {
            Some(c) => println!(
                "{active} active, {budget} W -> {} kHz ({} W)",
                c.level_khz, c.table_watts
            ),
            None => println!("{active} active, {budget} W -> no listed level fits"),
        }
    }
    Ok(())
}
