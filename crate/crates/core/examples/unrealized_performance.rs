//! A hard-limit arbiter leaves frequency on the table that a power-aware
//! one can grant within the same budget.

use turboscale::model::ProcessorSpec;
use turboscale::sim::{performance_delta_percent, SimConfig, Simulation};
use turboscale::trace_io::Trace;

const DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ProcessorSpec::load(format!("{DIR}/specs/i7_modified_bios.json"))?;
    let trace = Trace::load(format!("{DIR}/traces/saturated_3core.csv"))?;
    let mut runs = Vec::new();
    for name in ["modified_bios_baseline_capped", "modified_bios_optimal"] {
        let config = SimConfig::load(format!("{DIR}/configs/{name}.json"))?;
        let out = Simulation::new(spec.clone(), config)?.run(&trace)?;
        let busy = out.summary.mean_granted_khz[0].unwrap_or(0.0);
        println!(
            "{name}: busy cores at {busy:.0} kHz, {:.1} W mean, {} cycles",
            out.summary.mean_package_watts, out.summary.total_core_cycles
        );
        runs.push(out);
    }
    let delta = performance_delta_percent(&runs[1].summary, &runs[0].summary);
    println!("baseline runs {delta:.2}% fewer cycles than optimal");
    Ok(())
}
