//! Decision form: can the active cores reach a target total frequency
//! within the budget, and what is the cheapest way to do it?

use turboscale::model::{CoreId, ProcessorSpec};
use turboscale::solver::{solve_exact_dp, subset_sum_feasible, SolveRequest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ProcessorSpec::load(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/specs/i7_default.json"
    ))?;
    let req = SolveRequest::new(&spec, (0..3).map(CoreId), 88.0)?;
    let best = solve_exact_dp(&req)?.objective_khz;
    println!("optimum for 3 cores at 88 W: {best} kHz");
    for target in [9_576_000, 9_800_000, best, best + 1] {
        match subset_sum_feasible(&req, target)? {
            Some(a) => println!(
                "target {target}: yes, {} kHz for {:.1} W",
                a.total_freq_khz, a.total_watts
            ),
            None => println!("target {target}: no"),
        }
    }
    Ok(())
}
