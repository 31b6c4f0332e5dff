//! Generate a phased workload, replay it under the ondemand governor and
//! the power-aware arbiter, and print a few ticks.

use turboscale::governor::TurboArbiter;
use turboscale::model::ProcessorSpec;
use turboscale::sim::{SimConfig, Simulation};
use turboscale::trace_io::{emit_sim_trace, generate_trace, Pattern, WorkloadSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ProcessorSpec::load(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/specs/i7_default.json"
    ))?;
    let workload = WorkloadSpec {
        n_cores: spec.n_cores,
        duration_ticks: 40,
        pattern: Pattern::RandomWalk { step: 0.3 },
        seed: 11,
        tick_seconds: 0.5,
    };
    let trace = generate_trace(&workload)?;
    let config = SimConfig {
        arbiter: TurboArbiter::OptimalMckp,
        budget_watts: Some(100.0),
        tick_seconds: workload.tick_seconds,
        ..SimConfig::default()
    };
    let out = Simulation::new(spec, config)?.run(&trace)?;
    for line in emit_sim_trace(&out.rows).lines().take(13) {
        println!("{line}");
    }
    let s = &out.summary;
    println!(
        "{} ticks, mean {:.1} W, peak {:.1} W, {} turbo core-ticks, {} over budget",
        s.ticks,
        s.mean_package_watts,
        s.max_package_watts,
        s.turbo_core_ticks,
        s.budget_violation_ticks
    );
    Ok(())
}
