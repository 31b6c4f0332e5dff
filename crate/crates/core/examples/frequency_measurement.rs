//! Recovering the running frequency from unhalted core and reference
//! cycle counters.

use turboscale::sim::{base_operating_frequency, measure_frequency, CounterSample};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bus = 133_333;
    println!(
        "base frequency at ratio 24: {} kHz",
        base_operating_frequency(24, bus)?
    );

    let start = CounterSample::zeroed(24, bus);
    for (khz, ms) in [(3_199_992, 1000), (3_466_658, 250), (1_599_996, 1)] {
        let end = start.advance(khz, ms)?;
        println!(
            "ran {khz} kHz for {ms} ms -> measured {} kHz",
            measure_frequency(&start, &end)?
        );
    }

    match measure_frequency(&start, &start) {
        Ok(f) => println!("halted interval measured {f} kHz"),
        Err(e) => println!("halted interval: {e}"),
    }
    Ok(())
}
