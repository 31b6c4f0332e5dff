//! Solver run time as the core count grows toward a thousand.

use turboscale::cli::bench_size;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!(
        "{:>6} {:>12} {:>12} {:>10}",
        "cores", "exact ms", "greedy ms", "gap kHz"
    );
    for n in [1, 10, 100, 1000] {
        let r = bench_size(n, 14, 1, 3, 0)?;
        println!(
            "{:>6} {:>12.3} {:>12.3} {:>10}",
            n, r.exact_median_ms, r.greedy_median_ms, r.max_gap_khz
        );
    }
    Ok(())
}
