//! Exact dynamic programming, the brute-force oracle and the greedy
//! heuristic on the same instances.

use turboscale::model::CoreId;
use turboscale::solver::{
    random_instance, solve_brute_force, solve_exact_dp, solve_greedy, SolveRequest,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("n_cores,exact_khz,oracle_khz,greedy_khz,greedy_gap_khz");
    for (n, seed) in [(3, 1), (5, 2), (6, 3)] {
        let inst = random_instance(n, 4, seed);
        let req = SolveRequest::new(&inst.spec, (0..n).map(CoreId), inst.budget_watts)?;
        let exact = solve_exact_dp(&req)?;
        let oracle = solve_brute_force(&req)?;
        let greedy = solve_greedy(&req)?;
        assert_eq!(exact.objective_khz, oracle.objective_khz);
        println!(
            "{n},{},{},{},{}",
            exact.objective_khz,
            oracle.objective_khz,
            greedy.objective_khz,
            exact.objective_khz - greedy.objective_khz
        );
    }

    let inst = random_instance(200, 14, 7);
    let req = SolveRequest::new(&inst.spec, (0..200).map(CoreId), inst.budget_watts)?;
    let exact = solve_exact_dp(&req)?;
    let greedy = solve_greedy(&req)?;
    println!(
        "200 cores, {} W: exact {} kHz at {:.1} W, greedy {} kHz at {:.1} W",
        inst.budget_watts,
        exact.objective_khz,
        exact.assignment.total_watts,
        greedy.objective_khz,
        greedy.assignment.total_watts
    );
    Ok(())
}
