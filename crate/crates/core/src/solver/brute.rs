//! Exhaustive enumeration, the reference the other solvers are checked against.

use crate::error::{Error, Result};

use super::{better, Method, SolveRequest, SolveResult};

/// Largest `(m+1)^n_a` the oracle will enumerate.
pub const ORACLE_GUARD: u64 = 10_000_000;

/// Tries every per-core choice. Enumeration runs in lexicographic order and
/// only a strictly better `(frequency, power)` pair replaces the incumbent,
/// which yields the same tie rule as the DP.
pub fn solve_brute_force(req: &SolveRequest<'_>) -> Result<SolveResult> {
    let inst = req.instance()?;
    let k = inst.items.len() as u128;
    let combinations = k.checked_pow(inst.classes as u32).unwrap_or(u128::MAX);
    if combinations > ORACLE_GUARD as u128 {
        return Err(Error::OracleGuard {
            combinations,
            limit: ORACLE_GUARD,
        });
    }

    let n = inst.classes;
    let mut picks = vec![0usize; n];
    let mut best_picks = picks.clone();
    let mut best = (0u64, 0u64);
    loop {
        let (value, cost) = picks.iter().fold((0u64, 0u64), |(v, c), &j| {
            (v + inst.items[j].value, c + inst.items[j].cost)
        });
        if cost <= inst.capacity && better((value, cost), best) {
            best = (value, cost);
            best_picks.copy_from_slice(&picks);
        }
        // Odometer, last core fastest.
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(req.result(&best_picks, Method::BruteForce, true));
            }
            pos -= 1;
            picks[pos] += 1;
            if picks[pos] < inst.items.len() {
                break;
            }
            picks[pos] = 0;
        }
    }
}
