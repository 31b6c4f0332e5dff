//! Pseudo-polynomial dynamic program over the discretized budget.

use crate::error::{Error, Result};
use crate::model::{Assignment, Khz};

use super::{better, Instance, Item, Method, SolveRequest, SolveResult};

const TABLE_LIMIT_BYTES: u64 = 1 << 31;

/// Suffix table: `choose[i][r]` is the smallest item index that reaches the
/// best `(value, cost)` for classes `i..` within `r` units. `best[r]` is that
/// optimum for the whole instance.
struct Table {
    width: usize,
    choose: Vec<u8>,
    best: Vec<(u64, u64)>,
}

impl Table {
    fn build(inst: &Instance) -> Result<Self> {
        let width = inst.capacity as usize + 1;
        let cells = inst.classes as u64 * width as u64;
        if cells > TABLE_LIMIT_BYTES {
            return Err(Error::InvalidRequest(format!(
                "DP table of {cells} cells too large; raise the granularity"
            )));
        }
        let items: &[Item] = &inst.items;
        let mut choose = vec![0u8; inst.classes * width];
        let mut next = vec![(0u64, 0u64); width];
        let mut cur = vec![(0u64, 0u64); width];
        for i in (0..inst.classes).rev() {
            let row = &mut choose[i * width..(i + 1) * width];
            for r in 0..width {
                let mut best = next[r];
                let mut pick = 0u8;
                for (j, item) in items.iter().enumerate().skip(1) {
                    let cost = item.cost as usize;
                    // Costs ascend with the ladder.
                    if cost > r {
                        break;
                    }
                    let rest = next[r - cost];
                    let cand = (item.value + rest.0, item.cost + rest.1);
                    if better(cand, best) {
                        best = cand;
                        pick = j as u8;
                    }
                }
                cur[r] = best;
                row[r] = pick;
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(Self {
            width,
            choose,
            best: next,
        })
    }

    fn reconstruct(&self, inst: &Instance, mut r: usize) -> Vec<usize> {
        (0..inst.classes)
            .map(|i| {
                let j = self.choose[i * self.width + r] as usize;
                r -= inst.items[j].cost as usize;
                j
            })
            .collect()
    }
}

/// Optimal assignment for the discretized instance.
///
/// Ties go to the lower total power, then to the lexicographically smallest
/// per-core choice vector in core-id order.
pub fn solve_exact_dp(req: &SolveRequest<'_>) -> Result<SolveResult> {
    let inst = req.instance()?;
    if inst.classes == 0 {
        return Ok(req.result(&[], Method::ExactDp, true));
    }
    let table = Table::build(&inst)?;
    let picks = table.reconstruct(&inst, inst.capacity as usize);
    Ok(req.result(&picks, Method::ExactDp, true))
}

/// Decision form: is there an assignment whose total frequency reaches
/// `target_khz` within the budget? The witness returned is the cheapest such
/// assignment.
pub fn subset_sum_feasible(req: &SolveRequest<'_>, target_khz: Khz) -> Result<Option<Assignment>> {
    let inst = req.instance()?;
    let floor_picks = vec![0; inst.classes];
    if target_khz <= inst.floor_khz {
        return Ok(Some(req.assignment(&floor_picks)));
    }
    if inst.classes == 0 {
        return Ok(None);
    }
    let needed = target_khz - inst.floor_khz;
    let table = Table::build(&inst)?;
    // `best` is non-decreasing in capacity, so the first hit is the cheapest.
    let Some(r) = table.best.iter().position(|&(v, _)| v >= needed) else {
        return Ok(None);
    };
    let picks = table.reconstruct(&inst, r);
    Ok(Some(req.assignment(&picks)))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::model::{Choice, CoreId};
    use crate::solver::testutil::{arb_instance, spec_from};
    use crate::solver::{solve_brute_force, solve_greedy};

    #[test]
    fn single_core_takes_top_when_both_fit() {
        // f_0 8 W, 3.3 GHz 10 W, 3.4 GHz 12 W; budget 12 W.
        let spec = spec_from(&[1_300_000, 100_000], &[80, 20, 20], 1);
        let req = SolveRequest::new(&spec, [CoreId(0)], 12.0).unwrap();
        let res = solve_exact_dp(&req).unwrap();
        assert_eq!(res.assignment.choices[&CoreId(0)], Choice::Turbo(2));
        assert_eq!(res.objective_khz, 3_400_000);
        assert!(res.optimal);
        assert_eq!(res.method, Method::ExactDp);
    }

    #[test]
    fn floor_above_budget_is_infeasible() {
        let spec = spec_from(&[100_000], &[80, 20], 2);
        let req = SolveRequest::new(&spec, [CoreId(0)], 0.1).unwrap();
        let err = solve_exact_dp(&req).unwrap_err();
        assert!(err.is_infeasible());
        assert!(err
            .to_string()
            .starts_with("infeasible: guaranteed floor exceeds budget"));
    }

    #[test]
    fn no_active_cores() {
        let spec = spec_from(&[100_000], &[80, 20], 2);
        let req = SolveRequest::new(&spec, [], 5.0).unwrap();
        let res = solve_exact_dp(&req).unwrap();
        assert_eq!(res.objective_khz, 0);
        assert!(res.assignment.choices.is_empty());
    }

    #[test]
    fn ties_prefer_less_power_then_lower_core_ids() {
        // Two cores, one upgrade affordable: equal objective either way, so
        // core 1 (the later id) gets the Turbo level.
        let spec = spec_from(&[100_000], &[50, 10], 2);
        let req = SolveRequest::new(&spec, [CoreId(0), CoreId(1)], 11.0).unwrap();
        let res = solve_exact_dp(&req).unwrap();
        assert_eq!(res.assignment.choices[&CoreId(0)], Choice::StayGuaranteed);
        assert_eq!(res.assignment.choices[&CoreId(1)], Choice::Turbo(1));
    }

    #[test]
    fn subset_sum_edges() {
        let spec = spec_from(&[100_000, 200_000], &[50, 10, 15], 3);
        let cores = [CoreId(0), CoreId(1), CoreId(2)];
        let req = SolveRequest::new(&spec, cores, 18.0).unwrap();
        let floor = subset_sum_feasible(&req, 0).unwrap().unwrap();
        assert!(floor.choices.values().all(|c| *c == Choice::StayGuaranteed));
        let f0_total = 3 * 2_000_000;
        assert!(subset_sum_feasible(&req, f0_total).unwrap().is_some());

        let opt = solve_exact_dp(&req).unwrap().objective_khz;
        let w = subset_sum_feasible(&req, opt).unwrap().unwrap();
        assert!(w.total_freq_khz >= opt);
        assert!(subset_sum_feasible(&req, opt + 1).unwrap().is_none());
        assert!(subset_sum_feasible(&req, opt + spec.ladder.bus_clock_khz)
            .unwrap()
            .is_none());

        let tight = SolveRequest::new(&spec, cores, 14.9).unwrap();
        assert!(subset_sum_feasible(&tight, f0_total)
            .unwrap_err()
            .is_infeasible());
    }

    #[test]
    fn subset_sum_witness_is_cheapest() {
        let spec = spec_from(&[100_000, 100_000], &[50, 5, 30], 2);
        let req = SolveRequest::new(&spec, [CoreId(0), CoreId(1)], 100.0).unwrap();
        // +100 MHz is reachable for 0.5 W; no need for the 3 W jump.
        let w = subset_sum_feasible(&req, 4_100_000).unwrap().unwrap();
        assert!((w.total_watts - 10.5).abs() < 1e-9);
    }

    #[test]
    fn granularity_coarsens_costs_conservatively() {
        let spec = spec_from(&[100_000], &[53, 7], 2);
        let req = SolveRequest::new(&spec, [CoreId(0), CoreId(1)], 11.9)
            .unwrap()
            .with_granularity(5)
            .unwrap();
        // 5.3 W -> 11 units, 6.0 W -> 12 units, budget 119 dW -> 23 units.
        assert_eq!(req.cost_units(5.3), 11);
        assert_eq!(req.budget_units(), 23);
        let res = solve_exact_dp(&req).unwrap();
        assert!(res.assignment.total_watts <= 11.9 + 1e-9);
    }

    #[test]
    fn extra_core_at_fixed_budget_can_lower_total() {
        // The fifth core's floor eats watts worth more as upgrades elsewhere.
        let spec = spec_from(&[500_000, 400_000, 400_000], &[72, 17, 21, 3], 5);
        let four = SolveRequest::new(&spec, (0..4).map(CoreId), 36.3).unwrap();
        let five = SolveRequest::new(&spec, (0..5).map(CoreId), 36.3).unwrap();
        assert_eq!(solve_exact_dp(&four).unwrap().objective_khz, 10_300_000);
        assert_eq!(solve_exact_dp(&five).unwrap().objective_khz, 10_000_000);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn exact_matches_oracle((spec, n_a, budget) in arb_instance()) {
            let req = SolveRequest::new(&spec, (0..n_a).map(CoreId), budget).unwrap();
            match (solve_exact_dp(&req), solve_brute_force(&req)) {
                (Ok(a), Ok(b)) => {
                    prop_assert_eq!(a.objective_khz, b.objective_khz);
                    // Same tie rule, so the very same assignment.
                    prop_assert_eq!(&a.assignment.choices, &b.assignment.choices);
                }
                (Err(a), Err(b)) => prop_assert!(a.is_infeasible() && b.is_infeasible()),
                (a, b) => prop_assert!(false, "disagree: {:?} vs {:?}", a, b),
            }
        }

        #[test]
        fn raising_budget_never_hurts((spec, n_a, budget) in arb_instance(), extra in 0.0f64..20.0) {
            let lo = SolveRequest::new(&spec, (0..n_a).map(CoreId), budget).unwrap();
            let hi = SolveRequest::new(&spec, (0..n_a).map(CoreId), budget + extra).unwrap();
            if let Ok(a) = solve_exact_dp(&lo) {
                prop_assert!(solve_exact_dp(&hi).unwrap().objective_khz >= a.objective_khz);
            }
        }

        #[test]
        fn adding_a_core_with_its_floor_never_hurts((spec, n_a, budget) in arb_instance()) {
            let mut spec = spec;
            spec.n_cores = n_a + 1;
            let floor = spec.level_watts(spec.ladder.guaranteed_index);
            let small = SolveRequest::new(&spec, (0..n_a).map(CoreId), budget).unwrap();
            let big = SolveRequest::new(&spec, (0..=n_a).map(CoreId), budget + floor).unwrap();
            if let Ok(a) = solve_exact_dp(&small) {
                let b = solve_exact_dp(&big).unwrap();
                prop_assert!(b.objective_khz >= a.objective_khz + spec.ladder.guaranteed_khz());
            }
        }

        #[test]
        fn relabeling_cores_preserves_objective((spec, n_a, budget) in arb_instance(), shift in 0usize..8) {
            let mut spec = spec;
            spec.n_cores = n_a + 8;
            let a = SolveRequest::new(&spec, (0..n_a).map(CoreId), budget).unwrap();
            // Reverse the ids and shift them up.
            let b = SolveRequest::new(&spec, (0..n_a).map(|c| CoreId(n_a - 1 - c + shift)), budget).unwrap();
            if let (Ok(x), Ok(y)) = (solve_exact_dp(&a), solve_exact_dp(&b)) {
                prop_assert_eq!(x.objective_khz, y.objective_khz);
                prop_assert!((x.assignment.total_watts - y.assignment.total_watts).abs() < 1e-9);
                let mut cx: Vec<_> = x.assignment.choices.values().copied().collect();
                let mut cy: Vec<_> = y.assignment.choices.values().copied().collect();
                cx.sort();
                cy.sort();
                prop_assert_eq!(cx, cy);
            }
        }

        #[test]
        fn subset_sum_agrees_with_optimum((spec, n_a, budget) in arb_instance()) {
            let req = SolveRequest::new(&spec, (0..n_a).map(CoreId), budget).unwrap();
            if let Ok(opt) = solve_exact_dp(&req) {
                let w = subset_sum_feasible(&req, opt.objective_khz).unwrap();
                prop_assert!(w.is_some());
                let w = w.unwrap();
                prop_assert!(w.total_freq_khz >= opt.objective_khz);
                prop_assert!(w.total_watts <= budget + 1e-9);
                prop_assert!(subset_sum_feasible(&req, opt.objective_khz + 1).unwrap().is_none());
            }
        }

        #[test]
        fn greedy_within_one_item_of_optimum((spec, n_a, budget) in arb_instance()) {
            let req = SolveRequest::new(&spec, (0..n_a).map(CoreId), budget).unwrap();
            if let Ok(exact) = solve_exact_dp(&req) {
                let greedy = solve_greedy(&req).expect("greedy feasible whenever exact is");
                let max_gain = spec.ladder.freq_khz(spec.ladder.top_index()) - spec.ladder.guaranteed_khz();
                prop_assert!(greedy.objective_khz + max_gain >= exact.objective_khz);
                prop_assert!(greedy.objective_khz <= exact.objective_khz);
            }
        }
    }
}
