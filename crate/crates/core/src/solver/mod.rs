//! Frequency-assignment optimizers.
//!
//! Every active core is a class of a multiple-choice knapsack: it runs at
//! exactly one of `f_0..=f_m`, item `j` is worth `f_j` kHz and costs `p_j`
//! watts, and the package must stay within the budget. Levels below `f_0`
//! are never offered; an active core's floor is the guaranteed frequency.
//!
//! Watts are discretized to integer units of `granularity_deciwatts` tenths
//! of a watt before any search. Item costs round up and the budget rounds
//! down, so a discretized-feasible assignment is feasible in real watts.

mod brute;
mod dp;
mod greedy;
mod lookup;
mod random;

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{validate, Assignment, Choice, CoreId, Khz, ProcessorSpec, Watts};

pub use brute::{solve_brute_force, ORACLE_GUARD};
pub use dp::{solve_exact_dp, subset_sum_feasible};
pub use greedy::solve_greedy;
pub use lookup::{lookup_assignment, solve_lookup_uniform, LookupChoice};
pub use random::{random_instance, RandomInstance, MAX_BUDGET_DECIWATTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactDp,
    BruteForce,
    Greedy,
    Lookup,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ExactDp => "exact_dp",
            Method::BruteForce => "brute_force",
            Method::Greedy => "greedy",
            Method::Lookup => "lookup",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub assignment: Assignment,
    pub objective_khz: Khz,
    pub method: Method,
    pub optimal: bool,
}

/// A validated assignment problem.
#[derive(Debug, Clone)]
pub struct SolveRequest<'a> {
    spec: &'a ProcessorSpec,
    active_cores: Vec<CoreId>,
    budget_watts: Watts,
    granularity_deciwatts: u32,
}

impl<'a> SolveRequest<'a> {
    pub fn new(
        spec: &'a ProcessorSpec,
        active_cores: impl IntoIterator<Item = CoreId>,
        budget_watts: Watts,
    ) -> Result<Self> {
        validate(spec).map_err(Error::InvalidSpec)?;
        let active: BTreeSet<CoreId> = active_cores.into_iter().collect();
        if let Some(bad) = active.iter().find(|c| c.0 >= spec.n_cores) {
            return Err(Error::InvalidRequest(format!(
                "core {bad} outside 0..{}",
                spec.n_cores
            )));
        }
        if !(budget_watts > 0.0 && budget_watts.is_finite()) {
            return Err(Error::InvalidRequest(format!(
                "budget {budget_watts} W must be positive"
            )));
        }
        if spec.ladder.turbo_count() + 1 > u8::MAX as usize {
            return Err(Error::InvalidRequest(
                "more than 255 choices per core".into(),
            ));
        }
        Ok(Self {
            spec,
            active_cores: active.into_iter().collect(),
            budget_watts,
            granularity_deciwatts: 1,
        })
    }

    /// Every core active, budget `Pow_max`.
    pub fn all_active(spec: &'a ProcessorSpec) -> Result<Self> {
        Self::new(spec, (0..spec.n_cores).map(CoreId), spec.pow_max_watts)
    }

    pub fn with_granularity(mut self, deciwatts: u32) -> Result<Self> {
        if deciwatts == 0 {
            return Err(Error::InvalidRequest("granularity must be positive".into()));
        }
        self.granularity_deciwatts = deciwatts;
        Ok(self)
    }

    pub fn spec(&self) -> &ProcessorSpec {
        self.spec
    }

    pub fn active_cores(&self) -> &[CoreId] {
        &self.active_cores
    }

    pub fn budget_watts(&self) -> Watts {
        self.budget_watts
    }

    pub fn granularity_deciwatts(&self) -> u32 {
        self.granularity_deciwatts
    }

    /// Item cost in budget units, rounded up.
    pub fn cost_units(&self, watts: Watts) -> u64 {
        let scaled = watts * 10.0 / self.granularity_deciwatts as f64;
        (scaled - 1e-9).ceil().max(0.0) as u64
    }

    /// Budget in units, rounded down.
    pub fn budget_units(&self) -> u64 {
        let scaled = self.budget_watts * 10.0 / self.granularity_deciwatts as f64;
        (scaled + 1e-9).floor().max(0.0) as u64
    }

    /// Discretizes the request, rejecting it when even the all-`f_0`
    /// assignment does not fit.
    pub(crate) fn instance(&self) -> Result<Instance> {
        let ladder = &self.spec.ladder;
        let g = ladder.guaranteed_index;
        let f0 = ladder.guaranteed_khz();
        let floor_cost = self.cost_units(self.spec.level_watts(g));
        let items: Vec<Item> = ladder
            .choice_range()
            .map(|idx| Item {
                value: ladder.freq_khz(idx) - f0,
                cost: self.cost_units(self.spec.level_watts(idx)) - floor_cost,
            })
            .collect();
        let n = self.active_cores.len() as u64;
        let floor_units = floor_cost * n;
        let budget_units = self.budget_units();
        if floor_units > budget_units {
            return Err(Error::Infeasible {
                floor_watts: self.spec.level_watts(g) * n as f64,
                budget_watts: self.budget_watts,
            });
        }
        Ok(Instance {
            items,
            classes: self.active_cores.len(),
            capacity: budget_units - floor_units,
            floor_khz: f0 * n,
        })
    }

    /// Turns per-class item indices (one per active core, in core order)
    /// into an [`Assignment`].
    pub(crate) fn assignment(&self, picks: &[usize]) -> Assignment {
        debug_assert_eq!(picks.len(), self.active_cores.len());
        Assignment::from_choices(
            self.spec,
            self.active_cores.iter().zip(picks).map(|(&core, &j)| {
                let choice = if j == 0 {
                    Choice::StayGuaranteed
                } else {
                    Choice::Turbo(j)
                };
                (core, choice)
            }),
        )
    }

    pub(crate) fn result(&self, picks: &[usize], method: Method, optimal: bool) -> SolveResult {
        let assignment = self.assignment(picks);
        SolveResult {
            objective_khz: assignment.total_freq_khz,
            assignment,
            method,
            optimal,
        }
    }
}

/// One choice within a class, measured relative to the class floor `f_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Item {
    pub value: u64,
    pub cost: u64,
}

/// Discretized MCKP with identical classes. Item 0 is the floor and costs 0.
#[derive(Debug, Clone)]
pub(crate) struct Instance {
    pub items: Vec<Item>,
    pub classes: usize,
    /// Budget units left once every class sits at its floor.
    pub capacity: u64,
    pub floor_khz: u64,
}

/// Orders `(value, cost)` pairs: more frequency first, then less power.
#[inline]
pub(crate) fn better(a: (u64, u64), b: (u64, u64)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

#[cfg(test)]
pub(crate) mod testutil {
    use proptest::prelude::*;

    use crate::model::{FrequencyLadder, PowerModel, ProcessorSpec};

    /// Small spec with integer-deciwatt powers and `m` Turbo levels above a
    /// single sub-`f_0` level.
    pub fn spec_from(steps_khz: &[u64], deciwatts: &[u64], n_cores: usize) -> ProcessorSpec {
        let bus = 100_000;
        let mut freqs = vec![1_000_000];
        let mut f = 2_000_000;
        freqs.push(f);
        for s in steps_khz {
            f += s;
            freqs.push(f);
        }
        let mut watts = vec![0.1];
        let mut acc = 0u64;
        for d in deciwatts {
            acc += d;
            watts.push(acc as f64 / 10.0);
        }
        ProcessorSpec {
            n_cores,
            pow_max_watts: 1000.0,
            t_crit_c: 100.0,
            ladder: FrequencyLadder::new(&freqs, 1, bus),
            power: PowerModel {
                per_core_watts: watts,
                ..Default::default()
            },
        }
    }

    /// Random instance: `(spec, n_active, budget_watts)` with n_a ≤ 6, m ≤ 4.
    pub fn arb_instance() -> impl Strategy<Value = (ProcessorSpec, usize, f64)> {
        (0usize..=4, 0usize..=6).prop_flat_map(|(m, n_a)| {
            (
                prop::collection::vec(1u64..=5, m),
                1u64..=150,
                prop::collection::vec(0u64..=85, m),
                0u64..=500 * 7,
            )
                .prop_map(move |(steps, floor_dw, incs, extra)| {
                    let steps: Vec<u64> = steps.iter().map(|s| s * 100_000).collect();
                    let mut dws = vec![floor_dw];
                    dws.extend(incs);
                    let spec = spec_from(&steps, &dws, n_a.max(1));
                    let floor = floor_dw * n_a as u64;
                    // A few budgets fall just under the floor to exercise infeasibility.
                    let budget =
                        (floor + extra % (floor + 501)).saturating_sub(20).max(1) as f64 / 10.0;
                    (spec, n_a, budget)
                })
        })
    }
}
