//! OS frequency-request policies and the Turbo arbiters that grant them.
//!
//! The OS side only sees the exported P-state table, so a request is either
//! a real non-Turbo level or the Turbo indicator. What a core actually runs
//! at is decided afterwards by an arbiter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CoreId, FrequencyLadder, Khz, ProcessorSpec, Watts};
use crate::solver::{solve_exact_dp, solve_greedy, SolveRequest};

pub const DEFAULT_UP_THRESHOLD: f64 = 0.80;
pub const DEFAULT_DOWN_THRESHOLD: f64 = 0.20;
/// Turbo bins above `f_0` granted for 1, 2, 3 and 4 active cores.
pub const DEFAULT_BIN_TABLE: [u32; 4] = [2, 1, 1, 1];

fn default_up() -> f64 {
    DEFAULT_UP_THRESHOLD
}

fn default_down() -> f64 {
    DEFAULT_DOWN_THRESHOLD
}

fn default_bins() -> Vec<u32> {
    DEFAULT_BIN_TABLE.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GovernorPolicy {
    Ondemand {
        #[serde(default = "default_up")]
        up_threshold: f64,
        #[serde(default = "default_down")]
        down_threshold: f64,
    },
    /// Pins every core to one P-state. A target matching no table entry
    /// resolves to the highest real level at or below it.
    Userspace { target_khz: Khz },
}

impl Default for GovernorPolicy {
    fn default() -> Self {
        GovernorPolicy::Ondemand {
            up_threshold: DEFAULT_UP_THRESHOLD,
            down_threshold: DEFAULT_DOWN_THRESHOLD,
        }
    }
}

impl GovernorPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GovernorPolicy::Ondemand {
                up_threshold,
                down_threshold,
            } => {
                if 0.0 < down_threshold && down_threshold < up_threshold && up_threshold <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "ondemand thresholds need 0 < down < up <= 1, got down={down_threshold} up={up_threshold}"
                    )))
                }
            }
            GovernorPolicy::Userspace { target_khz: 0 } => {
                Err(Error::Config("userspace target must be positive".into()))
            }
            GovernorPolicy::Userspace { .. } => Ok(()),
        }
    }
}

/// What the OS writes for a core: a real ladder level or the Turbo indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Request {
    Level(usize),
    TurboIndicator,
}

impl Request {
    /// Highest request the OS can make.
    pub fn top(ladder: &FrequencyLadder, turbo_enabled: bool) -> Self {
        if turbo_enabled && ladder.turbo_count() > 0 {
            Request::TurboIndicator
        } else {
            Request::Level(ladder.guaranteed_index)
        }
    }

    pub fn reported_khz(self, ladder: &FrequencyLadder) -> Khz {
        match self {
            Request::Level(i) => ladder.freq_khz(i),
            Request::TurboIndicator => ladder.indicator_khz(),
        }
    }

    /// Real levels above `f_0` are not in the OS table; treat them as `f_0`.
    fn real_level(self, ladder: &FrequencyLadder) -> Option<usize> {
        match self {
            Request::Level(i) => Some(i.min(ladder.guaranteed_index)),
            Request::TurboIndicator => None,
        }
    }
}

/// Starting request for a core before any utilization has been seen.
pub fn initial_request(
    policy: &GovernorPolicy,
    ladder: &FrequencyLadder,
    turbo_enabled: bool,
) -> Request {
    match policy {
        GovernorPolicy::Ondemand { .. } => Request::Level(0),
        GovernorPolicy::Userspace { target_khz } => {
            userspace_request(*target_khz, ladder, turbo_enabled)
        }
    }
}

fn userspace_request(target_khz: Khz, ladder: &FrequencyLadder, turbo_enabled: bool) -> Request {
    let top = Request::top(ladder, turbo_enabled);
    if top == Request::TurboIndicator && target_khz >= ladder.indicator_khz() {
        return Request::TurboIndicator;
    }
    let idx = ladder
        .highest_at_or_below(target_khz)
        .unwrap_or(0)
        .min(ladder.guaranteed_index);
    Request::Level(idx)
}

/// One governor decision for one core.
///
/// `ondemand` jumps straight to the top P-state at or above `up_threshold`,
/// steps one real level down at or below `down_threshold`, and otherwise
/// holds. `userspace` ignores utilization entirely.
pub fn ospm_request(
    policy: &GovernorPolicy,
    utilization: f64,
    current: Request,
    ladder: &FrequencyLadder,
    turbo_enabled: bool,
) -> Request {
    match *policy {
        GovernorPolicy::Userspace { target_khz } => {
            userspace_request(target_khz, ladder, turbo_enabled)
        }
        GovernorPolicy::Ondemand {
            up_threshold,
            down_threshold,
        } => {
            if utilization >= up_threshold {
                Request::top(ladder, turbo_enabled)
            } else if utilization <= down_threshold {
                match current.real_level(ladder) {
                    // From the indicator, the next P-state down is f_0.
                    None => Request::Level(ladder.guaranteed_index),
                    Some(i) => Request::Level(i.saturating_sub(1)),
                }
            } else if current == Request::TurboIndicator && !turbo_enabled {
                Request::Level(ladder.guaranteed_index)
            } else {
                current
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TurboArbiter {
    /// Firmware-style arbiter: a fixed number of Turbo bins per active-core
    /// count, clamped by a BIOS frequency cap. It never looks at power.
    BaselineHardLimit {
        /// Entry `i` is the bin count for `i + 1` active cores; larger counts
        /// reuse the last entry.
        #[serde(default = "default_bins")]
        bin_table: Vec<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bios_cap_khz: Option<Khz>,
    },
    OptimalMckp,
    GreedyMckp,
}

impl Default for TurboArbiter {
    fn default() -> Self {
        TurboArbiter::BaselineHardLimit {
            bin_table: default_bins(),
            bios_cap_khz: None,
        }
    }
}

impl TurboArbiter {
    pub fn validate(&self) -> Result<()> {
        if let TurboArbiter::BaselineHardLimit {
            bin_table,
            bios_cap_khz,
        } = self
        {
            if bin_table.is_empty() {
                return Err(Error::Config("bin_table must not be empty".into()));
            }
            if bin_table.windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::Config(format!(
                    "bin_table must be non-increasing in active cores, got {bin_table:?}"
                )));
            }
            if *bios_cap_khz == Some(0) {
                return Err(Error::Config("bios_cap_khz must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            TurboArbiter::BaselineHardLimit { .. } => "baseline_hard_limit",
            TurboArbiter::OptimalMckp => "optimal_mckp",
            TurboArbiter::GreedyMckp => "greedy_mckp",
        }
    }
}

/// Granted ladder level per core; `None` for asleep cores.
pub type Grants = Vec<Option<usize>>;

fn bins_for(bin_table: &[u32], n_active: usize) -> u32 {
    let i = n_active.clamp(1, bin_table.len()) - 1;
    bin_table[i]
}

/// Level the baseline arbiter grants an indicator request at `n_active`.
pub fn baseline_turbo_level(
    bin_table: &[u32],
    bios_cap_khz: Option<Khz>,
    n_active: usize,
    ladder: &FrequencyLadder,
) -> usize {
    let g = ladder.guaranteed_index;
    let by_bins = g + bins_for(bin_table, n_active) as usize;
    let by_cap = bios_cap_khz
        .and_then(|cap| ladder.highest_at_or_below(cap))
        .unwrap_or(ladder.top_index());
    by_bins.min(by_cap).min(ladder.top_index()).max(g)
}

/// Hard-limit arbitration. Only indicator requests are boosted; everything
/// else is granted as asked. Utilization and power play no part.
pub fn arbitrate_baseline(
    bin_table: &[u32],
    bios_cap_khz: Option<Khz>,
    requests: &[Option<Request>],
    spec: &ProcessorSpec,
) -> Grants {
    let ladder = &spec.ladder;
    let n_active = requests.iter().flatten().count();
    let turbo = baseline_turbo_level(bin_table, bios_cap_khz, n_active, ladder);
    requests
        .iter()
        .map(|r| {
            r.map(|r| match r.real_level(ladder) {
                Some(i) => i,
                None => turbo,
            })
        })
        .collect()
}

/// Power-aware arbitration. Non-Turbo requests are granted first and their
/// watts come off the budget; the indicator requesters then share what is
/// left through the MCKP solver.
pub fn arbitrate_optimal(
    exact: bool,
    requests: &[Option<Request>],
    spec: &ProcessorSpec,
    budget_watts: Watts,
    granularity_deciwatts: u32,
) -> Result<Grants> {
    let ladder = &spec.ladder;
    let mut grants: Grants = requests
        .iter()
        .map(|r| r.and_then(|r| r.real_level(ladder)))
        .collect();
    let fixed_watts: Watts = grants.iter().flatten().map(|&i| spec.level_watts(i)).sum();
    let turbo_cores: Vec<CoreId> = requests
        .iter()
        .enumerate()
        .filter(|(_, r)| **r == Some(Request::TurboIndicator))
        .map(|(c, _)| CoreId(c))
        .collect();
    let infeasible = || Error::Infeasible {
        floor_watts: fixed_watts
            + turbo_cores.len() as f64 * spec.level_watts(ladder.guaranteed_index),
        budget_watts,
    };
    if fixed_watts > budget_watts + 1e-9 {
        return Err(infeasible());
    }
    if turbo_cores.is_empty() {
        return Ok(grants);
    }
    let remaining = budget_watts - fixed_watts;
    if remaining <= 0.0 {
        return Err(infeasible());
    }
    let req = SolveRequest::new(spec, turbo_cores.iter().copied(), remaining)?
        .with_granularity(granularity_deciwatts)?;
    let solved = if exact {
        solve_exact_dp(&req)
    } else {
        solve_greedy(&req)
    };
    let solved = solved.map_err(|e| if e.is_infeasible() { infeasible() } else { e })?;
    for (core, choice) in &solved.assignment.choices {
        grants[core.0] = Some(choice.ladder_index(ladder));
    }
    Ok(grants)
}

/// Dispatches to the configured arbiter.
pub fn arbitrate(
    arbiter: &TurboArbiter,
    requests: &[Option<Request>],
    spec: &ProcessorSpec,
    budget_watts: Watts,
    granularity_deciwatts: u32,
) -> Result<Grants> {
    match arbiter {
        TurboArbiter::BaselineHardLimit {
            bin_table,
            bios_cap_khz,
        } => Ok(arbitrate_baseline(bin_table, *bios_cap_khz, requests, spec)),
        TurboArbiter::OptimalMckp => {
            arbitrate_optimal(true, requests, spec, budget_watts, granularity_deciwatts)
        }
        TurboArbiter::GreedyMckp => {
            arbitrate_optimal(false, requests, spec, budget_watts, granularity_deciwatts)
        }
    }
}

pub fn grant_watts(spec: &ProcessorSpec, grants: &[Option<usize>]) -> Watts {
    grants.iter().flatten().map(|&i| spec.level_watts(i)).sum()
}

pub fn grant_khz_sum(spec: &ProcessorSpec, grants: &[Option<usize>]) -> Khz {
    grants
        .iter()
        .flatten()
        .map(|&i| spec.ladder.freq_khz(i))
        .sum()
}
