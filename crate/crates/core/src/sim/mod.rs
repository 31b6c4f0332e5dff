//! Deterministic discrete-time simulator.
//!
//! Each tick replays one row of per-core utilization through the governor
//! and the Turbo arbiter, advances the emulated cycle counters, and measures
//! every core's frequency from them exactly as a sampling tool would.

mod counters;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::governor::{
    arbitrate, grant_khz_sum, grant_watts, initial_request, ospm_request, GovernorPolicy, Request,
    TurboArbiter,
};
use crate::model::{validate, Khz, ProcessorSpec, ProcessorState, Watts};
use crate::trace_io::Trace;

pub use counters::{base_operating_frequency, measure_frequency, CounterSample};

const HISTOGRAM_BIN_WATTS: f64 = 10.0;

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn unit_granularity() -> u32 {
    1
}

fn default_temperature() -> f64 {
    50.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub policy: GovernorPolicy,
    #[serde(default)]
    pub arbiter: TurboArbiter,
    #[serde(default = "one")]
    pub tick_seconds: f64,
    /// Defaults to the processor's `pow_max_watts`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_watts: Option<Watts>,
    #[serde(default)]
    pub rng_seed: u64,
    /// Cores below this utilization count as asleep. At 0.0 only an exactly
    /// idle core sleeps.
    #[serde(default)]
    pub idle_sleep_threshold: f64,
    #[serde(default = "yes")]
    pub turbo_enabled: bool,
    #[serde(default = "unit_granularity")]
    pub granularity_deciwatts: u32,
    /// Recorded only; never constrains a decision.
    #[serde(default = "default_temperature")]
    pub temperature_c: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            policy: GovernorPolicy::default(),
            arbiter: TurboArbiter::default(),
            tick_seconds: 1.0,
            budget_watts: None,
            rng_seed: 0,
            idle_sleep_threshold: 0.0,
            turbo_enabled: true,
            granularity_deciwatts: 1,
            temperature_c: default_temperature(),
        }
    }
}

impl SimConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimTraceRow {
    pub time_s: f64,
    pub core_id: usize,
    pub utilization: f64,
    /// 0 for an asleep (power-gated) core.
    pub granted_khz: Khz,
    /// `None` when the core never left the halted state during the tick.
    pub measured_khz: Option<Khz>,
    pub package_watts: Watts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoreSimState {
    pub request: Request,
    pub counters: CounterSample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub processor: ProcessorState,
    pub cores: Vec<CoreSimState>,
    pub tick: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo_watts: f64,
    pub hi_watts: f64,
    pub ticks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub governor: String,
    pub arbiter: String,
    pub turbo_enabled: bool,
    pub rng_seed: u64,
    pub n_cores: usize,
    pub ticks: usize,
    pub tick_seconds: f64,
    pub budget_watts: Watts,
    pub total_core_cycles: u64,
    /// Sum over ticks of the granted frequencies of all active cores.
    pub total_granted_khz: u64,
    /// Per core, averaged over the ticks it was awake.
    pub mean_granted_khz: Vec<Option<f64>>,
    pub mean_package_watts: Watts,
    pub max_package_watts: Watts,
    pub energy_joules: f64,
    pub budget_violation_ticks: usize,
    pub turbo_core_ticks: usize,
    pub watts_histogram: Vec<HistogramBin>,
    /// Relative cycle shortfall against a reference run, in percent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub performance_delta_percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub rows: Vec<SimTraceRow>,
    /// Granted kHz summed over active cores, one entry per tick.
    pub tick_freq_sums: Vec<Khz>,
    /// Package watts, one entry per tick.
    pub tick_watts: Vec<Watts>,
    pub summary: SummaryStats,
}

/// `(reference − run) / reference × 100` over total core cycles; 0 when the
/// reference did no work.
pub fn performance_delta_percent(reference: &SummaryStats, run: &SummaryStats) -> f64 {
    if reference.total_core_cycles == 0 {
        return 0.0;
    }
    let diff = reference.total_core_cycles as i128 - run.total_core_cycles as i128;
    diff as f64 / reference.total_core_cycles as f64 * 100.0
}

fn policy_name(p: &GovernorPolicy) -> &'static str {
    match p {
        GovernorPolicy::Ondemand { .. } => "ondemand",
        GovernorPolicy::Userspace { .. } => "userspace",
    }
}

/// A validated processor plus simulation settings.
#[derive(Debug, Clone)]
pub struct Simulation {
    spec: ProcessorSpec,
    config: SimConfig,
    base_ratio: u32,
    budget_watts: Watts,
}

impl Simulation {
    pub fn new(spec: ProcessorSpec, config: SimConfig) -> Result<Self> {
        validate(&spec).map_err(Error::InvalidSpec)?;
        config.policy.validate()?;
        config.arbiter.validate()?;
        if !(config.tick_seconds > 0.0 && config.tick_seconds.is_finite()) {
            return Err(Error::Config(format!(
                "tick_seconds must be positive, got {}",
                config.tick_seconds
            )));
        }
        if !(0.0..=1.0).contains(&config.idle_sleep_threshold) {
            return Err(Error::Config(
                "idle_sleep_threshold must lie in [0, 1]".into(),
            ));
        }
        if config.granularity_deciwatts == 0 {
            return Err(Error::Config(
                "granularity_deciwatts must be positive".into(),
            ));
        }
        if config.temperature_c >= spec.t_crit_c {
            return Err(Error::Config(format!(
                "temperature {} C at or above critical {} C",
                config.temperature_c, spec.t_crit_c
            )));
        }
        let budget_watts = config.budget_watts.unwrap_or(spec.pow_max_watts);
        if !(budget_watts > 0.0 && budget_watts.is_finite()) {
            return Err(Error::Config(format!(
                "budget must be positive, got {budget_watts}"
            )));
        }
        let bus = spec.ladder.bus_clock_khz;
        let base_ratio = ((spec.ladder.guaranteed_khz() + bus / 2) / bus) as u32;
        base_operating_frequency(base_ratio, bus)?;
        Ok(Self {
            spec,
            config,
            base_ratio,
            budget_watts,
        })
    }

    pub fn spec(&self) -> &ProcessorSpec {
        &self.spec
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn budget_watts(&self) -> Watts {
        self.budget_watts
    }

    pub fn initial_state(&self) -> SimState {
        let request = initial_request(
            &self.config.policy,
            &self.spec.ladder,
            self.config.turbo_enabled,
        );
        let counters = CounterSample::zeroed(self.base_ratio, self.spec.ladder.bus_clock_khz);
        SimState {
            processor: ProcessorState::all_asleep(self.spec.n_cores, self.config.temperature_c),
            cores: vec![CoreSimState { request, counters }; self.spec.n_cores],
            tick: 0,
        }
    }

    fn is_asleep(&self, u: f64) -> bool {
        u == 0.0 || u < self.config.idle_sleep_threshold
    }

    /// One tick: classify, request, arbitrate, count, measure, account.
    pub fn advance_tick(
        &self,
        state: &SimState,
        time_s: f64,
        utilization: &[f64],
    ) -> Result<(SimState, Vec<SimTraceRow>)> {
        let n = self.spec.n_cores;
        if utilization.len() != n {
            return Err(Error::TraceRowOutOfRange(format!(
                "{} utilization values for {n} cores",
                utilization.len()
            )));
        }
        if let Some((c, u)) = utilization
            .iter()
            .enumerate()
            .find(|(_, u)| !(0.0..=1.0).contains(*u))
        {
            return Err(Error::TraceRowOutOfRange(format!(
                "core {c} utilization {u}"
            )));
        }
        let ladder = &self.spec.ladder;
        let cfg = &self.config;

        let mut next = state.clone();
        let mut requests = vec![None; n];
        for (c, &u) in utilization.iter().enumerate() {
            if self.is_asleep(u) {
                continue;
            }
            let r = ospm_request(
                &cfg.policy,
                u,
                state.cores[c].request,
                ladder,
                cfg.turbo_enabled,
            );
            next.cores[c].request = r;
            requests[c] = Some(r);
        }

        let grants = arbitrate(
            &cfg.arbiter,
            &requests,
            &self.spec,
            self.budget_watts,
            cfg.granularity_deciwatts,
        )?;
        let package_watts = grant_watts(&self.spec, &grants);

        let mut rows = Vec::with_capacity(n);
        for (c, &u) in utilization.iter().enumerate() {
            let granted_khz = grants[c].map_or(0, |l| ladder.freq_khz(l));
            let unhalted_ms = match grants[c] {
                Some(_) => ((u * cfg.tick_seconds * 1000.0).round() as u64).max(1),
                None => 0,
            };
            let prev = state.cores[c].counters;
            let curr = prev.advance(granted_khz, unhalted_ms)?;
            next.cores[c].counters = curr;
            let measured_khz = match measure_frequency(&prev, &curr) {
                Ok(khz) => Some(khz),
                Err(Error::NoReferenceCycles) => None,
                Err(e) => return Err(e),
            };
            if grants[c].is_some() && measured_khz != Some(granted_khz) {
                return Err(Error::Invariant(format!(
                    "core {c} measured {measured_khz:?} kHz, granted {granted_khz} kHz"
                )));
            }
            rows.push(SimTraceRow {
                time_s,
                core_id: c,
                utilization: u,
                granted_khz,
                measured_khz,
                package_watts,
            });
        }
        next.processor.per_core_level = grants;
        next.tick += 1;
        Ok((next, rows))
    }

    pub fn run(&self, trace: &Trace) -> Result<SimOutput> {
        if trace.ticks.is_empty() {
            return Err(Error::Config("empty trace".into()));
        }
        if trace.n_cores != self.spec.n_cores {
            return Err(Error::Config(format!(
                "trace has {} cores, processor has {}",
                trace.n_cores, self.spec.n_cores
            )));
        }
        let n = self.spec.n_cores;
        let mut state = self.initial_state();
        let mut rows = Vec::with_capacity(trace.ticks.len() * n);
        let mut tick_freq_sums = Vec::with_capacity(trace.ticks.len());
        let mut tick_watts = Vec::with_capacity(trace.ticks.len());
        for (i, tick) in trace.ticks.iter().enumerate() {
            let (next, tick_rows) = self
                .advance_tick(&state, tick.time_s, &tick.utilization)
                .map_err(|e| Error::Tick {
                    tick: i,
                    source: Box::new(e),
                })?;
            state = next;
            tick_freq_sums.push(grant_khz_sum(&self.spec, &state.processor.per_core_level));
            tick_watts.push(tick_rows[0].package_watts);
            rows.extend(tick_rows);
        }
        let summary = self.summarize(&rows, &state, &tick_freq_sums, &tick_watts);
        Ok(SimOutput {
            rows,
            tick_freq_sums,
            tick_watts,
            summary,
        })
    }

    /// Runs `self` and `reference` on the same trace and records the
    /// performance delta of `self` against `reference`.
    pub fn run_against(&self, reference: &SimOutput, trace: &Trace) -> Result<SimOutput> {
        let mut out = self.run(trace)?;
        out.summary.performance_delta_percent =
            Some(performance_delta_percent(&reference.summary, &out.summary));
        Ok(out)
    }

    fn summarize(
        &self,
        rows: &[SimTraceRow],
        last: &SimState,
        freq_sums: &[Khz],
        watts: &[Watts],
    ) -> SummaryStats {
        let n = self.spec.n_cores;
        let ticks = watts.len();
        let mut awake_ticks = vec![0usize; n];
        let mut khz_sum = vec![0u64; n];
        let mut turbo_core_ticks = 0;
        let f0 = self.spec.ladder.guaranteed_khz();
        for r in rows.iter().filter(|r| r.granted_khz > 0) {
            awake_ticks[r.core_id] += 1;
            khz_sum[r.core_id] += r.granted_khz;
            if r.granted_khz > f0 {
                turbo_core_ticks += 1;
            }
        }
        let max_package_watts = watts.iter().copied().fold(0.0, f64::max);
        let bins = (max_package_watts / HISTOGRAM_BIN_WATTS).floor() as usize + 1;
        let mut histogram: Vec<HistogramBin> = (0..bins)
            .map(|b| HistogramBin {
                lo_watts: b as f64 * HISTOGRAM_BIN_WATTS,
                hi_watts: (b + 1) as f64 * HISTOGRAM_BIN_WATTS,
                ticks: 0,
            })
            .collect();
        for w in watts {
            histogram[(w / HISTOGRAM_BIN_WATTS).floor() as usize].ticks += 1;
        }
        let total_watts: f64 = watts.iter().sum();
        SummaryStats {
            governor: policy_name(&self.config.policy).into(),
            arbiter: self.config.arbiter.name().into(),
            turbo_enabled: self.config.turbo_enabled,
            rng_seed: self.config.rng_seed,
            n_cores: n,
            ticks,
            tick_seconds: self.config.tick_seconds,
            budget_watts: self.budget_watts,
            total_core_cycles: last
                .cores
                .iter()
                .map(|c| c.counters.unhalted_core_cycles)
                .sum(),
            total_granted_khz: freq_sums.iter().sum(),
            mean_granted_khz: (0..n)
                .map(|c| (awake_ticks[c] > 0).then(|| khz_sum[c] as f64 / awake_ticks[c] as f64))
                .collect(),
            mean_package_watts: if ticks > 0 {
                total_watts / ticks as f64
            } else {
                0.0
            },
            max_package_watts,
            energy_joules: total_watts * self.config.tick_seconds,
            budget_violation_ticks: watts
                .iter()
                .filter(|&&w| w > self.budget_watts + 1e-9)
                .count(),
            turbo_core_ticks,
            watts_histogram: histogram,
            performance_delta_percent: None,
        }
    }
}
