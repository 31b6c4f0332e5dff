//! Processor, frequency-ladder and power-model types.
//!
//! Ladders are stored in ascending frequency order: index 0 is the slowest
//! operating point, `guaranteed_index` is the maximum guaranteed frequency
//! `f_0`, and every level above it is a Turbo level `f_1..f_m`. The
//! descending P-state view the BIOS exports to the OS is produced on demand
//! by [`export_pstate_table`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Khz = u64;
pub type Watts = f64;

/// The BIOS reports Turbo as one fake operating point this far above `f_0`.
pub const TURBO_INDICATOR_OFFSET_KHZ: Khz = 1_000;
pub const DEFAULT_BUS_CLOCK_KHZ: Khz = 133_333;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoreId(pub usize);

impl fmt::Display for CoreId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyLevel {
    pub index: usize,
    pub freq_khz: Khz,
    pub is_turbo: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voltage_v: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyLadder {
    pub levels: Vec<FrequencyLevel>,
    pub guaranteed_index: usize,
    #[serde(default = "default_bus_clock")]
    pub bus_clock_khz: Khz,
}

fn default_bus_clock() -> Khz {
    DEFAULT_BUS_CLOCK_KHZ
}

impl FrequencyLadder {
    /// Builds a ladder from ascending frequencies; levels above
    /// `guaranteed_index` are flagged as Turbo.
    pub fn new(freqs_khz: &[Khz], guaranteed_index: usize, bus_clock_khz: Khz) -> Self {
        let levels = freqs_khz
            .iter()
            .enumerate()
            .map(|(index, &freq_khz)| FrequencyLevel {
                index,
                freq_khz,
                is_turbo: index > guaranteed_index,
                voltage_v: None,
            })
            .collect();
        Self {
            levels,
            guaranteed_index,
            bus_clock_khz,
        }
    }

    /// One level per bus ratio in `ratios`, `f = ratio * bus_clock_khz`.
    pub fn from_bus_ratios(
        ratios: std::ops::RangeInclusive<u32>,
        guaranteed_ratio: u32,
        bus_clock_khz: Khz,
    ) -> Self {
        let lo = *ratios.start();
        let freqs: Vec<Khz> = ratios.map(|r| r as Khz * bus_clock_khz).collect();
        Self::new(
            &freqs,
            guaranteed_ratio.saturating_sub(lo) as usize,
            bus_clock_khz,
        )
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn guaranteed(&self) -> &FrequencyLevel {
        &self.levels[self.guaranteed_index]
    }

    pub fn guaranteed_khz(&self) -> Khz {
        self.guaranteed().freq_khz
    }

    pub fn top_index(&self) -> usize {
        self.levels.len() - 1
    }

    /// Number of Turbo levels, `m`.
    pub fn turbo_count(&self) -> usize {
        self.top_index() - self.guaranteed_index
    }

    pub fn freq_khz(&self, index: usize) -> Khz {
        self.levels[index].freq_khz
    }

    pub fn indicator_khz(&self) -> Khz {
        self.guaranteed_khz() + TURBO_INDICATOR_OFFSET_KHZ
    }

    pub fn index_of_khz(&self, khz: Khz) -> Option<usize> {
        self.levels.iter().position(|l| l.freq_khz == khz)
    }

    /// Highest level whose frequency does not exceed `khz`.
    pub fn highest_at_or_below(&self, khz: Khz) -> Option<usize> {
        self.levels.iter().rposition(|l| l.freq_khz <= khz)
    }

    /// Ladder indices an active core may be assigned: `f_0..=f_m`.
    pub fn choice_range(&self) -> std::ops::RangeInclusive<usize> {
        self.guaranteed_index..=self.top_index()
    }
}

/// One row of the ACPI-style table the BIOS hands to the OS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PStateTableEntry {
    pub pstate_index: usize,
    pub reported_khz: Khz,
    pub turbo_indicator: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookupRow {
    pub active_cores: usize,
    pub watts: Vec<Watts>,
}

/// Package power for `active_cores` cores all running the same Turbo level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookupTable {
    pub levels_khz: Vec<Khz>,
    pub rows: Vec<LookupRow>,
}

impl LookupTable {
    pub fn row(&self, active_cores: usize) -> Option<&LookupRow> {
        self.rows.iter().find(|r| r.active_cores == active_cores)
    }

    pub fn watts(&self, active_cores: usize, level_khz: Khz) -> Option<Watts> {
        let col = self.levels_khz.iter().position(|&k| k == level_khz)?;
        self.row(active_cores)?.watts.get(col).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PowerModel {
    /// `p_0..p_m` style watts, one entry per ladder level.
    #[serde(default)]
    pub per_core_watts: Vec<Watts>,
    /// Watts per (volt² · kHz).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_proportionality: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lookup_table: Option<LookupTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessorSpec {
    pub n_cores: usize,
    pub pow_max_watts: Watts,
    pub t_crit_c: f64,
    pub ladder: FrequencyLadder,
    pub power: PowerModel,
}

impl ProcessorSpec {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let mut spec: ProcessorSpec = serde_json::from_str(s)?;
        spec.fill_voltage_power()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Loads and validates, turning violations into an error.
    pub fn load_validated(path: impl AsRef<Path>) -> Result<Self> {
        let spec = Self::load(path)?;
        validate(&spec).map_err(Error::InvalidSpec)?;
        Ok(spec)
    }

    /// When no watt table is given, derive one from per-level voltages.
    /// An explicit table always wins.
    fn fill_voltage_power(&mut self) -> Result<()> {
        if !self.power.per_core_watts.is_empty() {
            return Ok(());
        }
        let Some(k) = self.power.k_proportionality else {
            return Ok(());
        };
        if self.ladder.levels.iter().all(|l| l.voltage_v.is_some()) {
            self.power.per_core_watts = self
                .ladder
                .levels
                .iter()
                .map(|l| derive_power_from_voltage(l, k))
                .collect::<Result<_>>()?;
        }
        Ok(())
    }

    pub fn level_watts(&self, index: usize) -> Watts {
        self.power.per_core_watts[index]
    }
}

/// Live processor state: which cores sleep, which level each active core runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessorState {
    /// `None` for a power-gated (asleep) core.
    pub per_core_level: Vec<Option<usize>>,
    pub temperature_c: f64,
}

impl ProcessorState {
    pub fn all_asleep(n_cores: usize, temperature_c: f64) -> Self {
        Self {
            per_core_level: vec![None; n_cores],
            temperature_c,
        }
    }

    pub fn n_active(&self) -> usize {
        self.per_core_level.iter().filter(|l| l.is_some()).count()
    }

    pub fn n_asleep(&self) -> usize {
        self.per_core_level.len() - self.n_active()
    }

    pub fn below_critical(&self, spec: &ProcessorSpec) -> bool {
        self.temperature_c < spec.t_crit_c
    }

    /// Sum of per-core watts; asleep cores draw nothing.
    pub fn package_watts(&self, spec: &ProcessorSpec) -> Watts {
        self.per_core_level
            .iter()
            .flatten()
            .map(|&l| spec.level_watts(l))
            .sum()
    }
}

/// What an active core runs at: `f_0`, or Turbo level `j` in `1..=m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    StayGuaranteed,
    Turbo(usize),
}

impl Choice {
    pub fn from_ladder_index(ladder: &FrequencyLadder, index: usize) -> Self {
        match index.saturating_sub(ladder.guaranteed_index) {
            0 => Choice::StayGuaranteed,
            j => Choice::Turbo(j),
        }
    }

    pub fn ladder_index(self, ladder: &FrequencyLadder) -> usize {
        match self {
            Choice::StayGuaranteed => ladder.guaranteed_index,
            Choice::Turbo(j) => ladder.guaranteed_index + j,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    pub choices: BTreeMap<CoreId, Choice>,
    pub total_watts: Watts,
    pub total_freq_khz: Khz,
}

impl Assignment {
    pub fn empty() -> Self {
        Self {
            choices: BTreeMap::new(),
            total_watts: 0.0,
            total_freq_khz: 0,
        }
    }

    pub fn from_choices(
        spec: &ProcessorSpec,
        choices: impl IntoIterator<Item = (CoreId, Choice)>,
    ) -> Self {
        let choices: BTreeMap<CoreId, Choice> = choices.into_iter().collect();
        let mut total_watts = 0.0;
        let mut total_freq_khz = 0;
        for c in choices.values() {
            let idx = c.ladder_index(&spec.ladder);
            total_watts += spec.level_watts(idx);
            total_freq_khz += spec.ladder.freq_khz(idx);
        }
        Self {
            choices,
            total_watts,
            total_freq_khz,
        }
    }

    pub fn chosen_khz(&self, spec: &ProcessorSpec, core: CoreId) -> Option<Khz> {
        self.choices
            .get(&core)
            .map(|c| spec.ladder.freq_khz(c.ladder_index(&spec.ladder)))
    }
}

/// `P = k · V² · f`, with `f` in kHz.
pub fn derive_power_from_voltage(level: &FrequencyLevel, k: f64) -> Result<Watts> {
    let v = level
        .voltage_v
        .ok_or(Error::VoltageUnavailable(level.index))?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidConstant(k));
    }
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::InvalidVoltage(v));
    }
    Ok(k * v * v * level.freq_khz as f64)
}

/// OS-visible P-state table, `P_0` first.
///
/// Real Turbo frequencies never appear. With Turbo enabled (and at least one
/// Turbo level present) `P_0` is the indicator at `f_0 + 1000 kHz`.
pub fn export_pstate_table(ladder: &FrequencyLadder, turbo_enabled: bool) -> Vec<PStateTableEntry> {
    let mut reported = Vec::with_capacity(ladder.guaranteed_index + 2);
    if turbo_enabled && ladder.turbo_count() > 0 {
        reported.push((ladder.indicator_khz(), true));
    }
    reported.extend(
        ladder.levels[..=ladder.guaranteed_index]
            .iter()
            .rev()
            .map(|l| (l.freq_khz, false)),
    );
    reported
        .into_iter()
        .enumerate()
        .map(
            |(pstate_index, (reported_khz, turbo_indicator))| PStateTableEntry {
                pstate_index,
                reported_khz,
                turbo_indicator,
            },
        )
        .collect()
}

/// What the OS can infer from a raw exported table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PStateSummary {
    pub guaranteed_index: usize,
    pub guaranteed_khz: Khz,
    pub turbo_present: bool,
}

/// Reads back a table of reported frequencies (highest first). The
/// indicator is recognised purely by its +1000 kHz offset from the entry
/// after it, so the flag column is not needed.
pub fn read_pstate_table(reported_khz: &[Khz]) -> Option<PStateSummary> {
    let (&first, rest) = reported_khz.split_first()?;
    let turbo_present = rest
        .first()
        .is_some_and(|&next| first == next + TURBO_INDICATOR_OFFSET_KHZ);
    let real = if turbo_present { rest } else { reported_khz };
    Some(PStateSummary {
        guaranteed_index: real.len() - 1,
        guaranteed_khz: real[0],
        turbo_present,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ViolationCode {
    EmptyLadder,
    GuaranteedIndexOutOfRange,
    LevelIndexMismatch,
    NonPositiveFrequency,
    NonAscendingLadder,
    TurboFlagMismatch,
    NonPositiveBusClock,
    OffBusGrid,
    IndicatorCollision,
    NoCores,
    NonPositivePowerLimit,
    NonPositiveCriticalTemperature,
    PowerLadderLengthMismatch,
    NonPositivePower,
    NonMonotonePower,
    InvalidProportionality,
    LookupShape,
    LookupLevelNotTurbo,
    NonMonotoneLookup,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::EmptyLadder => "empty ladder",
            ViolationCode::GuaranteedIndexOutOfRange => "guaranteed index out of range",
            ViolationCode::LevelIndexMismatch => "level index mismatch",
            ViolationCode::NonPositiveFrequency => "non-positive frequency",
            ViolationCode::NonAscendingLadder => "non-ascending ladder",
            ViolationCode::TurboFlagMismatch => "turbo flag mismatch",
            ViolationCode::NonPositiveBusClock => "non-positive bus clock",
            ViolationCode::OffBusGrid => "off bus grid",
            ViolationCode::IndicatorCollision => "indicator collides with real level",
            ViolationCode::NoCores => "no cores",
            ViolationCode::NonPositivePowerLimit => "non-positive power limit",
            ViolationCode::NonPositiveCriticalTemperature => "non-positive critical temperature",
            ViolationCode::PowerLadderLengthMismatch => "power/ladder length mismatch",
            ViolationCode::NonPositivePower => "non-positive power",
            ViolationCode::NonMonotonePower => "non-monotone power",
            ViolationCode::InvalidProportionality => "invalid constant",
            ViolationCode::LookupShape => "lookup table shape",
            ViolationCode::LookupLevelNotTurbo => "lookup level not turbo",
            ViolationCode::NonMonotoneLookup => "non-monotone lookup table",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.detail)
    }
}

/// Checks every structural invariant of a processor spec and reports all
/// breaches, not just the first.
pub fn validate(spec: &ProcessorSpec) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let mut v = |code, detail: String| out.push(Violation { code, detail });

    if spec.n_cores < 1 {
        v(ViolationCode::NoCores, "n_cores must be at least 1".into());
    }
    if !(spec.pow_max_watts > 0.0 && spec.pow_max_watts.is_finite()) {
        v(
            ViolationCode::NonPositivePowerLimit,
            format!("pow_max_watts = {}", spec.pow_max_watts),
        );
    }
    if !(spec.t_crit_c > 0.0 && spec.t_crit_c.is_finite()) {
        v(
            ViolationCode::NonPositiveCriticalTemperature,
            format!("t_crit_c = {}", spec.t_crit_c),
        );
    }

    let ladder = &spec.ladder;
    let levels = &ladder.levels;
    let ladder_ok = !levels.is_empty() && ladder.guaranteed_index < levels.len();
    if levels.is_empty() {
        v(ViolationCode::EmptyLadder, "ladder has no levels".into());
    } else if ladder.guaranteed_index >= levels.len() {
        v(
            ViolationCode::GuaranteedIndexOutOfRange,
            format!(
                "guaranteed_index {} with {} levels",
                ladder.guaranteed_index,
                levels.len()
            ),
        );
    }
    if ladder.bus_clock_khz == 0 {
        v(
            ViolationCode::NonPositiveBusClock,
            "bus_clock_khz = 0".into(),
        );
    }
    for (i, l) in levels.iter().enumerate() {
        if l.index != i {
            v(
                ViolationCode::LevelIndexMismatch,
                format!("level at position {i} has index {}", l.index),
            );
        }
        if l.freq_khz == 0 {
            v(ViolationCode::NonPositiveFrequency, format!("level {i}"));
        }
        if i > 0 && l.freq_khz <= levels[i - 1].freq_khz {
            v(
                ViolationCode::NonAscendingLadder,
                format!("level {i} ({} kHz) not above level {}", l.freq_khz, i - 1),
            );
        }
        if ladder_ok && l.is_turbo != (i > ladder.guaranteed_index) {
            v(
                ViolationCode::TurboFlagMismatch,
                format!("level {i} is_turbo = {}", l.is_turbo),
            );
        }
        if ladder.bus_clock_khz > 0 && l.freq_khz > 0 {
            // A fractional bus clock rounded to whole kHz may drift by up to
            // one kHz per multiple.
            let bus = ladder.bus_clock_khz;
            let ratio = (l.freq_khz + bus / 2) / bus;
            let drift = l.freq_khz.abs_diff(ratio * bus);
            if ratio == 0 || drift > ratio {
                v(
                    ViolationCode::OffBusGrid,
                    format!("level {i} ({} kHz) vs bus {} kHz", l.freq_khz, bus),
                );
            }
        }
    }
    if ladder_ok
        && ladder.turbo_count() > 0
        && ladder.index_of_khz(ladder.indicator_khz()).is_some()
    {
        v(
            ViolationCode::IndicatorCollision,
            format!("{} kHz", ladder.indicator_khz()),
        );
    }

    let power = &spec.power;
    if power.per_core_watts.len() != levels.len() {
        v(
            ViolationCode::PowerLadderLengthMismatch,
            format!(
                "{} watt entries for {} levels",
                power.per_core_watts.len(),
                levels.len()
            ),
        );
    }
    for (i, &w) in power.per_core_watts.iter().enumerate() {
        if !(w > 0.0 && w.is_finite()) {
            v(ViolationCode::NonPositivePower, format!("level {i}: {w} W"));
        }
        if i > 0 && w < power.per_core_watts[i - 1] {
            v(
                ViolationCode::NonMonotonePower,
                format!("level {i}: {w} W below level {}", i - 1),
            );
        }
    }
    if let Some(k) = power.k_proportionality {
        if !(k > 0.0 && k.is_finite()) {
            v(ViolationCode::InvalidProportionality, format!("k = {k}"));
        }
    }
    if let Some(table) = &power.lookup_table {
        for (c, &khz) in table.levels_khz.iter().enumerate() {
            let turbo = ladder
                .index_of_khz(khz)
                .is_some_and(|i| ladder_ok && i > ladder.guaranteed_index);
            if !turbo {
                v(ViolationCode::LookupLevelNotTurbo, format!("{khz} kHz"));
            }
            if c > 0 && khz <= table.levels_khz[c - 1] {
                v(ViolationCode::LookupShape, "levels_khz must ascend".into());
            }
        }
        let mut rows: Vec<&LookupRow> = table.rows.iter().collect();
        rows.sort_by_key(|r| r.active_cores);
        for (ri, row) in rows.iter().enumerate() {
            if row.watts.len() != table.levels_khz.len() {
                v(
                    ViolationCode::LookupShape,
                    format!(
                        "row for {} cores has {} entries",
                        row.active_cores,
                        row.watts.len()
                    ),
                );
                continue;
            }
            if ri > 0 && rows[ri - 1].active_cores == row.active_cores {
                v(
                    ViolationCode::LookupShape,
                    format!("duplicate row for {} cores", row.active_cores),
                );
            }
            for (c, &w) in row.watts.iter().enumerate() {
                if !(w > 0.0 && w.is_finite()) {
                    v(
                        ViolationCode::NonPositivePower,
                        format!("lookup ({}, {c}): {w} W", row.active_cores),
                    );
                }
                if c > 0 && w < row.watts[c - 1] {
                    v(
                        ViolationCode::NonMonotoneLookup,
                        format!("row {} decreases with level", row.active_cores),
                    );
                }
                if ri > 0 {
                    let prev = &rows[ri - 1];
                    if prev.watts.len() == row.watts.len() && w < prev.watts[c] {
                        v(
                            ViolationCode::NonMonotoneLookup,
                            format!("column {c} decreases with core count"),
                        );
                    }
                }
            }
        }
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}
