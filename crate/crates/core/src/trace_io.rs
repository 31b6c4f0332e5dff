//! Utilization traces: parsing, synthetic generation and CSV emission.
//!
//! Input traces are CSV with header `time_s,core_id,utilization` and one
//! row per core per tick. Output traces add `granted_khz`, `measured_khz`
//! and `package_watts`. All text is LF-terminated with `.` as the decimal
//! point.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, LineError, Result};
use crate::model::FrequencyLadder;
use crate::sim::SimTraceRow;

pub const INPUT_HEADER: [&str; 3] = ["time_s", "core_id", "utilization"];
pub const OUTPUT_HEADER: &str = "time_s,core_id,utilization,granted_khz,measured_khz,package_watts";

#[derive(Debug, Clone, PartialEq)]
pub struct TraceTick {
    pub time_s: f64,
    /// Indexed by core id.
    pub utilization: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub n_cores: usize,
    pub ticks: Vec<TraceTick>,
}

impl Trace {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        parse_trace(&std::fs::read(path)?)
    }

    pub fn rows(&self) -> usize {
        self.n_cores * self.ticks.len()
    }
}

struct ParsedRow {
    line: u64,
    time_s: f64,
    core: usize,
    utilization: f64,
}

/// Parses and validates an input trace, reporting every bad line.
pub fn parse_trace(bytes: &[u8]) -> Result<Trace> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes);
    let mut errors = Vec::new();
    let err = |line: u64, reason: String| LineError { line, reason };

    match reader.headers() {
        Ok(h) if h.iter().eq(INPUT_HEADER) => {}
        Ok(h) => {
            let got: Vec<&str> = h.iter().collect();
            return Err(Error::Trace(vec![err(
                1,
                format!(
                    "expected header {}, found {}",
                    INPUT_HEADER.join(","),
                    got.join(",")
                ),
            )]));
        }
        Err(e) => return Err(Error::Trace(vec![err(1, e.to_string())])),
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                errors.push(err(line, e.to_string()));
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            errors.push(err(
                line,
                format!("expected 3 fields, found {}", record.len()),
            ));
            continue;
        }
        let time_s = match record[0].parse::<f64>() {
            Ok(t) if t.is_finite() && t >= 0.0 => t,
            _ => {
                errors.push(err(line, format!("bad time_s {:?}", &record[0])));
                continue;
            }
        };
        let Ok(core) = record[1].parse::<usize>() else {
            errors.push(err(line, format!("bad core_id {:?}", &record[1])));
            continue;
        };
        // A bad value still occupies its (time, core) slot, so it is not
        // reported a second time as a missing core.
        let utilization = match record[2].parse::<f64>() {
            Ok(u) if (0.0..=1.0).contains(&u) => u,
            Ok(u) => {
                errors.push(err(line, format!("utilization {u} outside [0, 1]")));
                0.0
            }
            Err(_) => {
                errors.push(err(line, format!("bad utilization {:?}", &record[2])));
                0.0
            }
        };
        rows.push(ParsedRow {
            line,
            time_s,
            core,
            utilization,
        });
    }
    if rows.is_empty() && errors.is_empty() {
        return Err(Error::Trace(vec![err(1, "empty trace".into())]));
    }

    let n_cores = rows.iter().map(|r| r.core + 1).max().unwrap_or(0);
    let mut ticks: Vec<TraceTick> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut tick_line = 0;
    for r in &rows {
        let new_tick = ticks.last().is_none_or(|t| t.time_s != r.time_s);
        if new_tick {
            if let Some(last) = ticks.last() {
                check_complete(&seen, n_cores, last.time_s, tick_line, &mut errors);
                if r.time_s < last.time_s {
                    errors.push(err(
                        r.line,
                        format!("time {} before {}", r.time_s, last.time_s),
                    ));
                    continue;
                }
            }
            ticks.push(TraceTick {
                time_s: r.time_s,
                utilization: vec![0.0; n_cores],
            });
            seen.clear();
            tick_line = r.line;
        }
        if !seen.insert(r.core) {
            errors.push(err(
                r.line,
                format!("core {} repeated at time {}", r.core, r.time_s),
            ));
            continue;
        }
        ticks.last_mut().expect("tick pushed above").utilization[r.core] = r.utilization;
    }
    if let Some(last) = ticks.last() {
        check_complete(&seen, n_cores, last.time_s, tick_line, &mut errors);
    }

    if errors.is_empty() {
        Ok(Trace { n_cores, ticks })
    } else {
        errors.sort_by_key(|e| e.line);
        Err(Error::Trace(errors))
    }
}

fn check_complete(
    seen: &BTreeSet<usize>,
    n_cores: usize,
    time_s: f64,
    line: u64,
    errors: &mut Vec<LineError>,
) {
    if seen.len() < n_cores {
        let missing: Vec<String> = (0..n_cores)
            .filter(|c| !seen.contains(c))
            .map(|c| c.to_string())
            .collect();
        errors.push(LineError {
            line,
            reason: format!("tick at time {time_s} missing cores {}", missing.join(" ")),
        });
    }
}

/// Canonical text form of an input trace.
pub fn emit_trace(trace: &Trace) -> String {
    let mut out = String::with_capacity(trace.rows() * 16 + 32);
    out.push_str(&INPUT_HEADER.join(","));
    out.push('\n');
    for t in &trace.ticks {
        for (c, u) in t.utilization.iter().enumerate() {
            let _ = writeln!(out, "{},{c},{u}", t.time_s);
        }
    }
    out
}

pub fn emit_sim_trace(rows: &[SimTraceRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 48 + 64);
    out.push_str(OUTPUT_HEADER);
    out.push('\n');
    for r in rows {
        let measured = r.measured_khz.map(|m| m.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.3}",
            r.time_s, r.core_id, r.utilization, r.granted_khz, measured, r.package_watts
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Pattern {
    Constant {
        utilization: f64,
    },
    /// `hi` for the first half of every period, `lo` for the rest.
    Square {
        period: usize,
        hi: f64,
        lo: f64,
    },
    /// The run splits into one phase per core. Phase `k` keeps the first
    /// `n - k` cores busy with utilization ramping from 0.5 to 1.0, the
    /// rest idle, so the active-core count steps down from `n` to 1.
    PhasedRamp,
    /// Per-core bounded walk starting at 0.5, steps uniform in `±step`.
    RandomWalk {
        step: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub n_cores: usize,
    pub duration_ticks: usize,
    pub pattern: Pattern,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "unit_tick")]
    pub tick_seconds: f64,
}

fn unit_tick() -> f64 {
    1.0
}

fn in_unit(u: f64) -> bool {
    (0.0..=1.0).contains(&u)
}

/// Four decimal places, the resolution utilization tools typically report.
fn quantize(u: f64) -> f64 {
    (u.clamp(0.0, 1.0) * 10_000.0).round() / 10_000.0
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.n_cores == 0 {
            return bad("n_cores must be at least 1");
        }
        if self.duration_ticks == 0 {
            return bad("duration must be at least one tick");
        }
        if !(self.tick_seconds > 0.0 && self.tick_seconds.is_finite()) {
            return bad("tick_seconds must be positive");
        }
        match self.pattern {
            Pattern::Constant { utilization } if !in_unit(utilization) => {
                bad("utilization outside [0, 1]")
            }
            Pattern::Square { period: 0, .. } => bad("period must be positive"),
            Pattern::Square { hi, lo, .. } if !in_unit(hi) || !in_unit(lo) => {
                bad("hi/lo outside [0, 1]")
            }
            Pattern::RandomWalk { step } if !in_unit(step) => bad("step outside [0, 1]"),
            _ => Ok(()),
        }
    }
}

/// Deterministic synthetic trace for `spec`.
pub fn generate_trace(spec: &WorkloadSpec) -> Result<Trace> {
    spec.validate()?;
    let n = spec.n_cores;
    let d = spec.duration_ticks;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut walk = vec![0.5; n];
    let phase_len = d.div_ceil(n);
    let ticks = (0..d)
        .map(|t| {
            let utilization = match spec.pattern {
                Pattern::Constant { utilization } => vec![utilization; n],
                Pattern::Square { period, hi, lo } => {
                    let u = if t % period < period / 2 || period == 1 {
                        hi
                    } else {
                        lo
                    };
                    vec![u; n]
                }
                Pattern::PhasedRamp => {
                    let phase = (t / phase_len).min(n - 1);
                    let pos = t % phase_len;
                    let u = quantize(0.5 + 0.5 * (pos + 1) as f64 / phase_len as f64);
                    (0..n)
                        .map(|c| if c < n - phase { u } else { 0.0 })
                        .collect()
                }
                Pattern::RandomWalk { step } => walk
                    .iter_mut()
                    .map(|w| {
                        if step > 0.0 {
                            *w = (*w + rng.gen_range(-step..=step)).clamp(0.0, 1.0);
                        }
                        quantize(*w)
                    })
                    .collect(),
            };
            TraceTick {
                time_s: t as f64 * spec.tick_seconds,
                utilization,
            }
        })
        .collect();
    Ok(Trace { n_cores: n, ticks })
}

/// A named text file destined for an output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

/// One `core_<id>.csv` per core (time, measured frequency, utilization) and
/// a `reference.csv` holding the maximum guaranteed frequency.
pub fn emit_plot_data(rows: &[SimTraceRow], ladder: &FrequencyLadder) -> Vec<OutputFile> {
    let n_cores = rows.iter().map(|r| r.core_id + 1).max().unwrap_or(0);
    let mut files: Vec<OutputFile> = (0..n_cores)
        .map(|c| OutputFile {
            name: format!("core_{c}.csv"),
            contents: "time_s,measured_khz,utilization\n".into(),
        })
        .collect();
    for r in rows {
        let measured = r.measured_khz.map(|m| m.to_string()).unwrap_or_default();
        let _ = writeln!(
            files[r.core_id].contents,
            "{},{},{}",
            r.time_s, measured, r.utilization
        );
    }
    files.push(OutputFile {
        name: "reference.csv".into(),
        contents: format!("guaranteed_khz\n{}\n", ladder.guaranteed_khz()),
    });
    files
}

pub fn write_files(dir: impl AsRef<Path>, files: &[OutputFile]) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    for f in files {
        std::fs::write(dir.join(&f.name), &f.contents)?;
    }
    Ok(())
}
