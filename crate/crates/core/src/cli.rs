//! Command-line front end: `solve`, `simulate`, `compare`, `bench` and
//! `gen-trace`.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 infeasible,
//! 3 internal invariant breach.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::governor::{GovernorPolicy, TurboArbiter};
use crate::model::{export_pstate_table, CoreId, Khz, ProcessorSpec};
use crate::sim::{performance_delta_percent, SimConfig, SimOutput, Simulation, SummaryStats};
use crate::solver::{
    lookup_assignment, random_instance, solve_brute_force, solve_exact_dp, solve_greedy,
    solve_lookup_uniform, SolveRequest, SolveResult,
};
use crate::trace_io::{
    emit_plot_data, emit_sim_trace, emit_trace, generate_trace, write_files, OutputFile, Pattern,
    Trace, WorkloadSpec,
};

#[derive(Debug, Parser)]
#[command(
    name = "turboscale",
    version,
    about = "Power-constrained Turbo frequency assignment and simulation"
)]
pub struct Cli {
    /// Seed for every random choice; overrides any seed in a config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assign frequencies to active cores under a power budget.
    Solve(SolveArgs),
    /// Replay a utilization trace through a governor and Turbo arbiter.
    Simulate(SimulateArgs),
    /// Run two arbiter configurations on one trace and compare them.
    Compare(CompareArgs),
    /// Time the exact and greedy solvers on random instances.
    Bench(BenchArgs),
    /// Write a synthetic utilization trace.
    GenTrace(GenTraceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Greedy,
    Lookup,
    Oracle,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Processor spec JSON. May also carry `budget_watts` and `active_cores`.
    #[arg(long)]
    pub spec: PathBuf,
    /// Number of active cores, taken as cores 0..N.
    #[arg(long, conflicts_with = "active_cores")]
    pub active: Option<usize>,
    /// Comma-separated active core ids.
    #[arg(long, value_delimiter = ',')]
    pub active_cores: Option<Vec<usize>>,
    /// Power budget in watts; defaults to the file's budget, then Pow_max.
    #[arg(long)]
    pub budget: Option<f64>,
    #[arg(long, value_enum, default_value = "exact")]
    pub method: MethodArg,
    /// Budget unit in tenths of a watt.
    #[arg(long, default_value_t = 1)]
    pub granularity: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GovernorArg {
    Ondemand,
    Userspace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArbiterArg {
    Baseline,
    Optimal,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

/// Overrides applied on top of a config file.
#[derive(Debug, Clone, Default, Args)]
pub struct SharedOverrides {
    /// Package power budget in watts.
    #[arg(long)]
    pub budget: Option<f64>,
    #[arg(long, value_enum)]
    pub governor: Option<GovernorArg>,
    /// Userspace target in kHz; defaults to the first exported P-state.
    #[arg(long)]
    pub target_khz: Option<Khz>,
    /// Ondemand up threshold.
    #[arg(long)]
    pub up_threshold: Option<f64>,
    /// Ondemand down threshold.
    #[arg(long)]
    pub down_threshold: Option<f64>,
    #[arg(long, value_enum)]
    pub turbo: Option<Switch>,
    /// Budget unit in tenths of a watt for the MCKP arbiters.
    #[arg(long)]
    pub granularity: Option<u32>,
    #[arg(long)]
    pub tick_seconds: Option<f64>,
    /// Cores below this utilization are put to sleep.
    #[arg(long)]
    pub idle_threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ArbiterOverrides {
    #[arg(long, value_enum)]
    pub arbiter: Option<ArbiterArg>,
    /// Baseline Turbo bins per active-core count, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub bins: Option<Vec<u32>>,
    /// Baseline BIOS frequency cap in kHz.
    #[arg(long)]
    pub bios_cap_khz: Option<Khz>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub trace: PathBuf,
    /// Simulation config JSON; built-in defaults when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub shared: SharedOverrides,
    #[command(flatten)]
    pub arbiter: ArbiterOverrides,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub trace: PathBuf,
    /// Config of the reference run A.
    #[arg(long)]
    pub config_a: Option<PathBuf>,
    /// Config of run B.
    #[arg(long)]
    pub config_b: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub arbiter_a: Option<ArbiterArg>,
    #[arg(long, value_enum)]
    pub arbiter_b: Option<ArbiterArg>,
    /// Directory for per-run outputs and `compare.json`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[command(flatten)]
    pub shared: SharedOverrides,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Core counts, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000")]
    pub n: Vec<usize>,
    /// Turbo level counts above f_0, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "14")]
    pub m: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub granularity: u32,
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    /// With `off`, timing columns print `-` so output is reproducible.
    #[arg(long, value_enum, default_value = "on")]
    pub timing: Switch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PatternArg {
    Constant,
    Square,
    PhasedRamp,
    RandomWalk,
}

#[derive(Debug, Args)]
pub struct GenTraceArgs {
    /// Workload JSON; the pattern flags are ignored when given.
    #[arg(long)]
    pub workload: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub n_cores: usize,
    #[arg(long, default_value_t = 60)]
    pub ticks: usize,
    #[arg(long, default_value_t = 1.0)]
    pub tick_seconds: f64,
    #[arg(long, value_enum, default_value = "constant")]
    pub pattern: PatternArg,
    #[arg(long, default_value_t = 1.0)]
    pub utilization: f64,
    #[arg(long, default_value_t = 10)]
    pub period: usize,
    #[arg(long, default_value_t = 1.0)]
    pub hi: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lo: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Simulate(a) => cmd_simulate(a, cli.seed, out),
        Command::Compare(a) => cmd_compare(a, cli.seed, out),
        Command::Bench(a) => cmd_bench(a, cli.seed.unwrap_or(0), out),
        Command::GenTrace(a) => cmd_gen_trace(a, cli.seed.unwrap_or(0), out),
    }
}

struct SolveFile {
    spec: ProcessorSpec,
    budget_watts: Option<f64>,
    active_cores: Option<Vec<usize>>,
}

fn load_solve_file(path: &Path) -> Result<SolveFile> {
    let mut value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::Config("spec file must hold a JSON object".into()))?;
    let budget_watts = obj
        .remove("budget_watts")
        .map(serde_json::from_value)
        .transpose()?;
    let active_cores = obj
        .remove("active_cores")
        .map(serde_json::from_value)
        .transpose()?;
    let spec = ProcessorSpec::from_json_str(&value.to_string())?;
    Ok(SolveFile {
        spec,
        budget_watts,
        active_cores,
    })
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> Result<()> {
    let file = load_solve_file(&a.spec)?;
    let spec = &file.spec;
    crate::model::validate(spec).map_err(Error::InvalidSpec)?;
    let active: Vec<CoreId> = match (&a.active, &a.active_cores, &file.active_cores) {
        (Some(n), _, _) => (0..*n).map(CoreId).collect(),
        (None, Some(ids), _) | (None, None, Some(ids)) => ids.iter().copied().map(CoreId).collect(),
        (None, None, None) => (0..spec.n_cores).map(CoreId).collect(),
    };
    let budget = a.budget.or(file.budget_watts).unwrap_or(spec.pow_max_watts);
    let req =
        SolveRequest::new(spec, active.iter().copied(), budget)?.with_granularity(a.granularity)?;

    let result = match a.method {
        MethodArg::Exact => solve_exact_dp(&req)?,
        MethodArg::Greedy => solve_greedy(&req)?,
        MethodArg::Oracle => solve_brute_force(&req)?,
        MethodArg::Lookup => {
            let table = spec
                .power
                .lookup_table
                .as_ref()
                .ok_or(Error::NoLookupTable)?;
            let n_active = req.active_cores().len();
            let Some(choice) = solve_lookup_uniform(table, n_active, budget)? else {
                return Err(Error::NoLookupLevel {
                    active_cores: n_active,
                    budget_watts: budget,
                });
            };
            let assignment = lookup_assignment(spec, &choice, req.active_cores().iter().copied())?;
            write_assignment(out, spec, &assignment.choices, |_| {
                choice.table_watts / n_active as f64
            })?;
            writeln!(out, "# level_khz={}", choice.level_khz)?;
            writeln!(out, "# objective_khz={}", assignment.total_freq_khz)?;
            writeln!(out, "# total_watts={:.3}", choice.table_watts)?;
            writeln!(out, "# method=lookup optimal=false")?;
            return Ok(());
        }
    };
    print_result(out, spec, &result)
}

fn write_assignment(
    out: &mut dyn Write,
    spec: &ProcessorSpec,
    choices: &std::collections::BTreeMap<CoreId, crate::model::Choice>,
    watts: impl Fn(usize) -> f64,
) -> Result<()> {
    writeln!(out, "core_id,chosen_khz,watts")?;
    for (core, choice) in choices {
        let idx = choice.ladder_index(&spec.ladder);
        writeln!(
            out,
            "{},{},{:.3}",
            core.0,
            spec.ladder.freq_khz(idx),
            watts(idx)
        )?;
    }
    Ok(())
}

fn print_result(out: &mut dyn Write, spec: &ProcessorSpec, r: &SolveResult) -> Result<()> {
    write_assignment(out, spec, &r.assignment.choices, |i| spec.level_watts(i))?;
    writeln!(out, "# objective_khz={}", r.objective_khz)?;
    writeln!(out, "# total_watts={:.3}", r.assignment.total_watts)?;
    writeln!(out, "# method={} optimal={}", r.method.as_str(), r.optimal)?;
    Ok(())
}

fn arbiter_from(arg: ArbiterArg, current: &TurboArbiter) -> TurboArbiter {
    match arg {
        ArbiterArg::Baseline => match current {
            TurboArbiter::BaselineHardLimit { .. } => current.clone(),
            _ => TurboArbiter::default(),
        },
        ArbiterArg::Optimal => TurboArbiter::OptimalMckp,
        ArbiterArg::Greedy => TurboArbiter::GreedyMckp,
    }
}

fn apply_shared(
    cfg: &mut SimConfig,
    o: &SharedOverrides,
    seed: Option<u64>,
    spec: &ProcessorSpec,
) -> Result<()> {
    if let Some(b) = o.budget {
        cfg.budget_watts = Some(b);
    }
    if let Some(t) = o.turbo {
        cfg.turbo_enabled = t == Switch::On;
    }
    if let Some(g) = o.granularity {
        cfg.granularity_deciwatts = g;
    }
    if let Some(t) = o.tick_seconds {
        cfg.tick_seconds = t;
    }
    if let Some(t) = o.idle_threshold {
        cfg.idle_sleep_threshold = t;
    }
    if let Some(s) = seed {
        cfg.rng_seed = s;
    }
    match o.governor {
        Some(GovernorArg::Ondemand) if !matches!(cfg.policy, GovernorPolicy::Ondemand { .. }) => {
            cfg.policy = GovernorPolicy::default();
        }
        Some(GovernorArg::Userspace) if !matches!(cfg.policy, GovernorPolicy::Userspace { .. }) => {
            let first = export_pstate_table(&spec.ladder, cfg.turbo_enabled)[0].reported_khz;
            cfg.policy = GovernorPolicy::Userspace { target_khz: first };
        }
        _ => {}
    }
    match &mut cfg.policy {
        GovernorPolicy::Ondemand {
            up_threshold,
            down_threshold,
        } => {
            if o.target_khz.is_some() {
                return Err(Error::Config(
                    "--target-khz needs the userspace governor".into(),
                ));
            }
            *up_threshold = o.up_threshold.unwrap_or(*up_threshold);
            *down_threshold = o.down_threshold.unwrap_or(*down_threshold);
        }
        GovernorPolicy::Userspace { target_khz } => {
            if o.up_threshold.is_some() || o.down_threshold.is_some() {
                return Err(Error::Config(
                    "thresholds need the ondemand governor".into(),
                ));
            }
            *target_khz = o.target_khz.unwrap_or(*target_khz);
        }
    }
    Ok(())
}

fn apply_arbiter(cfg: &mut SimConfig, o: &ArbiterOverrides) -> Result<()> {
    if let Some(a) = o.arbiter {
        cfg.arbiter = arbiter_from(a, &cfg.arbiter);
    }
    if o.bins.is_some() || o.bios_cap_khz.is_some() {
        let TurboArbiter::BaselineHardLimit {
            bin_table,
            bios_cap_khz,
        } = &mut cfg.arbiter
        else {
            return Err(Error::Config(
                "--bins and --bios-cap-khz need the baseline arbiter".into(),
            ));
        };
        if let Some(b) = &o.bins {
            *bin_table = b.clone();
        }
        if o.bios_cap_khz.is_some() {
            *bios_cap_khz = o.bios_cap_khz;
        }
    }
    Ok(())
}

fn load_config(path: Option<&PathBuf>) -> Result<SimConfig> {
    path.map_or_else(|| Ok(SimConfig::default()), SimConfig::load)
}

fn run_files(out: &SimOutput, spec: &ProcessorSpec) -> Result<Vec<OutputFile>> {
    let mut files = vec![OutputFile {
        name: "trace.csv".into(),
        contents: emit_sim_trace(&out.rows),
    }];
    files.extend(emit_plot_data(&out.rows, &spec.ladder));
    files.push(OutputFile {
        name: "summary.json".into(),
        contents: to_json(&out.summary)?,
    });
    Ok(files)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn cmd_simulate(a: &SimulateArgs, seed: Option<u64>, out: &mut dyn Write) -> Result<()> {
    let spec = ProcessorSpec::load(&a.spec)?;
    let trace = Trace::load(&a.trace)?;
    let mut cfg = load_config(a.config.as_ref())?;
    apply_shared(&mut cfg, &a.shared, seed, &spec)?;
    apply_arbiter(&mut cfg, &a.arbiter)?;
    let sim = Simulation::new(spec, cfg)?;
    let result = sim.run(&trace)?;
    write_files(&a.out_dir, &run_files(&result, sim.spec())?)?;
    write!(out, "{}", to_json(&result.summary)?)?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct CompareReport {
    pub a: SummaryStats,
    pub b: SummaryStats,
    /// `(A − B) / A × 100` over total core cycles.
    pub perf_delta_percent: f64,
    pub ticks: usize,
    /// Ticks on which B's granted frequency sum is at least A's.
    pub b_ge_a_ticks: usize,
    pub a_ge_b_ticks: usize,
    pub b_gt_a_ticks: usize,
    pub a_gt_b_ticks: usize,
}

pub fn compare_outputs(a: &SimOutput, b: &SimOutput) -> CompareReport {
    let pairs = || a.tick_freq_sums.iter().zip(&b.tick_freq_sums);
    CompareReport {
        a: a.summary.clone(),
        b: b.summary.clone(),
        perf_delta_percent: performance_delta_percent(&a.summary, &b.summary),
        ticks: a.tick_freq_sums.len(),
        b_ge_a_ticks: pairs().filter(|(x, y)| y >= x).count(),
        a_ge_b_ticks: pairs().filter(|(x, y)| x >= y).count(),
        b_gt_a_ticks: pairs().filter(|(x, y)| y > x).count(),
        a_gt_b_ticks: pairs().filter(|(x, y)| x > y).count(),
    }
}

fn cmd_compare(a: &CompareArgs, seed: Option<u64>, out: &mut dyn Write) -> Result<()> {
    let spec = ProcessorSpec::load(&a.spec)?;
    let trace = Trace::load(&a.trace)?;
    let run = |config: Option<&PathBuf>, arbiter: Option<ArbiterArg>| -> Result<SimOutput> {
        let mut cfg = load_config(config)?;
        apply_shared(&mut cfg, &a.shared, seed, &spec)?;
        apply_arbiter(
            &mut cfg,
            &ArbiterOverrides {
                arbiter,
                ..Default::default()
            },
        )?;
        Simulation::new(spec.clone(), cfg)?.run(&trace)
    };
    let run_a = run(a.config_a.as_ref(), a.arbiter_a)?;
    let run_b = run(a.config_b.as_ref(), a.arbiter_b)?;
    let report = compare_outputs(&run_a, &run_b);
    let json = to_json(&report)?;
    if let Some(dir) = &a.out_dir {
        write_files(dir.join("a"), &run_files(&run_a, &spec)?)?;
        write_files(dir.join("b"), &run_files(&run_b, &spec)?)?;
        write_files(
            dir,
            &[OutputFile {
                name: "compare.json".into(),
                contents: json.clone(),
            }],
        )?;
    }
    write!(out, "{json}")?;
    Ok(())
}

fn median_ms(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    }
}

/// One row of the bench table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n_cores: usize,
    pub turbo_levels: usize,
    pub granularity_deciwatts: u32,
    pub repetitions: usize,
    pub exact_median_ms: f64,
    pub greedy_median_ms: f64,
    pub exact_total_khz: u64,
    pub greedy_total_khz: u64,
    pub max_gap_khz: u64,
}

/// Runs both solvers `repetitions` times on seeded random instances.
pub fn bench_size(
    n: usize,
    m: usize,
    granularity: u32,
    repetitions: usize,
    seed: u64,
) -> Result<BenchRow> {
    let mut exact_ms = Vec::with_capacity(repetitions);
    let mut greedy_ms = Vec::with_capacity(repetitions);
    let mut row = BenchRow {
        n_cores: n,
        turbo_levels: m,
        granularity_deciwatts: granularity,
        repetitions,
        exact_median_ms: 0.0,
        greedy_median_ms: 0.0,
        exact_total_khz: 0,
        greedy_total_khz: 0,
        max_gap_khz: 0,
    };
    for rep in 0..repetitions {
        let inst = random_instance(n, m, seed.wrapping_add(rep as u64));
        let req = SolveRequest::new(&inst.spec, (0..n).map(CoreId), inst.budget_watts)?
            .with_granularity(granularity)?;
        let t = Instant::now();
        let exact = solve_exact_dp(&req)?;
        exact_ms.push(t.elapsed().as_secs_f64() * 1e3);
        let t = Instant::now();
        let greedy = solve_greedy(&req)?;
        greedy_ms.push(t.elapsed().as_secs_f64() * 1e3);
        row.exact_total_khz += exact.objective_khz;
        row.greedy_total_khz += greedy.objective_khz;
        row.max_gap_khz = row
            .max_gap_khz
            .max(exact.objective_khz.saturating_sub(greedy.objective_khz));
    }
    row.exact_median_ms = median_ms(&mut exact_ms);
    row.greedy_median_ms = median_ms(&mut greedy_ms);
    Ok(row)
}

fn cmd_bench(a: &BenchArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    if a.repetitions == 0 || a.granularity == 0 || a.n.contains(&0) {
        return Err(Error::Config(
            "sizes, repetitions and granularity must be at least 1".into(),
        ));
    }
    writeln!(
        out,
        "n_cores,turbo_levels,granularity_deciwatts,repetitions,exact_median_ms,greedy_median_ms,exact_total_khz,greedy_total_khz,max_gap_khz"
    )?;
    for &n in &a.n {
        for &m in &a.m {
            let r = bench_size(n, m, a.granularity, a.repetitions, seed)?;
            let (e, g) = match a.timing {
                Switch::On => (
                    format!("{:.3}", r.exact_median_ms),
                    format!("{:.3}", r.greedy_median_ms),
                ),
                Switch::Off => ("-".into(), "-".into()),
            };
            writeln!(
                out,
                "{},{},{},{},{e},{g},{},{},{}",
                r.n_cores,
                r.turbo_levels,
                r.granularity_deciwatts,
                r.repetitions,
                r.exact_total_khz,
                r.greedy_total_khz,
                r.max_gap_khz
            )?;
        }
    }
    Ok(())
}

fn cmd_gen_trace(a: &GenTraceArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    let spec = match &a.workload {
        Some(path) => {
            let mut w: WorkloadSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            w.seed = seed;
            w
        }
        None => WorkloadSpec {
            n_cores: a.n_cores,
            duration_ticks: a.ticks,
            pattern: match a.pattern {
                PatternArg::Constant => Pattern::Constant {
                    utilization: a.utilization,
                },
                PatternArg::Square => Pattern::Square {
                    period: a.period,
                    hi: a.hi,
                    lo: a.lo,
                },
                PatternArg::PhasedRamp => Pattern::PhasedRamp,
                PatternArg::RandomWalk => Pattern::RandomWalk { step: a.step },
            },
            seed,
            tick_seconds: a.tick_seconds,
        },
    };
    let text = emit_trace(&generate_trace(&spec)?);
    match &a.out {
        Some(path) => std::fs::write(path, text)?,
        None => write!(out, "{text}")?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn help_exits_zero_and_bad_flag_exits_one() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["turboscale", "--help"], &mut o, &mut e), 0);
        assert!(String::from_utf8(o).unwrap().contains("simulate"));
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["turboscale", "solve", "--bogus"], &mut o, &mut e), 1);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median_ms(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median_ms(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn single_core_bench_has_no_gap() {
        let r = bench_size(1, 14, 1, 3, 0).unwrap();
        assert_eq!(r.max_gap_khz, 0);
    }
}
