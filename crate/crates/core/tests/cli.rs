use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;

use turboscale::cli::run;

fn fixture(rel: &str) -> String {
    format!("{}/fixtures/{rel}", env!("CARGO_MANIFEST_DIR"))
}

fn invoke(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["turboscale"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn objective(stdout: &str) -> &str {
    stdout
        .lines()
        .find(|l| l.starts_with("# objective_khz="))
        .expect("objective line")
}

fn csv_column(path: &Path, col: &str) -> Vec<String> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let idx = rdr
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == col)
        .unwrap();
    rdr.records().map(|r| r.unwrap()[idx].to_string()).collect()
}

fn read_json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_lookup_picks_table_level() {
    let spec = fixture("specs/package_power_table.json");
    let (code, out, _) = invoke(&[
        "solve", "--spec", &spec, "--active", "2", "--budget", "132", "--method", "lookup",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("# level_khz=2500000"));
    let (code, out, _) = invoke(&[
        "solve", "--spec", &spec, "--active", "2", "--budget", "131", "--method", "lookup",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("# level_khz=2300000"));
    let (code, _, err) = invoke(&[
        "solve", "--spec", &spec, "--active", "4", "--budget", "139", "--method", "lookup",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("infeasible"));
}

#[test]
fn solve_tiny_budget_is_infeasible() {
    let (code, out, err) = invoke(&[
        "solve",
        "--spec",
        &fixture("specs/i7_default.json"),
        "--budget",
        "0.1",
    ]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("infeasible: guaranteed floor exceeds budget"));
}

#[test]
fn solve_exact_and_oracle_agree() {
    let spec = fixture("specs/small_instance.json");
    let (c1, exact, _) = invoke(&["solve", "--spec", &spec, "--method", "exact"]);
    let (c2, oracle, _) = invoke(&["solve", "--spec", &spec, "--method", "oracle"]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(objective(&exact), objective(&oracle));
    // Identical tie-breaking means identical assignments too.
    let body = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with("# method"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(body(&exact), body(&oracle));
    assert!(exact.starts_with("core_id,chosen_khz,watts\n0,"));
    assert!(
        !exact.contains("\n3,"),
        "core 3 is not active in the instance file"
    );
}

#[test]
fn solve_greedy_respects_budget() {
    let (code, out, _) = invoke(&[
        "solve",
        "--spec",
        &fixture("specs/i7_default.json"),
        "--active-cores",
        "0,2",
        "--budget",
        "60",
        "--method",
        "greedy",
    ]);
    assert_eq!(code, 0);
    let total: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("# total_watts="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(total <= 60.0);
    assert!(out.contains("# method=greedy optimal=false"));
}

#[test]
fn invalid_spec_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = read_json(fixture("specs/i7_default.json").into());
    v["power"]["per_core_watts"].as_array_mut().unwrap().pop();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    let (code, _, err) = invoke(&["solve", "--spec", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("power/ladder length mismatch"), "{err}");
}

#[test]
fn malformed_trace_cites_line() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    std::fs::write(
        &trace,
        "time_s,core_id,utilization\n0,0,1\n0,1,1\n0,2,1\n0,3,2.5\n",
    )
    .unwrap();
    let (code, _, err) = invoke(&[
        "simulate",
        "--spec",
        &fixture("specs/i7_default.json"),
        "--trace",
        trace.to_str().unwrap(),
        "--out-dir",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("line 5"), "{err}");
}

fn simulate_tblastx(dir: &Path, extra: &[&str]) -> (i32, String) {
    let mut args = vec![
        "simulate".to_string(),
        "--spec".into(),
        fixture("specs/i7_default.json"),
        "--trace".into(),
        fixture("traces/tblastx_like.csv"),
        "--config".into(),
        fixture("configs/i7_userspace_indicator.json"),
        "--out-dir".into(),
        dir.to_str().unwrap().into(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let (code, out, err) = invoke(&refs);
    assert_eq!(code, 0, "{err}");
    (code, out)
}

#[test]
fn tblastx_like_visits_bins_by_active_count() {
    let dir = tempfile::tempdir().unwrap();
    simulate_tblastx(dir.path(), &[]);
    let trace = dir.path().join("trace.csv");
    let times = csv_column(&trace, "time_s");
    let util = csv_column(&trace, "utilization");
    let granted = csv_column(&trace, "granted_khz");
    // Bins [2, 1, 1, 1] above 3 192 000 kHz on a 133 000 kHz bus.
    let expected = |active: usize| if active == 1 { 3_458_000 } else { 3_325_000 };
    let mut visited = BTreeSet::new();
    for tick in 0..times.len() / 4 {
        let rows = tick * 4..tick * 4 + 4;
        let active = rows.clone().filter(|&r| util[r] != "0").count();
        for r in rows {
            let g: u64 = granted[r].parse().unwrap();
            if util[r] == "0" {
                assert_eq!(g, 0);
            } else {
                assert_eq!(g, expected(active), "tick {tick}");
                visited.insert(g);
            }
        }
    }
    assert_eq!(visited, BTreeSet::from([3_325_000, 3_458_000]));
    for f in ["core_0.csv", "core_3.csv", "reference.csv", "summary.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert_eq!(
        std::fs::read_to_string(dir.path().join("reference.csv")).unwrap(),
        "guaranteed_khz\n3192000\n"
    );
}

#[test]
fn turbo_off_never_exceeds_guaranteed() {
    let dir = tempfile::tempdir().unwrap();
    simulate_tblastx(dir.path(), &["--turbo", "off"]);
    let granted = csv_column(&dir.path().join("trace.csv"), "granted_khz");
    assert!(granted
        .iter()
        .all(|g| g.parse::<u64>().unwrap() <= 3_192_000));
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (_, out_a) = simulate_tblastx(
        a.path(),
        &["--seed", "5", "--arbiter", "optimal", "--budget", "120"],
    );
    let (_, out_b) = simulate_tblastx(
        b.path(),
        &["--seed", "5", "--arbiter", "optimal", "--budget", "120"],
    );
    assert_eq!(out_a, out_b);
    for f in ["trace.csv", "core_1.csv", "reference.csv", "summary.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    assert_eq!(read_json(a.path().join("summary.json"))["rng_seed"], 5);
}

fn compare(args: &[&str]) -> serde_json::Value {
    let mut argv = vec!["compare", "--spec", "", "--trace", ""];
    let spec = fixture("specs/i7_modified_bios.json");
    let trace = fixture("traces/saturated_3core.csv");
    argv[2] = &spec;
    argv[4] = &trace;
    argv.extend_from_slice(args);
    let (code, out, err) = invoke(&argv);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn optimal_dominates_capped_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let a = fixture("configs/modified_bios_optimal.json");
    let b = fixture("configs/modified_bios_baseline_capped.json");
    let report = compare(&[
        "--config-a",
        &a,
        "--config-b",
        &b,
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(report["perf_delta_percent"].as_f64().unwrap() > 0.0);
    assert_eq!(report["a_ge_b_ticks"], report["ticks"]);
    assert_eq!(read_json(dir.path().join("compare.json")), report);
    assert!(dir.path().join("a/trace.csv").exists() && dir.path().join("b/trace.csv").exists());
}

#[test]
fn arbiter_against_itself_is_zero() {
    let report = compare(&[
        "--arbiter-a",
        "optimal",
        "--arbiter-b",
        "optimal",
        "--budget",
        "88",
    ]);
    assert_eq!(report["perf_delta_percent"].as_f64().unwrap(), 0.0);
    assert_eq!(report["a_gt_b_ticks"], 0);
    assert_eq!(report["b_gt_a_ticks"], 0);
}

#[test]
fn cap_costs_performance_on_saturating_trace() {
    let a = fixture("configs/modified_bios_baseline_uncapped.json");
    let b = fixture("configs/modified_bios_baseline_capped.json");
    let report = compare(&["--config-a", &a, "--config-b", &b]);
    assert!(report["perf_delta_percent"].as_f64().unwrap() > 0.0);
}

#[test]
fn bench_gap_is_never_negative_and_single_core_is_exact() {
    let (code, out, _) = invoke(&[
        "bench",
        "--n",
        "1,3,20",
        "--m",
        "2,5",
        "--repetitions",
        "2",
        "--timing",
        "off",
    ]);
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        let exact: u64 = r[6].parse().unwrap();
        let greedy: u64 = r[7].parse().unwrap();
        assert!(exact >= greedy);
        if &r[0] == "1" {
            assert_eq!(&r[8], "0");
        }
    }
    let (_, again, _) = invoke(&[
        "bench",
        "--n",
        "1,3,20",
        "--m",
        "2,5",
        "--repetitions",
        "2",
        "--timing",
        "off",
    ]);
    assert_eq!(out, again);
}

#[test]
fn gen_trace_follows_seed() {
    let args = |seed: &'static str| {
        [
            "gen-trace",
            "--pattern",
            "random-walk",
            "--n-cores",
            "3",
            "--ticks",
            "20",
            "--seed",
            seed,
        ]
    };
    let (_, a, _) = invoke(&args("1"));
    let (_, b, _) = invoke(&args("1"));
    let (_, c, _) = invoke(&args("2"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.lines().count(), 61);
}

#[test]
fn override_conflicts_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    let spec = fixture("specs/i7_default.json");
    let trace = fixture("traces/saturated_3core.csv");
    let (code, _, err) = invoke(&[
        "simulate",
        "--spec",
        &spec,
        "--trace",
        &trace,
        "--out-dir",
        o,
        "--arbiter",
        "optimal",
        "--bins",
        "3,2",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("baseline"));
    let (code, _, _) = invoke(&[
        "simulate",
        "--spec",
        &spec,
        "--trace",
        &trace,
        "--out-dir",
        o,
        "--up-threshold",
        "0.1",
        "--down-threshold",
        "0.5",
    ]);
    assert_eq!(code, 1);
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_turboscale");
    let spec = fixture("specs/package_power_table.json");
    let ok = Command::new(exe)
        .args([
            "solve", "--spec", &spec, "--active", "2", "--budget", "132", "--method", "lookup",
        ])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("0,2500000,"));
    let infeasible = Command::new(exe)
        .args(["solve", "--spec", &spec, "--budget", "0.1"])
        .output()
        .unwrap();
    assert_eq!(infeasible.status.code(), Some(2));
    let missing = Command::new(exe)
        .args(["solve", "--spec", "/nonexistent.json"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
    let help = Command::new(exe).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}
