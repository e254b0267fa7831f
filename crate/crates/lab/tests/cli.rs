use std::path::Path;

use ea_lab::cli::{experiment_config, main_with, Cli, Command};
use ea_lab::config::Experiment;
use ea_lab::record::{read_csv, read_records};
use clap::Parser;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["ea-lab"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn solve_smoke() {
    let (code, out, _) = run(&["solve", "--d", "2", "--L", "4", "--bc", "fixed-plus", "--seed", "7"]);
    assert_eq!(code, 0);
    assert_eq!(field(&out, "method"), "exhaustive");
    assert_eq!(field(&out, "exact"), "true");
    assert_eq!(field(&out, "free_spins"), "9");
    assert_eq!(field(&out, "config").len(), 25);
    assert!(field(&out, "energy").parse::<f64>().unwrap() < 0.0);
}

#[test]
fn generated_files_solve_to_the_same_energy() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("inst");
    let prefix = prefix.to_str().unwrap();
    let (code, _, err) = run(&["gen", "--L", "3", "--seed", "5", "--replicate", "2", "--out", prefix]);
    assert_eq!(code, 0, "{err}");
    let graph = format!("{prefix}.graph");
    let couplings = format!("{prefix}.couplings.csv");
    let (_, direct, _) = run(&["solve", "--L", "3", "--seed", "5", "--replicate", "2"]);
    let (code, from_files, err) = run(&["solve", "--graph", &graph, "--couplings", &couplings]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(field(&direct, "energy"), field(&from_files, "energy"));
    assert_eq!(field(&direct, "config"), field(&from_files, "config"));
}

#[test]
fn inspect_reports_observables() {
    let (code, out, err) = run(&["inspect", "--L", "4", "--edge", "12", "--pair", "6-7"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(field(&out, "interior"), "9");
    let h1: f64 = field(&out, "h1").parse().unwrap();
    let h2: f64 = field(&out, "h2").parse().unwrap();
    let t: f64 = field(&out, "threshold").parse().unwrap();
    assert!((t - (h1 - h2) / 2.0).abs() < 1e-12);
    assert_eq!(field(&out, "r"), "1");
    assert!(field(&out, "valley_F").parse::<f64>().is_ok());
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(run(&[]).0, 1);
    assert_eq!(run(&["bogus"]).0, 1);
    assert_eq!(run(&["chaos", "--L", "3", "--p", "0.3", "--K", "2"]).0, 1);
    let (code, _, err) = run(&["chaos", "--L", "3", "--p", "1.0"]);
    assert_eq!(code, 1);
    assert!(err.contains("open interval"), "{err}");
    assert_eq!(run(&["chaos", "--L", "3"]).0, 1);
    assert_eq!(run(&["fractal", "--L", "3", "--p", "0.2", "--kind", "resample"]).0, 1);
    assert_eq!(run(&["chaos", "--L", "3", "--p", "0.2", "--topology", "torus", "--bc", "fixed-plus"]).0, 1);
}

#[test]
fn help_and_version_exit_with_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("verify"));
    assert_eq!(run(&["--version"]).0, 0);
    assert_eq!(run(&["chaos", "--help"]).0, 0);
}

#[test]
fn runtime_errors_exit_with_two() {
    let (code, _, err) = run(&["solve", "--graph", "/nonexistent/g", "--couplings", "/nonexistent/j"]);
    assert_eq!(code, 2);
    assert!(err.contains("/nonexistent/g"));
    let (code, _, _) = run(&["solve", "--L", "6", "--exact-cap", "0", "--anneal", "2,0.05,10,0"]);
    assert_eq!(code, 1);
}

#[test]
fn minimal_config_file_is_valid_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    write(&path, r#"{"experiment":"chaos","d":2,"L":[5],"p":[0.3],"replicates":100,"seed":1}"#);
    let cli = Cli::parse_from(["ea-lab", "chaos", "--config", path.to_str().unwrap(), "--replicates", "10"]);
    let Command::Chaos(args) = cli.command else { panic!("wrong subcommand") };
    let cfg = experiment_config(Experiment::Chaos, args).unwrap();
    assert_eq!(cfg.replicates, 10);
    assert_eq!(cfg.sizes, vec![5]);
    assert_eq!(cfg.p, vec![0.3]);
    assert_eq!(cfg.seed, 1);
}

#[test]
fn config_errors_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = dir.path().join("u.json");
    write(&unknown, "{\"experiment\":\"chaos\",\n\"L\":[3],\"p\":[0.3],\"sedd\":4}");
    let (code, _, err) = run(&["chaos", "--config", unknown.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("sedd") && err.contains("line 2"), "{err}");

    let bad_p = dir.path().join("p.json");
    write(&bad_p, r#"{"experiment":"chaos","L":[3],"p":[1.0]}"#);
    assert_eq!(run(&["chaos", "--config", bad_p.to_str().unwrap()]).0, 1);

    let other = dir.path().join("o.json");
    write(&other, r#"{"experiment":"decay","L":[3]}"#);
    let (code, _, err) = run(&["chaos", "--config", other.to_str().unwrap(), "--p", "0.2"]);
    assert_eq!(code, 1);
    assert!(err.contains("decay"), "{err}");
}

#[test]
fn chaos_writes_records_and_aggregate_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("chaos.csv");
    let (code, stdout, err) = run(&[
        "chaos", "--d", "2", "--L", "3", "--kind", "rotate", "--p", "0.1,0.3,0.5", "--replicates", "20", "--seed", "42",
        "--threads", "2", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let records = read_csv(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(records.len(), 60);
    assert!(records.iter().all(|r| r.seed == 42 && r.walltime_ms.is_none()));
    let table = std::fs::read_to_string(dir.path().join("chaos.agg.dat")).unwrap();
    assert!(table.starts_with("# experiment d L kind p K quantity label n mean stderr lo95 hi95 reference"));
    assert_eq!(table.lines().filter(|l| l.contains(" R2 ")).count(), 3);
    assert!(stdout.starts_with("# seed 42\n"));
}

#[test]
fn jsonl_output_matches_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let jsonl = dir.path().join("t.jsonl");
    let base = ["tail", "--L", "3", "--replicates", "15", "--threads", "1", "--out"];
    let mut a: Vec<&str> = base.to_vec();
    a.push(csv.to_str().unwrap());
    let mut b: Vec<&str> = base.to_vec();
    b.push(jsonl.to_str().unwrap());
    assert_eq!(run(&a).0, 0);
    assert_eq!(run(&b).0, 0);
    assert!(std::fs::read_to_string(&jsonl).unwrap().starts_with("{\"experiment\":\"tail\""));
    assert_eq!(read_records(&csv).unwrap(), read_records(&jsonl).unwrap());
}

#[test]
fn record_files_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for threads in ["1", "3"] {
        let path = dir.path().join(format!("f{threads}.csv"));
        let (code, _, err) = run(&[
            "fractal", "--L", "3,4", "--p", "0.2,0.5", "--replicates", "12", "--threads", threads, "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        files.push(std::fs::read(path).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn timing_fills_walltime() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let (code, _, err) = run(&["decay", "--L", "3", "--replicates", "3", "--timing", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let records = read_records(&path).unwrap();
    assert!(records.iter().all(|r| r.walltime_ms.is_some_and(|t| t >= 0.0)));
}
