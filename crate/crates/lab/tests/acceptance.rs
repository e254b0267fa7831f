//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::path::Path;
use std::time::Instant;

use ea_lab::cli::main_with;
use ea_lab::config::{BcPolicy, Experiment, ExperimentConfig, Kind, RawConfig, TopologyKind};
use ea_lab::experiments::{overlap_identity_holds, run, RunOutput};
use ea_lab::record::{write_csv, AggregateRow};
use ea_lab::stats::{pooled_stderr, Estimate};
use ea_lab::verify::{
    anneal_oracle, branch_bound_oracle, gauge_null, identity_suite, ratio_bound_suite, CheckReport,
};

const SEED: u64 = 20240611;

struct Run {
    cfg: ExperimentConfig,
    args: Vec<String>,
    out: RunOutput,
}

struct Suite {
    failures: Vec<String>,
    runs: Vec<Run>,
    reports: Vec<CheckReport>,
    clock: Instant,
}

impl Suite {
    fn verdict(&mut self, criterion: &str, pass: bool, detail: String) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {criterion}: {detail} [{:.0}s]", self.clock.elapsed().as_secs_f64());
        if !pass {
            self.failures.push(criterion.to_string());
        }
    }

    /// Runs `cfg` with 8 workers and keeps the equivalent command line for the
    /// single-thread rerun.
    fn run(&mut self, cfg: ExperimentConfig, args: &[&str]) -> RunOutput {
        let mut cfg = cfg;
        cfg.seed = SEED;
        cfg.threads = Some(8);
        let out = run(&cfg).expect("experiment runs");
        self.runs.push(Run { cfg, args: args.iter().map(|s| s.to_string()).collect(), out: out.clone() });
        out
    }
}

fn config(experiment: Experiment, sizes: &[usize], p: &[f64]) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(experiment, sizes.to_vec(), p.to_vec()).expect("valid config");
    cfg.seed = SEED;
    cfg
}

fn find<'a>(out: &'a RunOutput, l: usize, p: Option<f64>, quantity: &str, label: &str) -> &'a Estimate {
    &out
        .aggregates
        .iter()
        .find(|a| a.l == l && a.p == p && a.quantity == quantity && a.label == label)
        .unwrap_or_else(|| panic!("no aggregate {quantity} {label} at L={l} p={p:?}"))
        .estimate
}

fn report(suite: &mut Suite, criterion: &str, reports: Vec<CheckReport>) {
    let pass = reports.iter().all(CheckReport::ok);
    let detail: Vec<String> = reports.iter().map(|r| format!("{}: {}/{} (need {})", r.name, r.passed, r.total, r.required)).collect();
    for r in &reports {
        for f in r.failures.iter().take(3) {
            println!("    {f}");
        }
    }
    suite.verdict(criterion, pass, detail.join("; "));
    suite.reports.extend(reports);
}

fn criterion_1(s: &mut Suite) {
    let r = identity_suite(500, 20, SEED, Some(8)).unwrap();
    report(s, "1 (exact identities)", vec![r]);
}

fn criterion_2(s: &mut Suite) {
    let a = anneal_oracle(200, SEED, Some(8)).unwrap();
    let b = branch_bound_oracle(200, SEED, Some(8)).unwrap();
    report(s, "2 (oracle equivalence)", vec![a, b]);
}

fn criterion_3(s: &mut Suite) {
    let r = ratio_bound_suite(500, &[0.1, 0.3, 0.5], SEED, Some(8)).unwrap();
    report(s, "3 (deterministic ratio bound)", vec![r]);
}

fn criterion_4(s: &mut Suite) {
    let ps = [0.1, 0.3, 0.5];
    let (mut cells, mut passed) = (0, 0);
    let mut detail = Vec::new();
    for (kind, name) in [(Kind::Rotate, "rotate"), (Kind::Resample, "resample")] {
        let mut cfg = config(Experiment::PairCorrelation, &[5], &ps);
        cfg.kind = kind;
        cfg.bc = BcPolicy::FixedPlus;
        let out = s.run(cfg, &["paircorr", "--d", "2", "--L", "5", "--bc", "fixed-plus", "--kind", name, "--p", "0.1,0.3,0.5"]);
        let corr: Vec<&AggregateRow> = out.aggregates.iter().filter(|a| a.quantity == "corr").collect();
        let ok = corr
            .iter()
            .filter(|a| a.estimate.mean.abs() <= a.reference.expect("bound") + 3.0 * a.estimate.stderr)
            .count();
        let exponents_ok = corr.iter().all(|a| a.reference.is_some_and(|b| b < 1.0));
        detail.push(format!("{name} {ok}/{}", corr.len()));
        cells += corr.len();
        passed += if exponents_ok { ok } else { 0 };
    }
    let fraction = passed as f64 / cells as f64;
    s.verdict("4 (chaos bound)", cells > 0 && fraction >= 0.95, format!("{} cells pass {:.4} >= 0.95", detail.join(", "), fraction));
}

fn criterion_5(s: &mut Suite) {
    let (r, estimates) = gauge_null(4, 2000, 10, SEED, Some(8)).unwrap();
    let worst = estimates.iter().map(|(_, e)| e.mean.abs() / e.stderr).fold(0.0, f64::max);
    println!("    largest |mean|/stderr = {worst:.3}");
    report(s, "5 (gauge-symmetry null)", vec![r]);
}

fn decreasing(estimates: &[(String, Estimate)], sigmas: f64) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for w in estimates.windows(2) {
        let (a, b) = (&w[0].1, &w[1].1);
        let gap = (a.mean - b.mean) / pooled_stderr(a, b);
        ok &= gap >= sigmas;
        parts.push(format!("{}->{} by {:.1} se", w[0].0, w[1].0, gap));
    }
    (ok, parts.join(", "))
}

fn criterion_6(s: &mut Suite) {
    let ps = [0.05, 0.2, 0.5];
    let out = s.run(config(Experiment::Chaos, &[5], &ps), &["chaos", "--L", "5", "--p", "0.05,0.2,0.5"]);
    let by_p: Vec<(String, Estimate)> = ps.iter().map(|&p| (format!("p={p}"), find(&out, 5, Some(p), "R2", "-").clone())).collect();
    let identity = out.records.iter().all(|r| overlap_identity_holds(r, 16));
    let (ok_p, detail_p) = decreasing(&by_p, 2.0);
    let sizes = [3, 4, 5];
    let out = s.run(config(Experiment::Chaos, &sizes, &[0.3]), &["chaos", "--L", "3,4,5", "--p", "0.3"]);
    let by_l: Vec<(String, Estimate)> = sizes.iter().map(|&l| (format!("L={l}"), find(&out, l, Some(0.3), "R2", "-").clone())).collect();
    let (ok_l, detail_l) = decreasing(&by_l, 2.0);
    let exact = out.records.iter().all(|r| r.exact);
    s.verdict(
        "6 (chaos trend)",
        ok_p && ok_l && identity,
        format!("{detail_p}; {detail_l}; overlap identity {identity}; all exact {exact}"),
    );
}

fn criterion_7(s: &mut Suite) {
    let mut cfg = config(Experiment::Critical, &[4, 6], &[]);
    cfg.replicates = 500;
    let out = s.run(cfg, &["critical", "--L", "4,6"]);
    let (a, b) = (find(&out, 4, None, "Dsize", "-"), find(&out, 6, None, "Dsize", "-"));
    let gap = (b.mean - a.mean) / pooled_stderr(a, b);
    let violations: f64 = [4, 6].iter().map(|&l| find(&out, l, None, "isoperimetry_violations", "-").mean).sum();
    let spot = find(&out, 6, None, "spot_check_agreement", "-");
    let pass = gap >= 2.0 && violations == 0.0 && spot.mean == 1.0;
    s.verdict(
        "7 (critical droplets)",
        pass,
        format!(
            "mean |D| {:.3} -> {:.3}, up by {gap:.1} se; isoperimetry violations {violations}; spot checks {}/{} agree",
            a.mean,
            b.mean,
            (spot.mean * spot.n as f64).round(),
            spot.n
        ),
    );
}

fn criterion_8(s: &mut Suite) {
    let sizes = [4, 5, 6];
    let mut cfg = config(Experiment::FixedRegionTail, &sizes, &[]);
    cfg.exact_cap = 25;
    cfg.thresholds = vec![0.0, 0.1];
    let out = s.run(cfg, &["tail", "--L", "4,5,6", "--exact-cap", "25", "--c", "0,0.1"]);
    let mut rows: Vec<(usize, &Estimate)> = sizes
        .iter()
        .map(|&l| {
            let boundary = out.records.iter().find(|r| r.l == l).and_then(|r| r.boundary_size).unwrap();
            (boundary, find(&out, l, None, "P(ratio<c)", "c=0.1"))
        })
        .collect();
    rows.sort_by_key(|r| r.0);
    let trend = rows.windows(2).all(|w| w[1].1.mean <= w[0].1.hi95);
    let negative = out.records.iter().filter(|r| r.ratio.is_some_and(|x| x < 0.0)).count();
    let exact = out.records.iter().all(|r| r.exact);
    let detail: Vec<String> =
        rows.iter().map(|(b, e)| format!("|dA|={b}: {:.4} [{:.4}, {:.4}]", e.mean, e.lo95, e.hi95)).collect();
    s.verdict(
        "8 (fixed-region tail)",
        trend && negative == 0 && exact,
        format!("P(ratio<0.1) {}; P(ratio<0) count {negative}; all exact {exact}", detail.join(", ")),
    );
}

fn criterion_9(s: &mut Suite) {
    let sizes = [8, 16, 32];
    let cfg = RawConfig {
        experiment: Some(Experiment::Valleys),
        d: Some(1),
        sizes: Some(sizes.to_vec()),
        topology: Some(TopologyKind::Open),
        bc: Some(BcPolicy::FixedPlus),
        k: Some(2.0),
        exact_cap: Some(40),
        ..RawConfig::default()
    }
    .resolve()
    .expect("valid config");
    let out = s.run(cfg, &["valleys", "--d", "1", "--L", "8,16,32", "--K", "2", "--exact-cap", "40"]);
    let f_hat: Vec<(String, Estimate)> =
        sizes.iter().map(|&l| (format!("L={l}"), find(&out, l, Some(2.0 / l as f64), "F_hat", "-").clone())).collect();
    let mut monotone = true;
    let mut parts = Vec::new();
    for w in f_hat.windows(2) {
        let (a, b) = (&w[0].1, &w[1].1);
        monotone &= b.mean <= a.mean + pooled_stderr(a, b);
        parts.push(format!("{} {:.4}±{:.4} -> {} {:.4}±{:.4}", w[0].0, a.mean, a.stderr, w[1].0, b.mean, b.stderr));
    }
    let mut violations = 0.0;
    let mut checked = 0;
    for &l in &sizes[..2] {
        let v = find(&out, l, Some(2.0 / l as f64), "F_exact_violations", "-");
        violations += v.mean * v.n as f64;
        checked += v.n;
    }
    let bound_ok = out.records.iter().filter(|r| r.exact).all(|r| r.bound_ok == Some(true));
    s.verdict(
        "9 (valleys)",
        monotone && violations == 0.0 && checked > 0 && bound_ok,
        format!("F_hat {}; F_exact > ratio on {violations} of {checked} size_ok replicates; bound_ok on exact {bound_ok}", parts.join("; ")),
    );
}

fn criterion_10(s: &mut Suite) {
    let mut cfg = config(Experiment::Decay, &[4, 5], &[]);
    cfg.replicates = 500;
    let out = s.run(cfg, &["decay", "--L", "4,5"]);
    let mut pass = true;
    let mut parts = Vec::new();
    for l in [4, 5] {
        let rows: Vec<&AggregateRow> = out.aggregates.iter().filter(|a| a.l == l && a.quantity == "P(event)").collect();
        let r1 = &rows.iter().find(|a| a.label == "r=1").expect("r=1 class").estimate;
        pass &= r1.lo95 > 0.0;
        for pair in rows.windows(2) {
            let (a, b) = (&pair[0].estimate, &pair[1].estimate);
            pass &= b.mean <= a.mean + 2.0 * pooled_stderr(a, b);
        }
        for a in &rows {
            parts.push(format!("L={l} {} {:.3} [{:.3}, {:.3}]", a.label, a.estimate.mean, a.estimate.lo95, a.estimate.hi95));
        }
    }
    s.verdict("10 (decay event)", pass, parts.join(", "));
}

fn criterion_11(s: &mut Suite) {
    let dir = tempfile::tempdir().unwrap();
    let mut identical = 0;
    let mut parts = Vec::new();
    for (k, run) in s.runs.iter().enumerate() {
        let mut expected = Vec::new();
        write_csv(&run.out.records, &mut expected).unwrap();
        let path = dir.path().join(format!("run{k}.csv"));
        let mut args: Vec<String> = vec!["ea-lab".into()];
        args.extend(run.args.iter().cloned());
        args.extend(["--seed".into(), SEED.to_string(), "--threads".into(), "1".into()]);
        args.extend(["--replicates".into(), run.cfg.replicates.to_string()]);
        args.extend(["--out".into(), path.display().to_string()]);
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = main_with(&args, &mut out, &mut err);
        let same = code == 0 && std::fs::read(&path).ok().as_deref() == Some(expected.as_slice());
        if !same {
            println!("    {}: exit {code} {}", run.args.join(" "), String::from_utf8_lossy(&err));
        }
        identical += usize::from(same);
        parts.push(format!("{} {}", run.args[0], if same { "identical" } else { "differs" }));
    }
    let single = vec![
        identity_suite(500, 20, SEED, Some(1)).unwrap(),
        anneal_oracle(200, SEED, Some(1)).unwrap(),
        branch_bound_oracle(200, SEED, Some(1)).unwrap(),
        ratio_bound_suite(500, &[0.1, 0.3, 0.5], SEED, Some(1)).unwrap(),
        gauge_null(4, 2000, 10, SEED, Some(1)).unwrap().0,
    ];
    let suites_same = single == s.reports;
    s.verdict(
        "11 (determinism)",
        identical == s.runs.len() && suites_same,
        format!(
            "{identical}/{} record CSVs byte-identical at 8 vs 1 threads ({}); verification reports identical {suites_same}",
            s.runs.len(),
            parts.join(", ")
        ),
    );
    let _ = Path::new(dir.path());
}

fn main() {
    let mut suite = Suite { failures: Vec::new(), runs: Vec::new(), reports: Vec::new(), clock: Instant::now() };
    criterion_1(&mut suite);
    criterion_2(&mut suite);
    criterion_3(&mut suite);
    criterion_4(&mut suite);
    criterion_5(&mut suite);
    criterion_6(&mut suite);
    criterion_7(&mut suite);
    criterion_8(&mut suite);
    criterion_9(&mut suite);
    criterion_10(&mut suite);
    criterion_11(&mut suite);
    if suite.failures.is_empty() {
        println!("acceptance: all 11 criteria pass");
    } else {
        println!("acceptance: failing criteria {}", suite.failures.join(", "));
        std::process::exit(1);
    }
}
