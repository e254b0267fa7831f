//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on a usage error, 2 on a runtime error or a
//! failed verification suite.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ea_core::disorder::Disorder;
use ea_core::lattice::LatticeGraph;
use ea_core::observables::{boundary_dependence, critical_droplet, valley_statistic_exact, BoundaryBudget, VALLEY_CAP};
use ea_core::solver::{free_spin_count, BoundaryCondition, ExactOptions, SolveMethod, SolverPolicy};

use crate::config::{AnnealSpec, BcPolicy, Experiment, RawConfig, TopologyKind};
use crate::experiments::{boundary_condition, lattice_tag, replicate_couplings, run};
use crate::record::{fmt_f64, write_aggregate_table, write_atomic, write_records, Format};
use crate::{io, verify, LabError, Result};

pub const THREADS_ENV: &str = "EA_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ea-lab", version, about = "Zero-temperature Edwards-Anderson spin glass lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a lattice and one replicate of its couplings.
    Gen(InstanceArgs),
    /// Ground state of one instance.
    Solve(InstanceArgs),
    /// Summary and observables of one instance.
    Inspect(InspectArgs),
    /// Ground-state overlap under perturbation.
    Chaos(ExperimentArgs),
    /// Four-spin correlations against (1-p)^m.
    Paircorr(ExperimentArgs),
    /// Size and boundary of the chaos droplet.
    Fractal(ExperimentArgs),
    /// Valley statistic bounds.
    Valleys(ExperimentArgs),
    /// Interface ratio of the left half of the cube.
    Tail(ExperimentArgs),
    /// Critical droplets of random edges.
    Critical(ExperimentArgs),
    /// Boundary dependence of interior bonds by depth.
    Decay(ExperimentArgs),
    /// Built-in invariant suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long = "L", default_value_t = 4)]
    pub l: usize,
    #[arg(long, default_value = "open")]
    pub topology: TopologyKind,
    /// Defaults to fixed-plus on open cubes and free otherwise.
    #[arg(long)]
    pub bc: Option<BcPolicy>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub replicate: usize,
    /// Graph file instead of a cube.
    #[arg(long, requires = "couplings")]
    pub graph: Option<PathBuf>,
    /// Couplings file for `--graph`.
    #[arg(long, requires = "graph")]
    pub couplings: Option<PathBuf>,
    #[arg(long, default_value_t = 24)]
    pub exact_cap: usize,
    #[arg(long)]
    pub anneal: Option<AnnealSpec>,
    /// Output prefix for `gen`: writes PREFIX.graph and PREFIX.couplings.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Critical droplet of this edge index.
    #[arg(long)]
    pub edge: Option<usize>,
    /// Boundary dependence of the bond `i-j`.
    #[arg(long, value_parser = parse_pair)]
    pub pair: Option<[usize; 2]>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSON configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long = "L", value_delimiter = ',')]
    pub l: Option<Vec<usize>>,
    #[arg(long)]
    pub topology: Option<TopologyKind>,
    #[arg(long)]
    pub bc: Option<BcPolicy>,
    #[arg(long)]
    pub kind: Option<crate::config::Kind>,
    #[arg(long, value_delimiter = ',', conflicts_with = "k")]
    pub p: Option<Vec<f64>>,
    /// Sets p = K / L for every size.
    #[arg(long = "K")]
    pub k: Option<f64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; falls back to EA_LAB_THREADS.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub exact_cap: Option<usize>,
    /// T_init,T_final,sweeps,restarts.
    #[arg(long)]
    pub anneal: Option<AnnealSpec>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    pub format: Option<Format>,
    /// Fill the walltime_ms column.
    #[arg(long)]
    pub timing: bool,
    /// Pairs `i-j` for paircorr.
    #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
    pub pairs: Option<Vec<[usize; 2]>>,
    /// Thresholds for tail.
    #[arg(long, value_delimiter = ',')]
    pub c: Option<Vec<f64>>,
    /// Also run two independent environments for chaos.
    #[arg(long)]
    pub control: bool,
    /// Annealed critical droplets re-solved exactly.
    #[arg(long)]
    pub spot_checks: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub threads: Option<usize>,
}

fn parse_pair(s: &str) -> std::result::Result<[usize; 2], String> {
    let (a, b) = s.split_once('-').ok_or_else(|| format!("`{s}`: expected i-j"))?;
    let num = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("`{x}` is not a vertex"));
    Ok([num(a)?, num(b)?])
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    match s {
        "csv" => Ok(Format::Csv),
        "jsonl" => Ok(Format::Jsonl),
        _ => Err(format!("unknown format `{s}` (expected csv or jsonl)")),
    }
}

enum Failure {
    Usage(String),
    Runtime(LabError),
    Checks,
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Parse(_) | LabError::UnknownKey(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other),
        }
    }
}

impl From<ea_core::Error> for Failure {
    fn from(e: ea_core::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
        Err(Failure::Checks) => {
            let _ = writeln!(err, "error: verification failed");
            2
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let (experiment, args) = match command {
        Command::Gen(args) => return generate(&args, out),
        Command::Solve(args) => return solve(&args, out),
        Command::Inspect(args) => return inspect(&args, out),
        Command::Verify(args) => return run_verify(&args, out),
        Command::Chaos(args) => (Experiment::Chaos, args),
        Command::Paircorr(args) => (Experiment::PairCorrelation, args),
        Command::Fractal(args) => (Experiment::Fractal, args),
        Command::Valleys(args) => (Experiment::Valleys, args),
        Command::Tail(args) => (Experiment::FixedRegionTail, args),
        Command::Critical(args) => (Experiment::Critical, args),
        Command::Decay(args) => (Experiment::Decay, args),
    };
    run_experiment(experiment, args, out)
}

fn emit(out: &mut dyn Write, text: std::fmt::Arguments) -> std::result::Result<(), Failure> {
    out.write_fmt(text).map_err(|e| Failure::Runtime(LabError::io("stdout", e)))
}

struct Loaded {
    g: LatticeGraph,
    j: Disorder,
    bc: BoundaryCondition,
}

fn load_instance(args: &InstanceArgs) -> std::result::Result<Loaded, Failure> {
    let default_bc = match (&args.graph, args.topology) {
        (None, TopologyKind::Open) => BcPolicy::FixedPlus,
        (Some(_), _) => BcPolicy::FixedPlus,
        _ => BcPolicy::Free,
    };
    let policy = args.bc.unwrap_or(default_bc);
    let (g, j, tag) = match (&args.graph, &args.couplings) {
        (Some(graph), Some(couplings)) => {
            let g = io::read_graph(std::io::BufReader::new(open(graph)?), &graph.display().to_string())?;
            let j = io::read_disorder(&g, open(couplings)?, &couplings.display().to_string())?;
            (g, j, "explicit".to_string())
        }
        _ => {
            let g = LatticeGraph::cube(args.topology.build(args.d, args.l))?;
            let tag = lattice_tag(args.topology, args.d, args.l);
            let j = replicate_couplings(&g, args.seed, &tag, args.replicate);
            (g, j, tag)
        }
    };
    let bc = match policy {
        BcPolicy::FixedPlus | BcPolicy::FixedRandom if g.boundary().is_empty() => {
            return Err(Failure::Usage(format!("bc {policy} needs a graph with a boundary")));
        }
        _ => boundary_condition(&g, policy, args.seed, &tag)?,
    };
    Ok(Loaded { g, j, bc })
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| LabError::io(path, e))
}

fn policy_of(args: &InstanceArgs) -> std::result::Result<SolverPolicy, Failure> {
    let anneal = args.anneal.unwrap_or_default();
    let options = anneal.options();
    if options.schedule.validate().is_err() || options.restarts == 0 {
        return Err(Failure::Usage("invalid --anneal schedule".into()));
    }
    Ok(SolverPolicy {
        exact_cap: args.exact_cap,
        exact: ExactOptions { branch_bound_cap: args.exact_cap.max(40), ..ExactOptions::default() },
        anneal: options,
    })
}

fn generate(args: &InstanceArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let Loaded { g, j, .. } = load_instance(args)?;
    match &args.out {
        Some(prefix) => {
            let graph = with_suffix(prefix, ".graph");
            let couplings = with_suffix(prefix, ".couplings.csv");
            write_atomic(&graph, |w| io::write_graph(&g, w))?;
            write_atomic(&couplings, |w| io::write_disorder(&g, &j, w))?;
            emit(out, format_args!("wrote {} and {}\n", graph.display(), couplings.display()))
        }
        None => {
            io::write_graph(&g, &mut *out)?;
            emit(out, format_args!("\n"))?;
            io::write_disorder(&g, &j, &mut *out)?;
            Ok(())
        }
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn method_name(m: SolveMethod) -> &'static str {
    match m {
        SolveMethod::Exhaustive => "exhaustive",
        SolveMethod::BranchBound => "branch-bound",
        SolveMethod::Anneal => "anneal",
    }
}

fn spins_string(spins: &[i8]) -> String {
    spins.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

fn solve(args: &InstanceArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let Loaded { g, j, bc } = load_instance(args)?;
    let result = policy_of(args)?.solve(&g, &j, &bc, None, args.seed)?;
    emit(
        out,
        format_args!(
            "energy={}\nmethod={}\nexact={}\nfree_spins={}\ntie={}\nconfig={}\n",
            fmt_f64(result.energy),
            method_name(result.method),
            result.exact,
            result.free_spin_count,
            result.tie_detected,
            spins_string(result.config.spins())
        ),
    )
}

fn inspect(args: &InspectArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let inst = &args.instance;
    let Loaded { g, j, bc } = load_instance(inst)?;
    let policy = policy_of(inst)?;
    emit(
        out,
        format_args!(
            "vertices={}\nedges={}\nboundary={}\ninterior={}\nmax_degree={}\nfree_spins={}\nmax_abs_J={}\n",
            g.n_vertices(),
            g.n_edges(),
            g.boundary().len(),
            g.interior().len(),
            g.max_degree(),
            free_spin_count(&g, &bc),
            fmt_f64(j.max_abs())
        ),
    )?;
    let ground = policy.solve(&g, &j, &bc, None, inst.seed)?;
    emit(out, format_args!("energy={}\nmethod={}\n", fmt_f64(ground.energy), method_name(ground.method)))?;
    if g.interior().len() <= VALLEY_CAP {
        let v = valley_statistic_exact(&g, &j, &bc)?;
        emit(out, format_args!("valley_F={}\nvalley_region={:?}\n", fmt_f64(v.f), v.region.as_slice()))?;
    }
    if let Some(e) = args.edge {
        if e >= g.n_edges() {
            return Err(Failure::Usage(format!("edge {e} out of range (|E| = {})", g.n_edges())));
        }
        let cd = critical_droplet(&g, &j, &bc, e, &policy, inst.seed)?;
        emit(
            out,
            format_args!(
                "critical_edge={}\ncritical_size={}\ncritical_boundary={}\nh1={}\nh2={}\nthreshold={}\nJ_e={}\n",
                e,
                cd.size,
                cd.boundary_size,
                fmt_f64(cd.h1),
                fmt_f64(cd.h2),
                fmt_f64(cd.threshold),
                fmt_f64(j.get(e))
            ),
        )?;
    }
    if let Some([a, b]) = args.pair {
        let bd = boundary_dependence(&g, &j, a, b, &BoundaryBudget::default())?;
        emit(out, format_args!("event={}\nr={}\nconditions={}\n", bd.event, bd.r, bd.conditions))?;
    }
    Ok(())
}

/// Configuration from the file, then flags, then `EA_LAB_THREADS`.
pub fn experiment_config(experiment: Experiment, args: ExperimentArgs) -> Result<crate::config::ExperimentConfig> {
    let file = match &args.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    if let Some(e) = file.experiment {
        if e != experiment {
            return Err(LabError::Parse(format!(
                "config file is for `{}`, not `{}`",
                e.id(),
                experiment.id()
            )));
        }
    }
    let flags = RawConfig {
        experiment: Some(experiment),
        d: args.d,
        sizes: args.l,
        topology: args.topology,
        bc: args.bc,
        kind: args.kind,
        p: args.p,
        k: args.k,
        replicates: args.replicates,
        seed: args.seed,
        threads: args.threads,
        exact_cap: args.exact_cap,
        anneal: args.anneal,
        out: args.out,
        format: args.format,
        timing: args.timing.then_some(true),
        pairs: args.pairs,
        thresholds: args.c,
        control: args.control.then_some(true),
        spot_checks: args.spot_checks,
    };
    let mut raw = file.overlay(flags);
    if raw.threads.is_none() {
        if let Ok(value) = std::env::var(THREADS_ENV) {
            let n = value.trim().parse().map_err(|_| LabError::Parse(format!("{THREADS_ENV}=`{value}` is not a count")))?;
            raw.threads = Some(n);
        }
    }
    if raw.format.is_none() && raw.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "jsonl")) {
        raw.format = Some(Format::Jsonl);
    }
    raw.resolve()
}

fn run_experiment(experiment: Experiment, args: ExperimentArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let cfg = experiment_config(experiment, args)?;
    let result = run(&cfg)?;
    if let Some(path) = &cfg.out {
        write_records(&result.records, path, cfg.format)?;
        let table = path.with_extension("agg.dat");
        write_atomic(&table, |w| write_aggregate_table(&result.aggregates, w))?;
    }
    emit(out, format_args!("# seed {}\n", cfg.seed))?;
    write_aggregate_table(&result.aggregates, &mut *out)?;
    Ok(())
}

fn run_verify(args: &VerifyArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let reports = verify::verify_all(args.seed, args.threads)?;
    for r in &reports {
        emit(out, format_args!("{r}\n"))?;
        for f in r.failures.iter().take(5) {
            emit(out, format_args!("    {f}\n"))?;
        }
    }
    if reports.iter().all(verify::CheckReport::ok) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}
