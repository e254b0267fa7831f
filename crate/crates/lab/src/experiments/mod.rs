//! Monte Carlo experiments over disorder replicates.
//!
//! Replicate `k` of size `L` draws every random quantity from streams keyed
//! by the master seed, the lattice and `k`, so results do not depend on the
//! number of threads or the order replicates finish in. The same couplings
//! are reused across perturbation strengths.

use std::time::Instant;

use ea_core::disorder::{sample_disorder, Disorder, Stream};
use ea_core::lattice::LatticeGraph;
use ea_core::rng::{CounterRng, CounterStream};
use ea_core::solver::BoundaryCondition;
use rayon::prelude::*;

use crate::config::{BcPolicy, Experiment, ExperimentConfig, TopologyKind};
use crate::record::{AggregateRow, Record};
use crate::{LabError, Result};

mod chaos;
mod critical;
mod decay;
mod fractal;
mod paircorr;
mod tail;
mod valleys;

pub use chaos::{overlap_identity_holds, run_chaos};
pub use critical::run_critical;
pub use decay::run_decay;
pub use fractal::{fractal_covariate, run_fractal};
pub use paircorr::{default_pairs, run_pair_correlation};
pub use tail::{left_half, run_fixed_region_tail};
pub use valleys::run_valleys;

/// Records in (size, parameter, replicate) order plus the aggregate table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOutput {
    pub records: Vec<Record>,
    pub aggregates: Vec<AggregateRow>,
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    match cfg.experiment {
        Experiment::Chaos => run_chaos(cfg),
        Experiment::PairCorrelation => run_pair_correlation(cfg),
        Experiment::Fractal => run_fractal(cfg),
        Experiment::Valleys => run_valleys(cfg),
        Experiment::FixedRegionTail => run_fixed_region_tail(cfg),
        Experiment::Critical => run_critical(cfg),
        Experiment::Decay => run_decay(cfg),
    }
}

/// Worker pool of `threads` workers, or rayon's default when unset.
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| LabError::ThreadPool(e.to_string()))
}

/// Evaluates `f` on `0..n` in parallel, keeping index order.
pub fn par_map<T: Send>(
    pool: &rayon::ThreadPool,
    n: usize,
    f: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

/// A 64-bit seed for `label#index`, independent of every other label.
pub(crate) fn derived_seed(master: u64, label: &str, index: u64) -> u64 {
    CounterStream::new(master, &Stream::new(label.to_string()).with_index(index)).block(0)[0]
}

/// Stream tag of a cube lattice, shared by every random quantity drawn on it.
pub fn lattice_tag(topology: TopologyKind, d: usize, l: usize) -> String {
    format!("{topology}/d={d}/L={l}")
}

/// Boundary condition under `policy`. A random fixed boundary is drawn once
/// per lattice from stream `BC/{tag}`.
pub fn boundary_condition(g: &LatticeGraph, policy: BcPolicy, seed: u64, tag: &str) -> Result<BoundaryCondition> {
    Ok(match policy {
        BcPolicy::Free | BcPolicy::Periodic => BoundaryCondition::Free,
        BcPolicy::FixedPlus => BoundaryCondition::all_plus(g)?,
        BcPolicy::FixedRandom => {
            let mut rng = CounterRng::new(seed, &Stream::new(format!("BC/{tag}")));
            BoundaryCondition::fixed(g, g.boundary().iter().map(|_| rng.sign()).collect())?
        }
    })
}

/// Couplings of replicate `replicate` on the lattice tagged `tag`.
pub fn replicate_couplings(g: &LatticeGraph, seed: u64, tag: &str, replicate: usize) -> Disorder {
    sample_disorder(g, seed, &Stream::new(format!("J/{tag}")).with_index(replicate as u64))
}

/// One lattice size of an experiment.
pub(crate) struct Lattice<'a> {
    pub cfg: &'a ExperimentConfig,
    pub l: usize,
    pub g: LatticeGraph,
    pub bc: BoundaryCondition,
    tag: String,
}

impl<'a> Lattice<'a> {
    pub fn new(cfg: &'a ExperimentConfig, l: usize) -> Result<Self> {
        let g = LatticeGraph::cube(cfg.topology.build(cfg.d, l))?;
        let tag = lattice_tag(cfg.topology, cfg.d, l);
        let bc = boundary_condition(&g, cfg.bc, cfg.seed, &tag)?;
        Ok(Self { cfg, l, g, bc, tag })
    }

    pub fn stream(&self, label: &str, replicate: usize) -> Stream {
        Stream::new(format!("{label}/{}", self.tag)).with_index(replicate as u64)
    }

    pub fn couplings(&self, replicate: usize) -> Disorder {
        replicate_couplings(&self.g, self.cfg.seed, &self.tag, replicate)
    }

    pub fn fresh_couplings(&self, replicate: usize) -> Disorder {
        sample_disorder(&self.g, self.cfg.seed, &self.stream("J'", replicate))
    }

    pub fn seed_for(&self, label: &str, replicate: usize) -> u64 {
        derived_seed(self.cfg.seed, &format!("{label}/{}", self.tag), replicate as u64)
    }

    pub fn rng(&self, label: &str, replicate: usize) -> CounterRng {
        CounterRng::new(self.cfg.seed, &self.stream(label, replicate))
    }

    /// Record with the parameter columns filled in.
    pub fn record(&self, p: Option<f64>, replicate: usize) -> Record {
        let cfg = self.cfg;
        Record {
            experiment: cfg.experiment.id().into(),
            d: cfg.d,
            l: self.l,
            topology: cfg.topology.to_string(),
            bc: cfg.bc.to_string(),
            kind: cfg.kind.to_string(),
            p,
            k: cfg.k,
            replicate: replicate as u64,
            seed: cfg.seed,
            ..Record::default()
        }
    }
}

/// Wall clock per replicate, only when timing was requested so that
/// default outputs stay byte-identical across runs.
pub(crate) struct Clock(Option<Instant>);

impl Clock {
    pub fn start(cfg: &ExperimentConfig) -> Self {
        Self(cfg.timing.then(Instant::now))
    }

    pub fn elapsed_ms(&self) -> Option<f64> {
        self.0.map(|t| t.elapsed().as_secs_f64() * 1e3)
    }
}

/// Regroups per-replicate rows, each holding one row per parameter, into
/// parameter-major order.
pub(crate) fn parameter_major<T>(per_replicate: Vec<Vec<T>>) -> Vec<T> {
    let width = per_replicate.first().map_or(0, Vec::len);
    let mut columns: Vec<Vec<T>> = (0..width).map(|_| Vec::with_capacity(per_replicate.len())).collect();
    for row in per_replicate {
        for (k, item) in row.into_iter().enumerate() {
            columns[k].push(item);
        }
    }
    columns.into_iter().flatten().collect()
}
