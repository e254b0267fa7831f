use ea_core::lattice::{LatticeGraph, VertexSet};
use ea_core::observables::interface_energy;

use super::{par_map, thread_pool, Clock, Lattice, RunOutput};
use crate::config::ExperimentConfig;
use crate::record::AggregateRow;
use crate::stats::Estimate;
use crate::{LabError, Result};

/// Interior vertices whose first coordinate is at most `L / 2`.
pub fn left_half(g: &LatticeGraph) -> Result<VertexSet> {
    let l = g.topology().side().ok_or_else(|| LabError::Parse("left half needs a cube lattice".into()))?;
    let region = g
        .interior()
        .iter()
        .filter(|&v| g.coordinates(v).is_some_and(|c| c[0] <= l / 2))
        .collect();
    Ok(VertexSet::new(region))
}

/// Interface ratio of a fixed region in the ground state, with its lower tail.
pub fn run_fixed_region_tail(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let pool = thread_pool(cfg.threads)?;
    let policy = cfg.solver_policy();
    let mut out = RunOutput::default();
    for &l in &cfg.sizes {
        let lat = Lattice::new(cfg, l)?;
        let region = left_half(&lat.g)?;
        if region.is_empty() {
            return Err(LabError::Parse(format!("left half of L = {l} is empty")));
        }
        let records = par_map(&pool, cfg.replicates, |k| {
            let clock = Clock::start(cfg);
            let j = lat.couplings(k);
            let ground = policy.solve(&lat.g, &j, &lat.bc, None, lat.seed_for("anneal", k))?;
            let delta = interface_energy(&lat.g, &j, &lat.bc, &ground.config, &region)?;
            let boundary_size = lat.g.edge_boundary(&region).len();
            let mut rec = lat.record(None, k);
            rec.exact = ground.exact;
            rec.droplet_size = Some(region.len());
            rec.boundary_size = Some(boundary_size);
            rec.delta = Some(delta);
            rec.ratio = Some(delta / boundary_size as f64);
            rec.energy0 = Some(ground.energy);
            rec.walltime_ms = clock.elapsed_ms();
            Ok(rec)
        })?;
        for &c in &cfg.thresholds {
            let below = Estimate::from_flags(records.iter().map(|r| r.ratio.is_some_and(|x| x < c)))?;
            out.aggregates.push(AggregateRow::new(&records[0], "P(ratio<c)", below).label(format!("c={c}")).reference(c));
        }
        out.records.extend(records);
    }
    Ok(out)
}
