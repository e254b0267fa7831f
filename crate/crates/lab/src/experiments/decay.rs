use std::collections::BTreeMap;

use ea_core::lattice::LatticeGraph;
use ea_core::observables::{boundary_dependence, BoundaryBudget};

use super::{par_map, thread_pool, Clock, Lattice, RunOutput};
use crate::config::ExperimentConfig;
use crate::record::AggregateRow;
use crate::stats::Estimate;
use crate::Result;

/// Edges with both endpoints in the interior, grouped by depth.
pub(crate) fn edges_by_depth(g: &LatticeGraph) -> BTreeMap<usize, Vec<usize>> {
    let depth = g.boundary_distances();
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if let (Some(a), Some(b)) = (depth[u], depth[v]) {
            if a > 0 && b > 0 {
                classes.entry(a.min(b)).or_default().push(e);
            }
        }
    }
    classes
}

/// Whether the sign of a random interior bond at each depth depends on the
/// boundary condition.
pub fn run_decay(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let pool = thread_pool(cfg.threads)?;
    let budget = BoundaryBudget::default();
    let mut out = RunOutput::default();
    for &l in &cfg.sizes {
        let lat = Lattice::new(cfg, l)?;
        let classes: Vec<(usize, Vec<usize>)> = edges_by_depth(&lat.g).into_iter().collect();
        let rows = par_map(&pool, cfg.replicates, |k| {
            let clock = Clock::start(cfg);
            let j = lat.couplings(k);
            let mut rng = lat.rng("edge", k);
            classes
                .iter()
                .map(|(r, edges)| {
                    let e = edges[rng.below(edges.len() as u64) as usize];
                    let (u, v) = lat.g.edge(e);
                    let bd = boundary_dependence(&lat.g, &j, u, v, &budget)?;
                    let mut rec = lat.record(None, k);
                    rec.exact = true;
                    rec.event = Some(bd.event);
                    rec.r = Some(*r);
                    rec.walltime_ms = clock.elapsed_ms();
                    Ok(rec)
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let records = super::parameter_major(rows);
        for chunk in records.chunks(cfg.replicates) {
            let r = chunk[0].r.unwrap_or(0);
            let estimate = Estimate::from_flags(chunk.iter().map(|rec| rec.event == Some(true)))?;
            out.aggregates.push(AggregateRow::new(&chunk[0], "P(event)", estimate).label(format!("r={r}")));
        }
        out.records.extend(records);
    }
    Ok(out)
}
