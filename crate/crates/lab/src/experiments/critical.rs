use ea_core::observables::critical_droplet;
use ea_core::solver::{ExactMethod, ExactOptions, SolverPolicy};

use super::{par_map, thread_pool, Clock, Lattice, RunOutput};
use crate::config::ExperimentConfig;
use crate::record::AggregateRow;
use crate::stats::Estimate;
use crate::Result;

/// Critical droplet of a uniformly random edge per replicate. The first
/// `spot_checks` replicates are solved again by branch and bound.
pub fn run_critical(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let pool = thread_pool(cfg.threads)?;
    let policy = cfg.solver_policy();
    let exact = SolverPolicy {
        exact_cap: usize::MAX,
        exact: ExactOptions { branch_bound_cap: 64, ..ExactOptions::with_method(ExactMethod::BranchBound) },
        ..policy
    };
    let mut out = RunOutput::default();
    for &l in &cfg.sizes {
        let lat = Lattice::new(cfg, l)?;
        let rows = par_map(&pool, cfg.replicates, |k| {
            let clock = Clock::start(cfg);
            let j = lat.couplings(k);
            let e = lat.rng("edge", k).below(lat.g.n_edges() as u64) as usize;
            let seed = lat.seed_for("anneal", k);
            let cd = critical_droplet(&lat.g, &j, &lat.bc, e, &policy, seed)?;
            let check = if k < cfg.spot_checks && !cd.exact {
                let reference = critical_droplet(&lat.g, &j, &lat.bc, e, &exact, seed)?;
                Some((reference.h1 - cd.h1).abs() <= 1e-9 && (reference.h2 - cd.h2).abs() <= 1e-9)
            } else {
                None
            };
            let mut rec = lat.record(None, k);
            rec.exact = cd.exact;
            rec.d_size = Some(cd.size);
            rec.d_boundary_size = Some(cd.boundary_size);
            rec.energy0 = Some(cd.h1);
            rec.energy1 = Some(cd.h2);
            rec.walltime_ms = clock.elapsed_ms();
            Ok((rec, cd.size > 0 && !cd.isoperimetric_ok(cfg.d), check))
        })?;
        let base = &rows[0].0;
        let sizes: Vec<f64> = rows.iter().filter_map(|(r, ..)| r.d_size).map(|x| x as f64).collect();
        let boundary: Vec<f64> = rows.iter().filter_map(|(r, ..)| r.d_boundary_size).map(|x| x as f64).collect();
        out.aggregates.push(AggregateRow::new(base, "Dsize", Estimate::mean_of(&sizes)?));
        out.aggregates.push(AggregateRow::new(base, "DboundarySize", Estimate::mean_of(&boundary)?));
        out.aggregates.push(AggregateRow::new(base, "isoperimetry_violations", Estimate::from_flags(rows.iter().map(|r| r.1))?));
        out.aggregates.push(AggregateRow::new(base, "exact", Estimate::from_flags(rows.iter().map(|r| r.0.exact))?));
        let checks: Vec<bool> = rows.iter().filter_map(|r| r.2).collect();
        if !checks.is_empty() {
            out.aggregates.push(AggregateRow::new(base, "spot_check_agreement", Estimate::from_flags(checks)?));
        }
        out.records.extend(rows.into_iter().map(|r| r.0));
    }
    Ok(out)
}
