use ea_core::disorder::{perturb, PerturbationSpec};
use ea_core::observables::{droplet, site_overlap};
use ea_core::solver::SolveResult;

use super::{par_map, parameter_major, thread_pool, Clock, Lattice, RunOutput};
use crate::config::ExperimentConfig;
use crate::record::{AggregateRow, Record};
use crate::stats::Estimate;
use crate::Result;

/// Ground states of `J` and of `J(p)` for every `p`, one record each.
pub fn run_chaos(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let pool = thread_pool(cfg.threads)?;
    let mut out = RunOutput::default();
    for &l in &cfg.sizes {
        let lat = Lattice::new(cfg, l)?;
        let rows = par_map(&pool, cfg.replicates, |k| replicate(&lat, k).map(|(rows, _)| rows))?;
        let records = parameter_major(rows);
        for chunk in records.chunks(cfg.replicates) {
            aggregate(chunk, &mut out.aggregates)?;
        }
        out.records.extend(records);
        if cfg.control {
            let rows = par_map(&pool, cfg.replicates, |k| control(&lat, k))?;
            aggregate(&rows, &mut out.aggregates)?;
            out.records.extend(rows);
        }
    }
    Ok(out)
}

/// One record per `p`, plus both configurations for callers that need spins.
pub(crate) fn replicate(lat: &Lattice, k: usize) -> Result<(Vec<Record>, Vec<(SolveResult, SolveResult)>)> {
    let cfg = lat.cfg;
    let policy = cfg.solver_policy();
    let clock = Clock::start(cfg);
    let j = lat.couplings(k);
    let fresh = lat.fresh_couplings(k);
    let anneal_seed = lat.seed_for("anneal", k);
    let ground = policy.solve(&lat.g, &j, &lat.bc, None, anneal_seed)?;
    let mut records = Vec::with_capacity(cfg.p.len());
    let mut pairs = Vec::with_capacity(cfg.p.len());
    for &p in &cfg.p {
        let spec = PerturbationSpec::new(cfg.kind.perturbation(), p)?;
        let env = perturb(&j, &fresh, spec, lat.seed_for("mask", k))?;
        let moved = policy.solve(&lat.g, &env.perturbed, &lat.bc, None, anneal_seed)?;
        let mut rec = lat.record(Some(p), k);
        fill(lat, &j, &ground, &moved, &mut rec)?;
        rec.walltime_ms = clock.elapsed_ms();
        records.push(rec);
        pairs.push((ground.clone(), moved));
    }
    Ok((records, pairs))
}

fn fill(lat: &Lattice, j: &ea_core::disorder::Disorder, a: &SolveResult, b: &SolveResult, rec: &mut Record) -> Result<()> {
    let overlap = site_overlap(&lat.g, &a.config, &b.config)?;
    let report = droplet(&lat.g, j, &lat.bc, &a.config, &b.config)?;
    let k = overlap.droplet_size;
    rec.exact = a.exact && b.exact;
    rec.r2 = Some(overlap.r_squared);
    // under a free boundary condition only the smaller side is meaningful
    rec.droplet_size = Some(if lat.bc.is_free() { k.min(overlap.interior_size - k) } else { k });
    rec.boundary_size = Some(report.boundary_size);
    rec.delta = Some(report.delta);
    rec.ratio = Some(report.ratio);
    rec.energy0 = Some(a.energy);
    rec.energy1 = Some(b.energy);
    Ok(())
}

/// Two independent environments, the `p -> 1` baseline.
fn control(lat: &Lattice, k: usize) -> Result<Record> {
    let policy = lat.cfg.solver_policy();
    let clock = Clock::start(lat.cfg);
    let j = lat.couplings(k);
    let fresh = lat.fresh_couplings(k);
    let seed = lat.seed_for("anneal", k);
    let a = policy.solve(&lat.g, &j, &lat.bc, None, seed)?;
    let b = policy.solve(&lat.g, &fresh, &lat.bc, None, seed)?;
    let mut rec = lat.record(None, k);
    rec.kind = "independent".into();
    fill(lat, &j, &a, &b, &mut rec)?;
    rec.walltime_ms = clock.elapsed_ms();
    Ok(rec)
}

fn aggregate(records: &[Record], rows: &mut Vec<AggregateRow>) -> Result<()> {
    let Some(first) = records.first() else {
        return Ok(());
    };
    let r2: Vec<f64> = records.iter().filter_map(|r| r.r2).collect();
    let sizes: Vec<f64> = records.iter().filter_map(|r| r.droplet_size).map(|s| s as f64).collect();
    rows.push(AggregateRow::new(first, "R2", Estimate::mean_of(&r2)?));
    rows.push(AggregateRow::new(first, "droplet_size", Estimate::mean_of(&sizes)?));
    rows.push(AggregateRow::new(first, "exact", Estimate::from_flags(records.iter().map(|r| r.exact))?));
    Ok(())
}

/// `(|V°| - 2k)^2 = R^2 |V°|^2` for a chaos record with interior size `interior`.
pub fn overlap_identity_holds(rec: &Record, interior: usize) -> bool {
    let (Some(r2), Some(k)) = (rec.r2, rec.droplet_size) else {
        return false;
    };
    let n = interior as f64;
    let lhs = (n - 2.0 * k as f64).powi(2);
    (lhs - r2 * n * n).abs() <= 1e-9 * n * n
}
