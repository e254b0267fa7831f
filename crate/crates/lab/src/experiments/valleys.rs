use ea_core::disorder::{perturb, PerturbationSpec};
use ea_core::observables::{valley_statistic_exact, valley_upper_bound, VALLEY_CAP};

use super::{par_map, thread_pool, Clock, Lattice, RunOutput};
use crate::config::ExperimentConfig;
use crate::record::{AggregateRow, Record};
use crate::stats::Estimate;
use crate::{LabError, Result};

/// Perturbation strengths for size `l`: `K / l` when `K` is set.
fn strengths(cfg: &ExperimentConfig, l: usize) -> Result<Vec<f64>> {
    match cfg.k {
        Some(k) => {
            let p = k / l as f64;
            if !(p > 0.0 && p < 1.0) {
                return Err(LabError::Parse(format!("K / L = {p} must lie in (0, 1) for L = {l}")));
            }
            Ok(vec![p])
        }
        None => Ok(cfg.p.clone()),
    }
}

/// Upper bound on the valley statistic from the rotation droplet, and the
/// exact statistic where the interior is small enough to enumerate.
pub fn run_valleys(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let pool = thread_pool(cfg.threads)?;
    let policy = cfg.solver_policy();
    let mut out = RunOutput::default();
    for &l in &cfg.sizes {
        let lat = Lattice::new(cfg, l)?;
        let small = lat.g.interior().len() <= VALLEY_CAP;
        for p in strengths(cfg, l)? {
            let rows = par_map(&pool, cfg.replicates, |k| {
                let clock = Clock::start(cfg);
                let j = lat.couplings(k);
                let fresh = lat.fresh_couplings(k);
                let env = perturb(&j, &fresh, PerturbationSpec::new(cfg.kind.perturbation(), p)?, lat.seed_for("mask", k))?;
                let vb = valley_upper_bound(&lat.g, &env, &lat.bc, &policy, lat.seed_for("anneal", k))?;
                let mut rec = lat.record(Some(p), k);
                rec.exact = vb.ground.exact && vb.perturbed.exact;
                rec.droplet_size = Some(vb.report.size);
                rec.boundary_size = Some(vb.report.boundary_size);
                rec.delta = Some(vb.report.delta);
                rec.ratio = Some(vb.report.ratio);
                rec.size_ok = Some(vb.size_ok);
                rec.bound_ok = Some(vb.bound_ok);
                rec.energy0 = Some(vb.ground.energy);
                rec.energy1 = Some(vb.perturbed.energy);
                rec.walltime_ms = clock.elapsed_ms();
                let f = if small { Some(valley_statistic_exact(&lat.g, &j, &lat.bc)?.f) } else { None };
                Ok((rec, f))
            })?;
            aggregate(&rows, &mut out.aggregates)?;
            out.records.extend(rows.into_iter().map(|(rec, _)| rec));
        }
    }
    Ok(out)
}

fn aggregate(rows: &[(Record, Option<f64>)], out: &mut Vec<AggregateRow>) -> Result<()> {
    let base = &rows[0].0;
    let kept: Vec<&(Record, Option<f64>)> = rows.iter().filter(|(r, _)| r.size_ok == Some(true)).collect();
    let ratios: Vec<f64> = kept.iter().filter_map(|(r, _)| r.ratio).collect();
    if !ratios.is_empty() {
        out.push(AggregateRow::new(base, "F_hat", Estimate::mean_of(&ratios)?));
    }
    out.push(AggregateRow::new(base, "size_ok_fraction", Estimate::from_flags(rows.iter().map(|(r, _)| r.size_ok == Some(true)))?));
    let exact: Vec<&Record> = rows.iter().map(|(r, _)| r).filter(|r| r.exact).collect();
    if !exact.is_empty() {
        out.push(AggregateRow::new(base, "bound_ok_fraction", Estimate::from_flags(exact.iter().map(|r| r.bound_ok == Some(true)))?));
    }
    let exact_f: Vec<f64> = rows.iter().filter_map(|(_, f)| *f).collect();
    if !exact_f.is_empty() {
        out.push(AggregateRow::new(base, "F_exact", Estimate::mean_of(&exact_f)?));
        let checked: Vec<bool> = kept
            .iter()
            .filter_map(|(r, f)| Some(f.as_ref()? > &(r.ratio? + 1e-9)))
            .collect();
        if !checked.is_empty() {
            out.push(AggregateRow::new(base, "F_exact_violations", Estimate::from_flags(checked)?));
        }
    }
    Ok(())
}
