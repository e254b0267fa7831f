use ea_core::disorder::{perturb, PerturbationSpec};
use ea_core::observables::droplet;

use super::{par_map, parameter_major, thread_pool, Clock, Lattice, RunOutput};
use crate::config::{ExperimentConfig, Kind};
use crate::record::AggregateRow;
use crate::stats::{quantile, Estimate};
use crate::Result;

/// `(1-p) sqrt(p) L^d (ln L)^(-1/2)`, undefined for `L < 2`.
pub fn fractal_covariate(p: f64, l: usize, d: usize) -> f64 {
    if l < 2 {
        return f64::NAN;
    }
    (1.0 - p) * p.sqrt() * (l as f64).powi(d as i32) / (l as f64).ln().sqrt()
}

/// Size and edge boundary of the chaos droplet under rotation.
pub fn run_fractal(cfg: &ExperimentConfig) -> Result<RunOutput> {
    if cfg.kind != Kind::Rotate {
        return Err(ea_core::Error::WrongKind.into());
    }
    let pool = thread_pool(cfg.threads)?;
    let policy = cfg.solver_policy();
    let mut out = RunOutput::default();
    for &l in &cfg.sizes {
        let lat = Lattice::new(cfg, l)?;
        let rows = par_map(&pool, cfg.replicates, |k| {
            let clock = Clock::start(cfg);
            let j = lat.couplings(k);
            let fresh = lat.fresh_couplings(k);
            let seed = lat.seed_for("anneal", k);
            let ground = policy.solve(&lat.g, &j, &lat.bc, None, seed)?;
            cfg.p
                .iter()
                .map(|&p| {
                    let env = perturb(&j, &fresh, PerturbationSpec::new(cfg.kind.perturbation(), p)?, lat.seed_for("mask", k))?;
                    let moved = policy.solve(&lat.g, &env.perturbed, &lat.bc, None, seed)?;
                    let report = droplet(&lat.g, &j, &lat.bc, &ground.config, &moved.config)?;
                    let mut rec = lat.record(Some(p), k);
                    rec.exact = ground.exact && moved.exact;
                    rec.droplet_size = Some(report.size);
                    rec.boundary_size = Some(report.boundary_size);
                    rec.delta = Some(report.delta);
                    rec.ratio = Some(report.ratio);
                    rec.energy0 = Some(ground.energy);
                    rec.energy1 = Some(moved.energy);
                    rec.walltime_ms = clock.elapsed_ms();
                    Ok(rec)
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let records = parameter_major(rows);
        for chunk in records.chunks(cfg.replicates) {
            let base = &chunk[0];
            let boundary: Vec<f64> = chunk.iter().filter_map(|r| r.boundary_size).map(|x| x as f64).collect();
            let sizes: Vec<f64> = chunk.iter().filter_map(|r| r.droplet_size).map(|x| x as f64).collect();
            let covariate = fractal_covariate(base.p.unwrap_or(f64::NAN), l, cfg.d);
            out.aggregates.push(AggregateRow::new(base, "boundary_size", Estimate::mean_of(&boundary)?).reference(covariate));
            out.aggregates.push(AggregateRow::new(base, "droplet_size", Estimate::mean_of(&sizes)?));
            for q in [0.25, 0.5, 0.75] {
                let value = quantile(&boundary, q)?;
                let point = Estimate { mean: value, stderr: 0.0, n: boundary.len(), lo95: value, hi95: value };
                out.aggregates.push(AggregateRow::new(base, "boundary_size_quantile", point).label(format!("q={q}")));
            }
            let empty = Estimate::from_flags(boundary.iter().map(|&b| b == 0.0))?;
            out.aggregates.push(AggregateRow::new(base, "empty_fraction", empty));
        }
        out.records.extend(records);
    }
    Ok(out)
}
