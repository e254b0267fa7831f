use ea_core::lattice::{DistanceTable, LatticeGraph};

use super::{chaos, par_map, thread_pool, Lattice, RunOutput};
use crate::config::ExperimentConfig;
use crate::record::AggregateRow;
use crate::stats::Estimate;
use crate::Result;

/// Interior pairs `i < j` with `1 <= m <= max_m`, where
/// `m = min(d(i,j), d(i,B) + d(j,B))`.
pub fn default_pairs(g: &LatticeGraph, max_m: usize) -> Result<Vec<(usize, usize)>> {
    let table = DistanceTable::new(g)?;
    let interior = g.interior().as_slice();
    let mut pairs = Vec::new();
    for (a, &i) in interior.iter().enumerate() {
        for &j in &interior[a + 1..] {
            let m = table.chaos_exponent(i, j);
            if (1..=max_m).contains(&m) {
                pairs.push((i, j));
            }
        }
    }
    Ok(pairs)
}

/// `E[σ_i σ_j σ'_i σ'_j]` per pair and `p`, next to the bound `(1-p)^m`.
/// Records are the chaos records of the same replicates.
pub fn run_pair_correlation(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let pool = thread_pool(cfg.threads)?;
    let mut out = RunOutput::default();
    for &l in &cfg.sizes {
        let lat = Lattice::new(cfg, l)?;
        let pairs = match &cfg.pairs {
            Some(p) => p.clone(),
            None => default_pairs(&lat.g, 4)?,
        };
        for &(i, j) in &pairs {
            if i >= lat.g.n_vertices() || j >= lat.g.n_vertices() || i == j {
                return Err(crate::LabError::Parse(format!("pair {i}-{j} is not a pair of distinct vertices")));
            }
        }
        let table = DistanceTable::new(&lat.g)?;
        let results = par_map(&pool, cfg.replicates, |k| {
            let (records, configs) = chaos::replicate(&lat, k)?;
            let products: Vec<Vec<f64>> = configs
                .iter()
                .map(|(a, b)| {
                    pairs
                        .iter()
                        .map(|&(i, j)| f64::from(a.config.get(i) * a.config.get(j) * b.config.get(i) * b.config.get(j)))
                        .collect()
                })
                .collect();
            Ok((records, products))
        })?;
        for (q, &p) in cfg.p.iter().enumerate() {
            let base = results[0].0[q].clone();
            let mut passes = 0;
            for (c, &(i, j)) in pairs.iter().enumerate() {
                let values: Vec<f64> = results.iter().map(|(_, prod)| prod[q][c]).collect();
                let estimate = Estimate::mean_of(&values)?;
                let m = table.chaos_exponent(i, j);
                let bound = (1.0 - p).powi(m as i32);
                passes += usize::from(estimate.mean.abs() <= bound + 3.0 * estimate.stderr);
                out.aggregates.push(
                    AggregateRow::new(&base, "corr", estimate).label(format!("pair={i}-{j},m={m}")).reference(bound),
                );
            }
            if !pairs.is_empty() {
                out.aggregates.push(AggregateRow::new(&base, "pass_fraction", Estimate::proportion(passes, pairs.len())?));
            }
            out.records.extend(results.iter().map(|(records, _)| records[q].clone()));
        }
    }
    Ok(out)
}
