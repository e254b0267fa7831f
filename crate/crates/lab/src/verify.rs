//! Verification suites over random small instances with exact ground states.

use std::fmt;

use ea_core::disorder::{perturb, sample_disorder, PerturbationKind, PerturbationSpec, Stream};
use ea_core::lattice::{LatticeGraph, Topology, VertexSet};
use ea_core::observables::{critical_droplet, interface_energy, site_overlap, valley_upper_bound};
use ea_core::rng::CounterRng;
use ea_core::solver::{
    energy, solve_anneal, solve_exact, AnnealOptions, BoundaryCondition, ExactMethod, ExactOptions, SolverPolicy,
};

use crate::experiments::{par_map, thread_pool};
use crate::instances::{random_instance, Instance};
use crate::stats::Estimate;
use crate::Result;

/// Outcome of one suite: `passed` of `total` checks, `required` to pass.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: usize,
    pub total: usize,
    pub required: usize,
    pub failures: Vec<String>,
}

impl CheckReport {
    fn tally(name: &str, required: impl FnOnce(usize) -> usize, results: Vec<(usize, usize, Vec<String>)>) -> Self {
        let (passed, total, failures) =
            results.into_iter().fold((0, 0, Vec::new()), |(p, t, mut f), (rp, rt, rf)| {
                f.extend(rf);
                (p + rp, t + rt, f)
            });
        Self { name: name.into(), passed, total, required: required(total), failures }
    }

    pub fn ok(&self) -> bool {
        self.passed >= self.required
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.ok() { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}/{} (need {})", self.name, self.passed, self.total, self.required)
    }
}

/// Ground states are exact in every suite below.
fn exact_policy() -> SolverPolicy {
    SolverPolicy { exact_cap: 40, ..SolverPolicy::default() }
}

/// `H(σ^A) - H(σ)` against `2 sum_{∂A} J σ σ` for random regions `A` of
/// exact ground states, and the overlap–droplet identity between the ground
/// states of `J` and a rotation of it.
pub fn identity_suite(instances: usize, regions: usize, seed: u64, threads: Option<usize>) -> Result<CheckReport> {
    let pool = thread_pool(threads)?;
    let results = par_map(&pool, instances, |k| {
        let inst = random_instance(20, seed, k as u64)?;
        let Instance { g, j, bc, family } = &inst;
        let ground = solve_exact(g, j, bc, &ExactOptions::default())?;
        let sigma = &ground.config;
        let mut rng = CounterRng::new(seed, &Stream::new("identity/regions").with_index(k as u64));
        let mut passed = 0;
        let mut failures = Vec::new();
        for r in 0..regions {
            let region = random_region(g, bc, &mut rng);
            let mut flipped = sigma.spins().to_vec();
            for v in region.iter() {
                flipped[v] = -flipped[v];
            }
            let flipped = ea_core::solver::SpinConfiguration::new(flipped)?;
            let by_flip = energy(g, j, &flipped)? - energy(g, j, sigma)?;
            let by_boundary: f64 = 2.0
                * g.edges()
                    .iter()
                    .enumerate()
                    .filter(|(_, &(u, v))| region.contains(u) != region.contains(v))
                    .map(|(e, &(u, v))| j.get(e) * f64::from(sigma.get(u) * sigma.get(v)))
                    .sum::<f64>();
            let reported = interface_energy(g, j, bc, sigma, &region)?;
            if (by_flip - by_boundary).abs() <= 1e-9 && (reported - by_boundary).abs() <= 1e-9 {
                passed += 1;
            } else {
                failures.push(format!("{family} #{k} region {r}: flip {by_flip} boundary {by_boundary}"));
            }
        }
        let fresh = sample_disorder(g, seed, &Stream::new("identity/J'").with_index(k as u64));
        let env = perturb(j, &fresh, PerturbationSpec::new(PerturbationKind::GaussianRotation, 0.3)?, 0)?;
        let moved = solve_exact(g, &env.perturbed, bc, &ExactOptions::default())?;
        let overlap = site_overlap(g, sigma, &moved.config)?;
        let interior = g.interior();
        let dot: i64 = interior.iter().map(|v| i64::from(sigma.get(v) * moved.config.get(v))).sum();
        let disagree = interior.iter().filter(|&v| sigma.get(v) != moved.config.get(v)).count() as i64;
        if dot == interior.len() as i64 - 2 * disagree && overlap.droplet_size as i64 == disagree && overlap.identity_holds() {
            passed += 1;
        } else {
            failures.push(format!("{family} #{k}: overlap identity"));
        }
        Ok((passed, regions + 1, failures))
    })?;
    Ok(CheckReport::tally("exact identities", |t| t, results))
}

fn random_region(g: &LatticeGraph, bc: &BoundaryCondition, rng: &mut CounterRng) -> VertexSet {
    let candidates: Vec<usize> = if bc.is_free() { (0..g.n_vertices()).collect() } else { g.interior().as_slice().to_vec() };
    candidates.into_iter().filter(|_| rng.sign() > 0).collect()
}

/// Annealing with the default schedule against exact solves, on instances
/// with at most 16 free spins. At most one miss is allowed.
pub fn anneal_oracle(instances: usize, seed: u64, threads: Option<usize>) -> Result<CheckReport> {
    let pool = thread_pool(threads)?;
    let results = par_map(&pool, instances, |k| {
        let inst = random_instance(16, seed, 1_000_000 + k as u64)?;
        let exact = solve_exact(&inst.g, &inst.j, &inst.bc, &ExactOptions::default())?;
        let annealed = solve_anneal(&inst.g, &inst.j, &inst.bc, &AnnealOptions::default(), seed ^ k as u64)?;
        let ok = (exact.energy - annealed.energy).abs() <= 1e-9;
        let failure = (!ok).then(|| format!("{} #{k}: exact {} anneal {}", inst.family, exact.energy, annealed.energy));
        Ok((usize::from(ok), 1, failure.into_iter().collect()))
    })?;
    Ok(CheckReport::tally("anneal vs exact", |t| t.saturating_sub(t / 200), results))
}

/// Branch and bound against exhaustive enumeration on instances with at
/// most 20 free spins. Energies and minimizers must agree.
pub fn branch_bound_oracle(instances: usize, seed: u64, threads: Option<usize>) -> Result<CheckReport> {
    let pool = thread_pool(threads)?;
    let results = par_map(&pool, instances, |k| {
        let inst = random_instance(20, seed, 2_000_000 + k as u64)?;
        let full = solve_exact(&inst.g, &inst.j, &inst.bc, &ExactOptions::with_method(ExactMethod::Exhaustive))?;
        let bb = solve_exact(&inst.g, &inst.j, &inst.bc, &ExactOptions::with_method(ExactMethod::BranchBound))?;
        let ok = (full.energy - bb.energy).abs() <= 1e-9 && full.config == bb.config;
        let failure = (!ok).then(|| format!("{} #{k}: exhaustive {} bb {}", inst.family, full.energy, bb.energy));
        Ok((usize::from(ok), 1, failure.into_iter().collect()))
    })?;
    Ok(CheckReport::tally("branch and bound vs exhaustive", |t| t, results))
}

/// `ratio <= 2 sqrt(2p - p^2) / (1 - p) max|J'|` for the rotation droplet,
/// with `p` cycling through `ps` and both ground states exact.
pub fn ratio_bound_suite(replicates: usize, ps: &[f64], seed: u64, threads: Option<usize>) -> Result<CheckReport> {
    let pool = thread_pool(threads)?;
    let policy = exact_policy();
    let results = par_map(&pool, replicates, |k| {
        let inst = random_instance(20, seed, 3_000_000 + k as u64)?;
        let p = ps[k % ps.len()];
        let fresh = sample_disorder(&inst.g, seed, &Stream::new("ratio/J'").with_index(k as u64));
        let env = perturb(&inst.j, &fresh, PerturbationSpec::new(PerturbationKind::GaussianRotation, p)?, 0)?;
        let vb = valley_upper_bound(&inst.g, &env, &inst.bc, &policy, 0)?;
        let ok = vb.bound_ok && vb.ground.exact && vb.perturbed.exact;
        let failure =
            (!ok).then(|| format!("{} #{k} p={p}: ratio {} bound {}", inst.family, vb.report.ratio, vb.bound));
        Ok((usize::from(ok), 1, failure.into_iter().collect()))
    })?;
    Ok(CheckReport::tally("deterministic ratio bound", |t| t, results))
}

/// `E[σ_i σ_j]` under a free boundary on `Torus(2, l)` for `pairs` random
/// pairs. Each estimate must lie within 4 standard errors of 0.
pub fn gauge_null(
    l: usize,
    replicates: usize,
    pairs: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<(CheckReport, Vec<((usize, usize), Estimate)>)> {
    let g = LatticeGraph::cube(Topology::Torus { d: 2, l })?;
    let n = g.n_vertices();
    let mut rng = CounterRng::new(seed, &Stream::new("gauge/pairs"));
    let mut chosen = Vec::with_capacity(pairs);
    while chosen.len() < pairs.min(n * (n - 1) / 2) {
        let i = rng.below(n as u64) as usize;
        let j = rng.below(n as u64) as usize;
        let pair = (i.min(j), i.max(j));
        if i != j && !chosen.contains(&pair) {
            chosen.push(pair);
        }
    }
    let pool = thread_pool(threads)?;
    let products = par_map(&pool, replicates, |k| {
        let j = sample_disorder(&g, seed, &Stream::new("gauge/J").with_index(k as u64));
        let ground = solve_exact(&g, &j, &BoundaryCondition::Free, &ExactOptions::default())?;
        Ok(chosen.iter().map(|&(a, b)| f64::from(ground.config.get(a) * ground.config.get(b))).collect::<Vec<_>>())
    })?;
    let mut estimates = Vec::with_capacity(chosen.len());
    let mut results = Vec::with_capacity(chosen.len());
    for (c, &pair) in chosen.iter().enumerate() {
        let values: Vec<f64> = products.iter().map(|row| row[c]).collect();
        let est = Estimate::mean_of(&values)?;
        let ok = est.mean.abs() <= 4.0 * est.stderr;
        let failure = (!ok).then(|| format!("pair {}-{}: mean {} stderr {}", pair.0, pair.1, est.mean, est.stderr));
        results.push((usize::from(ok), 1, failure.into_iter().collect()));
        estimates.push((pair, est));
    }
    Ok((CheckReport::tally("gauge-symmetry null", |t| t, results), estimates))
}

/// The critical threshold `(H1 - H2) / 2` predicts the sign of `σ_i σ_j` in
/// an unconstrained exact ground state, away from ties.
pub fn threshold_suite(instances: usize, seed: u64, threads: Option<usize>) -> Result<CheckReport> {
    let pool = thread_pool(threads)?;
    let policy = exact_policy();
    let results = par_map(&pool, instances, |k| {
        let inst = random_instance(20, seed, 4_000_000 + k as u64)?;
        let Instance { g, j, bc, family } = &inst;
        let free: Vec<usize> = (0..g.n_edges())
            .filter(|&e| {
                let (u, v) = g.edge(e);
                bc.spin_at(g, u).is_none() || bc.spin_at(g, v).is_none()
            })
            .collect();
        let mut rng = CounterRng::new(seed, &Stream::new("threshold/edge").with_index(k as u64));
        let e = free[rng.below(free.len() as u64) as usize];
        let cd = critical_droplet(g, j, bc, e, &policy, 0)?;
        if (j.get(e) - cd.threshold).abs() < 1e-9 {
            return Ok((0, 0, Vec::new()));
        }
        let ground = solve_exact(g, j, bc, &ExactOptions::default())?;
        let (u, v) = g.edge(e);
        let ok = (ground.config.get(u) == ground.config.get(v)) == cd.ground_aligned && cd.exact;
        let failure = (!ok).then(|| format!("{family} #{k} edge {e}: J {} threshold {}", j.get(e), cd.threshold));
        Ok((usize::from(ok), 1, failure.into_iter().collect()))
    })?;
    Ok(CheckReport::tally("critical threshold", |t| t, results))
}

/// `|∂D(e)| >= 2 |D(e)|^(1/2)` for nonempty critical droplets on `Torus(2, l)`.
pub fn isoperimetry_suite(l: usize, replicates: usize, seed: u64, threads: Option<usize>) -> Result<CheckReport> {
    let g = LatticeGraph::cube(Topology::Torus { d: 2, l })?;
    let pool = thread_pool(threads)?;
    let policy = exact_policy();
    let results = par_map(&pool, replicates, |k| {
        let j = sample_disorder(&g, seed, &Stream::new("isoperimetry/J").with_index(k as u64));
        let e = CounterRng::new(seed, &Stream::new("isoperimetry/edge").with_index(k as u64)).below(g.n_edges() as u64);
        let cd = critical_droplet(&g, &j, &BoundaryCondition::Free, e as usize, &policy, 0)?;
        if cd.size == 0 {
            return Ok((0, 0, Vec::new()));
        }
        let ok = cd.isoperimetric_ok(2) && cd.exact;
        let failure = (!ok).then(|| format!("#{k}: |D| {} |dD| {}", cd.size, cd.boundary_size));
        Ok((usize::from(ok), 1, failure.into_iter().collect()))
    })?;
    Ok(CheckReport::tally("critical isoperimetry", |t| t, results))
}

/// All suites at their default sizes.
pub fn verify_all(seed: u64, threads: Option<usize>) -> Result<Vec<CheckReport>> {
    Ok(vec![
        identity_suite(500, 20, seed, threads)?,
        anneal_oracle(200, seed, threads)?,
        branch_bound_oracle(200, seed, threads)?,
        ratio_bound_suite(500, &[0.1, 0.3, 0.5], seed, threads)?,
        gauge_null(4, 2000, 10, seed, threads)?.0,
        threshold_suite(300, seed, threads)?,
        isoperimetry_suite(4, 300, seed, threads)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        assert!(identity_suite(20, 5, 1, Some(2)).unwrap().ok());
        assert!(branch_bound_oracle(20, 1, Some(2)).unwrap().ok());
        assert!(ratio_bound_suite(30, &[0.1, 0.5], 1, Some(2)).unwrap().ok());
        assert!(threshold_suite(30, 1, Some(2)).unwrap().ok());
        assert!(isoperimetry_suite(4, 20, 1, Some(2)).unwrap().ok());
    }

    #[test]
    fn report_tally_and_display() {
        let r = CheckReport::tally("x", |t| t - 1, vec![(1, 1, vec![]), (0, 1, vec!["bad".into()])]);
        assert_eq!((r.passed, r.total, r.required), (1, 2, 1));
        assert!(r.ok());
        assert_eq!(r.to_string(), "PASS x: 1/2 (need 1)");
    }
}
