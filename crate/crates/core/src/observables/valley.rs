use alloc::vec;
use alloc::vec::Vec;

use super::{droplet, DropletReport};
use crate::disorder::{CoupledEnvironments, Disorder, PerturbationKind};
use crate::lattice::{LatticeGraph, VertexSet};
use crate::solver::{solve_exact, BoundaryCondition, ExactOptions, SolveResult, SolverPolicy};
use crate::{Error, Result};

/// Largest interior for which [`valley_statistic_exact`] enumerates every region.
pub const VALLEY_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ValleyStatistic {
    /// `min Δ(A)/|∂A|` over `|V°| <= 4|A| <= 3|V°|`.
    pub f: f64,
    pub region: VertexSet,
    pub delta: f64,
    pub boundary_size: usize,
    pub ground: SolveResult,
}

/// Exact valley statistic by enumerating every admissible interior region of
/// the exact ground state. Equal ratios resolve to the lexicographically
/// smallest region.
pub fn valley_statistic_exact(g: &LatticeGraph, j: &Disorder, bc: &BoundaryCondition) -> Result<ValleyStatistic> {
    let interior = g.interior().as_slice();
    let m = interior.len();
    if m > VALLEY_CAP {
        return Err(Error::TooLarge { free_spins: m, cap: VALLEY_CAP });
    }
    let ground = solve_exact(g, j, bc, &ExactOptions::default())?;
    let sigma = ground.config.spins();
    let term = |e: usize| {
        let (u, v) = g.edge(e);
        j.get(e) * f64::from(sigma[u] * sigma[v])
    };

    let mut inside = vec![false; g.n_vertices()];
    let mut sum = 0.0;
    let mut boundary_size = 0usize;
    let mut size = 0usize;
    let mut best: Option<(f64, Vec<usize>, f64, usize)> = None;
    for step in 1u64..(1u64 << m) {
        let v = interior[step.trailing_zeros() as usize];
        for &(w, e) in g.neighbors(v) {
            if inside[v] != inside[w] {
                sum -= term(e);
                boundary_size -= 1;
            } else {
                sum += term(e);
                boundary_size += 1;
            }
        }
        inside[v] = !inside[v];
        if inside[v] {
            size += 1;
        } else {
            size -= 1;
        }
        if m > 4 * size || 4 * size > 3 * m {
            continue;
        }
        let ratio = if boundary_size == 0 { 0.0 } else { 2.0 * sum / boundary_size as f64 };
        if best.as_ref().is_some_and(|b| ratio > b.0 + 1e-9) {
            continue;
        }
        // rescore from scratch so near-ties are compared without drift
        let region: Vec<usize> = interior.iter().copied().filter(|&u| inside[u]).collect();
        let edges: Vec<usize> = (0..g.n_edges()).filter(|&e| inside[g.edge(e).0] != inside[g.edge(e).1]).collect();
        let delta = 2.0 * edges.iter().map(|&e| term(e)).sum::<f64>();
        let ratio = if edges.is_empty() { 0.0 } else { delta / edges.len() as f64 };
        let better = match &best {
            None => true,
            Some(b) => ratio < b.0 - 1e-12 || (ratio <= b.0 + 1e-12 && region < b.1),
        };
        if better {
            best = Some((ratio, region, delta, edges.len()));
        }
    }
    let (f, region, delta, boundary_size) = best.ok_or(Error::EmptyInterior)?;
    Ok(ValleyStatistic { f, region: VertexSet::new(region), delta, boundary_size, ground })
}

/// `2 sqrt(2p - p^2) / (1 - p) * max_abs`.
pub fn ratio_bound_constant(p: f64, max_abs: f64) -> f64 {
    2.0 * libm::sqrt(2.0 * p - p * p) / (1.0 - p) * max_abs
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValleyBound {
    pub report: DropletReport,
    pub bound: f64,
    pub bound_ok: bool,
    /// The droplet is macroscopic, so its ratio bounds the valley statistic.
    pub size_ok: bool,
    pub ground: SolveResult,
    pub perturbed: SolveResult,
}

/// Droplet between the ground states of `J` and of its rotation, with the
/// deterministic bound on its interface ratio.
pub fn valley_upper_bound(
    g: &LatticeGraph,
    env: &CoupledEnvironments,
    bc: &BoundaryCondition,
    policy: &SolverPolicy,
    seed: u64,
) -> Result<ValleyBound> {
    if env.spec.kind() != PerturbationKind::GaussianRotation {
        return Err(Error::WrongKind);
    }
    let ground = policy.solve(g, &env.original, bc, None, seed)?;
    let perturbed = policy.solve(g, &env.perturbed, bc, None, seed)?;
    let report = droplet(g, &env.original, bc, &ground.config, &perturbed.config)?;
    let bound = ratio_bound_constant(env.spec.p(), env.fresh.max_abs());
    let m = g.interior().len();
    let a = report.region.iter().filter(|&v| !g.is_boundary(v)).count();
    Ok(ValleyBound {
        bound_ok: report.ratio <= bound + 1e-9,
        size_ok: m <= 4 * a && 4 * a <= 3 * m,
        bound,
        report,
        ground,
        perturbed,
    })
}
