use alloc::vec::Vec;

use super::{isoperimetric_ok, reduce_region};
use crate::disorder::Disorder;
use crate::lattice::{LatticeGraph, VertexSet};
use crate::solver::{BoundaryCondition, PairConstraint, SolveResult, SolverPolicy};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalDroplet {
    pub edge: usize,
    pub region: VertexSet,
    pub size: usize,
    pub boundary_size: usize,
    /// Constrained minimum with `σ_i = σ_j` and the edge switched off.
    pub h1: f64,
    /// Constrained minimum with `σ_i = -σ_j` and the edge switched off.
    pub h2: f64,
    /// `(h1 - h2) / 2`.
    pub threshold: f64,
    /// Whether the unconstrained ground state has `σ_i σ_j = +1`, read off as `J_e > threshold`.
    pub ground_aligned: bool,
    pub exact: bool,
    pub aligned: SolveResult,
    pub opposed: SolveResult,
}

impl CriticalDroplet {
    /// `|∂D| >= 2|D|^(1-1/d)`.
    pub fn isoperimetric_ok(&self, d: usize) -> bool {
        isoperimetric_ok(d, self.size, self.boundary_size)
    }
}

/// Disagreement set between the two constrained minimizers across edge `e`.
pub fn critical_droplet(
    g: &LatticeGraph,
    j: &Disorder,
    bc: &BoundaryCondition,
    e: usize,
    policy: &SolverPolicy,
    seed: u64,
) -> Result<CriticalDroplet> {
    let solve = |sign| -> Result<SolveResult> {
        let c = PairConstraint::on_edge(g, e, sign)?;
        policy.solve(g, j, bc, Some((&c, true)), seed)
    };
    let aligned = solve(1)?;
    let opposed = solve(-1)?;
    let inside: Vec<bool> = (0..g.n_vertices()).map(|v| aligned.config.get(v) != opposed.config.get(v)).collect();
    let region = reduce_region(bc, &inside);
    let boundary_size = g.edge_boundary(&region).len();
    let (h1, h2) = (aligned.energy, opposed.energy);
    let threshold = (h1 - h2) / 2.0;
    Ok(CriticalDroplet {
        edge: e,
        size: region.len(),
        region,
        boundary_size,
        h1,
        h2,
        threshold,
        ground_aligned: j.get(e) > threshold,
        exact: aligned.exact && opposed.exact,
        aligned,
        opposed,
    })
}
