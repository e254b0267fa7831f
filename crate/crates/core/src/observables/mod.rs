//! Overlaps, droplets, interface energies and the statistics built on them.

use alloc::vec::Vec;

use crate::disorder::Disorder;
use crate::lattice::{EdgeSet, LatticeGraph, VertexSet};
use crate::solver::{energy, BoundaryCondition, SpinConfiguration};
use crate::{Error, Result};

mod boundary;
mod critical;
mod valley;

pub use boundary::{boundary_dependence, boundary_dependence_full, BoundaryBudget, BoundaryDependence};
pub use critical::{critical_droplet, CriticalDroplet};
pub use valley::{ratio_bound_constant, valley_statistic_exact, valley_upper_bound, ValleyBound, ValleyStatistic, VALLEY_CAP};

/// Agreement between two configurations on the interior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapSample {
    pub r: f64,
    pub r_squared: f64,
    /// Interior vertices where the configurations disagree.
    pub droplet_size: usize,
    pub interior_size: usize,
    /// `sum_{i in V°} σ_i σ'_i`.
    pub agreement: i64,
}

impl OverlapSample {
    /// `droplet_size = |V°|(1 - R)/2`, in integers.
    pub fn identity_holds(&self) -> bool {
        self.interior_size as i64 - 2 * self.droplet_size as i64 == self.agreement
    }
}

pub fn site_overlap(g: &LatticeGraph, a: &SpinConfiguration, b: &SpinConfiguration) -> Result<OverlapSample> {
    for s in [a, b] {
        if s.len() != g.n_vertices() {
            return Err(Error::DimensionMismatch { expected: g.n_vertices(), found: s.len() });
        }
    }
    let interior = g.interior();
    let agreement: i64 = interior.iter().map(|i| i64::from(a.get(i) * b.get(i))).sum();
    let droplet_size = interior.iter().filter(|&i| a.get(i) != b.get(i)).count();
    let r = agreement as f64 / interior.len() as f64;
    Ok(OverlapSample { r, r_squared: r * r, droplet_size, interior_size: interior.len(), agreement })
}

fn check_region(g: &LatticeGraph, bc: &BoundaryCondition, region: &VertexSet) -> Result<()> {
    if let Some(v) = region.iter().find(|&v| v >= g.n_vertices()) {
        return Err(Error::VertexOutOfRange { vertex: v, n: g.n_vertices() });
    }
    if !bc.is_free() {
        if let Some(v) = region.iter().find(|&v| g.is_boundary(v)) {
            return Err(Error::RegionTouchesBoundary(v));
        }
    }
    Ok(())
}

/// `σ` with every spin in `region` reversed. Boundary spins may only be
/// flipped under a free boundary condition.
pub fn flip_region(
    g: &LatticeGraph,
    bc: &BoundaryCondition,
    sigma: &SpinConfiguration,
    region: &VertexSet,
) -> Result<SpinConfiguration> {
    check_region(g, bc, region)?;
    if sigma.len() != g.n_vertices() {
        return Err(Error::DimensionMismatch { expected: g.n_vertices(), found: sigma.len() });
    }
    let mut spins = sigma.spins().to_vec();
    for v in region.iter() {
        spins[v] = -spins[v];
    }
    Ok(SpinConfiguration::from_spins_unchecked(spins))
}

/// `Δ(A) = H(σ^A) - H(σ)`, evaluated directly and as `2 sum_{∂A} J σ σ`.
pub fn interface_energy(
    g: &LatticeGraph,
    j: &Disorder,
    bc: &BoundaryCondition,
    sigma: &SpinConfiguration,
    region: &VertexSet,
) -> Result<f64> {
    let flipped = flip_region(g, bc, sigma, region)?;
    let flip = energy(g, j, &flipped)? - energy(g, j, sigma)?;
    let boundary = boundary_sum(g, j, sigma, &g.edge_boundary(region));
    if (flip - boundary).abs() > 1e-9 {
        return Err(Error::InternalMismatch { flip, boundary });
    }
    Ok(boundary)
}

fn boundary_sum(g: &LatticeGraph, j: &Disorder, sigma: &SpinConfiguration, edges: &EdgeSet) -> f64 {
    2.0 * edges
        .iter()
        .map(|e| {
            let (u, v) = g.edge(e);
            j.get(e) * f64::from(sigma.get(u) * sigma.get(v))
        })
        .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropletReport {
    pub region: VertexSet,
    pub boundary: EdgeSet,
    pub size: usize,
    pub boundary_size: usize,
    pub delta: f64,
    /// `delta / boundary_size`, zero when the boundary is empty.
    pub ratio: f64,
}

/// Disagreement set of `inside`, replaced by its complement under a free
/// boundary condition when that is smaller, or equal in size and free of vertex 0.
pub(crate) fn reduce_region(bc: &BoundaryCondition, inside: &[bool]) -> VertexSet {
    let n = inside.len();
    let size = inside.iter().filter(|&&x| x).count();
    let take_complement = bc.is_free() && (2 * size > n || (2 * size == n && inside.first() == Some(&true)));
    VertexSet::new((0..n).filter(|&v| inside[v] != take_complement).collect())
}

/// The region where `sigma` and `other` disagree, scored against `j` and `sigma`.
pub fn droplet(
    g: &LatticeGraph,
    j: &Disorder,
    bc: &BoundaryCondition,
    sigma: &SpinConfiguration,
    other: &SpinConfiguration,
) -> Result<DropletReport> {
    for s in [sigma, other] {
        if s.len() != g.n_vertices() {
            return Err(Error::DimensionMismatch { expected: g.n_vertices(), found: s.len() });
        }
    }
    let inside: Vec<bool> = (0..g.n_vertices()).map(|v| sigma.get(v) != other.get(v)).collect();
    report(g, j, bc, sigma, reduce_region(bc, &inside))
}

pub(crate) fn report(
    g: &LatticeGraph,
    j: &Disorder,
    bc: &BoundaryCondition,
    sigma: &SpinConfiguration,
    region: VertexSet,
) -> Result<DropletReport> {
    let delta = interface_energy(g, j, bc, sigma, &region)?;
    let boundary = g.edge_boundary(&region);
    let ratio = if boundary.is_empty() { 0.0 } else { delta / boundary.len() as f64 };
    Ok(DropletReport { size: region.len(), boundary_size: boundary.len(), region, boundary, delta, ratio })
}

/// `|∂D| >= 2 |D|^(1 - 1/d)`, with a small allowance for rounding.
pub fn isoperimetric_ok(d: usize, size: usize, boundary_size: usize) -> bool {
    if size == 0 || d == 0 {
        return true;
    }
    let exponent = 1.0 - 1.0 / d as f64;
    boundary_size as f64 + 1e-9 >= 2.0 * libm::pow(size as f64, exponent)
}
