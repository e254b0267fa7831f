//! Whether the sign of one bond in the ground state depends on the boundary condition.
//!
//! Only interior vertices adjacent to the boundary (the ring) feel the boundary
//! spins, through fields `h_v = sum_b J_bv γ_b`. One pass over interior
//! configurations tabulates, for every ring pattern `ρ` and bond sign `s`, the
//! least interior energy `M(ρ, s)`; the ground-state bond sign under `γ` then
//! compares `min_ρ M(ρ, s) - h·ρ` for both signs.
//!
//! When each boundary vertex touches at most one interior vertex, a ground
//! state `σ` under any `γ` stays a ground state once every boundary bond is
//! satisfied, so it suffices to scan those aligned conditions, one per ring
//! pattern. Otherwise all conditions are scanned. Either way `γ` and `-γ`
//! give the same bond sign, so half of them are skipped.

use alloc::vec;
use alloc::vec::Vec;

use crate::disorder::Disorder;
use crate::lattice::LatticeGraph;
use crate::solver::{solve_exact, BoundaryCondition, ExactOptions};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryBudget {
    pub max_interior: usize,
    /// Log2 of the number of boundary conditions scanned after reduction.
    pub max_condition_bits: usize,
}

impl Default for BoundaryBudget {
    fn default() -> Self {
        Self { max_interior: 20, max_condition_bits: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryDependence {
    /// The bond sign differs between two boundary conditions.
    pub event: bool,
    /// `min(d(i,B), d(j,B))`.
    pub r: usize,
    pub conditions: u64,
    pub aligned_reduction: bool,
}

fn check_pair(g: &LatticeGraph, i: usize, j: usize) -> Result<usize> {
    if g.boundary().is_empty() {
        return Err(Error::NotOpenCube);
    }
    for v in [i, j] {
        if v >= g.n_vertices() {
            return Err(Error::VertexOutOfRange { vertex: v, n: g.n_vertices() });
        }
        if g.is_boundary(v) {
            return Err(Error::RegionTouchesBoundary(v));
        }
    }
    if g.edge_index(i, j).is_none() {
        return Err(Error::ConstraintNotEdge(i, j));
    }
    let depth = |v| g.distance_to_boundary(v).unwrap_or(usize::MAX);
    Ok(depth(i).min(depth(j)))
}

pub fn boundary_dependence(
    g: &LatticeGraph,
    couplings: &Disorder,
    i: usize,
    j: usize,
    budget: &BoundaryBudget,
) -> Result<BoundaryDependence> {
    couplings.check_graph(g)?;
    let r = check_pair(g, i, j)?;
    let interior = g.interior().as_slice();
    let m = interior.len();
    if m > budget.max_interior {
        return Err(Error::TooLarge { free_spins: m, cap: budget.max_interior });
    }
    let n = g.n_vertices();
    let mut slot = vec![usize::MAX; n];
    for (k, &v) in interior.iter().enumerate() {
        slot[v] = k;
    }
    let ring: Vec<usize> = interior.iter().copied().filter(|&v| g.neighbors(v).iter().any(|&(w, _)| g.is_boundary(w))).collect();
    let mut ring_bit = vec![usize::MAX; n];
    for (k, &v) in ring.iter().enumerate() {
        ring_bit[v] = k;
    }
    let active: Vec<usize> =
        g.boundary().iter().filter(|&b| g.neighbors(b).iter().any(|&(w, _)| !g.is_boundary(w))).collect();
    let aligned = active.iter().all(|&b| g.neighbors(b).iter().filter(|&&(w, _)| !g.is_boundary(w)).count() == 1);
    let bits = if aligned { ring.len() } else { active.len() }.saturating_sub(1);
    if bits > budget.max_condition_bits {
        return Err(Error::TooLarge { free_spins: bits + 1, cap: budget.max_condition_bits + 1 });
    }

    let table = ring_table(g, couplings, interior, &slot, &ring_bit, ring.len(), (i, j));

    // boundary vertex b contributes J_bv γ_b to the field at its ring neighbour v
    let links: Vec<(usize, usize, f64)> = active
        .iter()
        .enumerate()
        .flat_map(|(a, &b)| {
            let ring_bit = &ring_bit;
            g.neighbors(b)
                .iter()
                .filter(|&&(w, _)| !g.is_boundary(w))
                .map(move |&(w, e)| (a, ring_bit[w], couplings.get(e)))
        })
        .collect();
    let mut fields = vec![0.0; ring.len()];
    let mut seen = [false; 2];
    let mut conditions = 0u64;
    for pattern in 0u64..(1u64 << bits) {
        fields.iter_mut().for_each(|h| *h = 0.0);
        if aligned {
            for &(_, k, w) in &links {
                fields[k] += w.abs() * bit_sign(pattern, k);
            }
        } else {
            for &(a, k, w) in &links {
                fields[k] += w * bit_sign(pattern, a);
            }
        }
        conditions += 1;
        if let Some(s) = ground_sign(&table, &fields) {
            seen[s] = true;
            if seen[0] && seen[1] {
                break;
            }
        }
    }
    Ok(BoundaryDependence { event: seen[0] && seen[1], r, conditions, aligned_reduction: aligned })
}

/// Bit `k` set means `-1`; bits past the pattern width read as `+1`.
fn bit_sign(pattern: u64, k: usize) -> f64 {
    if k < 64 && pattern >> k & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// `M(ρ, s)` over interior configurations, indexed by ring mask and `s` (0 for `+1`).
fn ring_table(
    g: &LatticeGraph,
    couplings: &Disorder,
    interior: &[usize],
    slot: &[usize],
    ring_bit: &[usize],
    ring_len: usize,
    (i, j): (usize, usize),
) -> Vec<[f64; 2]> {
    const RESYNC: u64 = 4096;
    let m = interior.len();
    let mut tau = vec![1i8; g.n_vertices()];
    let inner: Vec<Vec<(usize, f64)>> = interior
        .iter()
        .map(|&v| g.neighbors(v).iter().filter(|&&(w, _)| slot[w] != usize::MAX).map(|&(w, e)| (w, couplings.get(e))).collect())
        .collect();
    let exact = |tau: &[i8]| -> f64 {
        g.edges()
            .iter()
            .zip(couplings.couplings())
            .filter(|(&(u, v), _)| slot[u] != usize::MAX && slot[v] != usize::MAX)
            .map(|(&(u, v), &w)| -w * f64::from(tau[u] * tau[v]))
            .sum()
    };
    let mut table = vec![[f64::INFINITY; 2]; 1 << ring_len];
    let mut energy = exact(&tau);
    let mut ring_mask = 0usize;
    for step in 0u64..(1u64 << m) {
        if step > 0 {
            let k = step.trailing_zeros() as usize;
            let v = interior[k];
            let local: f64 = inner[k].iter().map(|&(w, c)| c * f64::from(tau[w])).sum();
            energy += 2.0 * f64::from(tau[v]) * local;
            tau[v] = -tau[v];
            if ring_bit[v] != usize::MAX {
                ring_mask ^= 1 << ring_bit[v];
            }
            if step % RESYNC == 0 {
                energy = exact(&tau);
            }
        }
        let s = usize::from(tau[i] * tau[j] < 0);
        let cell = &mut table[ring_mask][s];
        if energy < *cell {
            *cell = energy;
        }
    }
    table
}

/// Bond sign index of the ground state under ring fields `h`, `None` on an exact tie.
fn ground_sign(table: &[[f64; 2]], fields: &[f64]) -> Option<usize> {
    let mut best = [f64::INFINITY; 2];
    let mut dot: f64 = fields.iter().sum();
    let mut rho = vec![1.0f64; fields.len()];
    let mut mask = 0usize;
    for step in 0usize..table.len() {
        if step > 0 {
            let k = step.trailing_zeros() as usize;
            dot -= 2.0 * fields[k] * rho[k];
            rho[k] = -rho[k];
            mask ^= 1 << k;
        }
        let [plus, minus] = table[mask];
        best[0] = best[0].min(plus - dot);
        best[1] = best[1].min(minus - dot);
    }
    if best[0] < best[1] {
        Some(0)
    } else if best[1] < best[0] {
        Some(1)
    } else {
        None
    }
}

/// Reference implementation: an exact solve for every one of the `2^|B|`
/// boundary conditions.
pub fn boundary_dependence_full(g: &LatticeGraph, couplings: &Disorder, i: usize, j: usize) -> Result<BoundaryDependence> {
    let r = check_pair(g, i, j)?;
    let b = g.boundary().len();
    if b > 20 {
        return Err(Error::TooLarge { free_spins: b, cap: 20 });
    }
    let mut seen = [false; 2];
    for pattern in 0u64..(1u64 << b) {
        let gamma = (0..b).map(|k| if pattern >> k & 1 == 1 { -1 } else { 1 }).collect();
        let bc = BoundaryCondition::fixed(g, gamma)?;
        let ground = solve_exact(g, couplings, &bc, &ExactOptions::default())?;
        seen[usize::from(ground.config.get(i) * ground.config.get(j) < 0)] = true;
    }
    Ok(BoundaryDependence { event: seen[0] && seen[1], r, conditions: 1 << b, aligned_reduction: false })
}
