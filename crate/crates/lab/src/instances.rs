//! Random small instances for the verification suites.

use std::fmt;

use ea_core::disorder::{sample_disorder, Disorder, Stream};
use ea_core::lattice::{LatticeGraph, Topology, VertexSet};
use ea_core::rng::CounterRng;
use ea_core::solver::{free_spin_count, BoundaryCondition};

use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Path with both ends fixed to random signs.
    Path,
    /// Random tree, free boundary.
    Tree,
    /// Random tree plus extra edges, free boundary.
    Sparse,
    /// `OpenCube(2, L)` with a random fixed boundary.
    OpenCube,
    /// `Torus(2, L)`, free boundary.
    Torus,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Path, Family::Tree, Family::Sparse, Family::OpenCube, Family::Torus];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::Path => "path",
            Family::Tree => "tree",
            Family::Sparse => "sparse",
            Family::OpenCube => "open-cube",
            Family::Torus => "torus",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub family: Family,
    pub g: LatticeGraph,
    pub j: Disorder,
    pub bc: BoundaryCondition,
}

impl Instance {
    pub fn free_spins(&self) -> usize {
        free_spin_count(&self.g, &self.bc)
    }
}

/// Instance `index` of a deterministic family cycle, with at most
/// `max_free` free spins. `max_free` must be at least 9.
pub fn random_instance(max_free: usize, seed: u64, index: u64) -> Result<Instance> {
    assert!(max_free >= 9, "max_free must be at least 9");
    let family = Family::ALL[(index % Family::ALL.len() as u64) as usize];
    let mut rng = CounterRng::new(seed, &Stream::new(format!("instance/{family}")).with_index(index));
    let (g, fixed) = match family {
        Family::Path => {
            let n = between(&mut rng, 4, max_free + 2);
            let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
            (LatticeGraph::explicit(n, &edges, VertexSet::new(vec![0, n - 1]))?, true)
        }
        Family::Tree => {
            let n = between(&mut rng, 3, max_free);
            (LatticeGraph::explicit(n, &tree_edges(n, &mut rng), VertexSet::empty())?, false)
        }
        Family::Sparse => {
            let n = between(&mut rng, 4, max_free);
            let mut edges = tree_edges(n, &mut rng);
            for _ in 0..n / 2 {
                let u = rng.below(n as u64) as usize;
                let v = rng.below(n as u64) as usize;
                let e = (u.min(v), u.max(v));
                if u != v && !edges.contains(&e) {
                    edges.push(e);
                }
            }
            (LatticeGraph::explicit(n, &edges, VertexSet::empty())?, false)
        }
        Family::OpenCube => {
            let sides: Vec<usize> = (2..=5).filter(|l| (l - 1) * (l - 1) <= max_free).collect();
            let l = sides[rng.below(sides.len() as u64) as usize];
            (LatticeGraph::cube(Topology::OpenCube { d: 2, l })?, true)
        }
        Family::Torus => {
            let sides: Vec<usize> = (3..=4).filter(|l| l * l <= max_free).collect();
            let l = sides[rng.below(sides.len() as u64) as usize];
            (LatticeGraph::cube(Topology::Torus { d: 2, l })?, false)
        }
    };
    let bc = if fixed {
        BoundaryCondition::fixed(&g, g.boundary().iter().map(|_| rng.sign()).collect())?
    } else {
        BoundaryCondition::Free
    };
    let j = sample_disorder(&g, seed, &Stream::new(format!("instance-J/{family}")).with_index(index));
    Ok(Instance { family, g, j, bc })
}

fn between(rng: &mut CounterRng, lo: usize, hi: usize) -> usize {
    lo + rng.below((hi - lo + 1) as u64) as usize
}

fn tree_edges(n: usize, rng: &mut CounterRng) -> Vec<(usize, usize)> {
    (1..n).map(|v| (rng.below(v as u64) as usize, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_respect_the_spin_budget() {
        for index in 0..200 {
            let inst = random_instance(16, 3, index).unwrap();
            assert!(inst.free_spins() <= 16, "{} has {}", inst.family, inst.free_spins());
            assert_eq!(inst.j.len(), inst.g.n_edges());
        }
    }

    #[test]
    fn every_family_appears_and_generation_is_deterministic() {
        let families: Vec<Family> = (0..5).map(|k| random_instance(20, 1, k).unwrap().family).collect();
        assert_eq!(families, Family::ALL);
        assert_eq!(random_instance(20, 9, 7).unwrap(), random_instance(20, 9, 7).unwrap());
    }
}
