//! Random instances and a brute-force oracle shared by the unit tests.

use alloc::vec;
use alloc::vec::Vec;

use crate::disorder::{sample_disorder, Disorder, Stream};
use crate::lattice::{LatticeGraph, Topology, VertexSet};
use crate::rng::CounterRng;
use crate::solver::{BoundaryCondition, SpinConfiguration};

pub fn path(n: usize, boundary: &[usize]) -> LatticeGraph {
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    LatticeGraph::explicit(n, &edges, VertexSet::new(boundary.to_vec())).unwrap()
}

pub fn couplings(values: &[f64]) -> Disorder {
    Disorder::from_couplings(values.to_vec()).unwrap()
}

pub fn spins(values: &[i8]) -> SpinConfiguration {
    SpinConfiguration::new(values.to_vec()).unwrap()
}

pub fn random_tree(n: usize, rng: &mut CounterRng) -> LatticeGraph {
    let edges: Vec<_> = (1..n).map(|v| (rng.below(v as u64) as usize, v)).collect();
    LatticeGraph::explicit(n, &edges, VertexSet::empty()).unwrap()
}

/// Spanning tree plus a few random chords.
pub fn random_graph(n: usize, extra: usize, rng: &mut CounterRng) -> LatticeGraph {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.below(v as u64) as usize, v)).collect();
    for _ in 0..extra {
        let a = rng.below(n as u64) as usize;
        let b = rng.below(n as u64) as usize;
        let e = (a.min(b), a.max(b));
        if a != b && !edges.iter().any(|&f| (f.0.min(f.1), f.0.max(f.1)) == e) {
            edges.push(e);
        }
    }
    LatticeGraph::explicit(n, &edges, VertexSet::empty()).unwrap()
}

/// A mix of paths, trees, random graphs, grids and tori with at most `max_free` free spins,
/// plus a boundary condition.
pub fn random_instance(k: u64, max_free: usize) -> (LatticeGraph, Disorder, BoundaryCondition) {
    let mut rng = CounterRng::new(k, &Stream::new("instance"));
    let kind = rng.below(6);
    let g = match kind {
        0 => path(3 + rng.below(max_free.min(14) as u64 - 2) as usize, &[]),
        1 => random_tree(3 + rng.below(max_free as u64 - 2) as usize, &mut rng),
        2 => {
            let n = 4 + rng.below(max_free as u64 - 3) as usize;
            random_graph(n, n / 2 + 1, &mut rng)
        }
        3 => LatticeGraph::cube(Topology::OpenCube { d: 2, l: 3 + rng.below(2) as usize }).unwrap(),
        4 => LatticeGraph::cube(Topology::Torus { d: 2, l: 3 + rng.below(2).min((max_free >= 16) as u64) as usize }).unwrap(),
        _ => LatticeGraph::cube(Topology::OpenCube { d: 2, l: 3 }).unwrap(),
    };
    let j = sample_disorder(&g, k, &Stream::new("J"));
    let bc = if g.boundary().is_empty() || kind == 5 {
        BoundaryCondition::Free
    } else {
        let gamma = (0..g.boundary().len()).map(|_| rng.sign()).collect();
        BoundaryCondition::fixed(&g, gamma).unwrap()
    };
    let fits = match &bc {
        BoundaryCondition::Free => g.n_vertices(),
        BoundaryCondition::Fixed(_) => g.interior().len(),
    } <= max_free;
    if fits {
        (g, j, bc)
    } else {
        let g = random_tree(max_free.min(10), &mut rng);
        let j = sample_disorder(&g, k, &Stream::new("J"));
        (g, j, BoundaryCondition::Free)
    }
}

/// Minimum energy over every configuration honouring `bc` and `keep`, by direct
/// evaluation of the Hamiltonian. Returns all minimizers within `1e-12`.
pub fn brute_force(
    g: &LatticeGraph,
    couplings: &[f64],
    bc: &BoundaryCondition,
    keep: impl Fn(&[i8]) -> bool,
) -> (f64, Vec<Vec<i8>>) {
    let n = g.n_vertices();
    let mut s = vec![1i8; n];
    let free: Vec<usize> = match bc {
        BoundaryCondition::Free => (0..n).collect(),
        BoundaryCondition::Fixed(gamma) => {
            for (b, &x) in g.boundary().iter().zip(gamma) {
                s[b] = x;
            }
            g.interior().iter().collect()
        }
    };
    assert!(free.len() <= 22);
    let mut best = f64::INFINITY;
    let mut all = Vec::new();
    for mask in 0u64..(1 << free.len()) {
        for (k, &v) in free.iter().enumerate() {
            s[v] = if mask >> k & 1 == 1 { -1 } else { 1 };
        }
        if !keep(&s) {
            continue;
        }
        let e: f64 = g.edges().iter().zip(couplings).map(|(&(u, v), &w)| -w * f64::from(s[u] * s[v])).sum();
        if e < best - 1e-12 {
            best = e;
            all.clear();
        }
        if e <= best + 1e-12 {
            all.push(s.clone());
        }
    }
    (best, all)
}
