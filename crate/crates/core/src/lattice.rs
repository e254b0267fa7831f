//! Finite graphs carrying the spin system: cubes with the usual boundary,
//! free cubes, tori, and explicitly listed graphs.
//!
//! Cube vertices are numbered row-major over their coordinate tuples (first
//! coordinate most significant). Edges are stored as `(min, max)` pairs sorted
//! lexicographically, and an edge's position in that order is its index.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// How a graph was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    /// `{0..=L}^d` with the vertices having a coordinate in `{0, L}` as boundary.
    OpenCube { d: usize, l: usize },
    /// `{0..=L}^d` with an empty boundary.
    FreeCube { d: usize, l: usize },
    /// `{0..L}^d` with wraparound edges and an empty boundary.
    Torus { d: usize, l: usize },
    Explicit,
}

impl Topology {
    pub fn dimension(&self) -> Option<usize> {
        match *self {
            Topology::OpenCube { d, .. } | Topology::FreeCube { d, .. } | Topology::Torus { d, .. } => Some(d),
            Topology::Explicit => None,
        }
    }

    pub fn side(&self) -> Option<usize> {
        match *self {
            Topology::OpenCube { l, .. } | Topology::FreeCube { l, .. } | Topology::Torus { l, .. } => Some(l),
            Topology::Explicit => None,
        }
    }

    /// Number of grid points along one axis.
    fn points_per_axis(&self) -> Option<usize> {
        match *self {
            Topology::OpenCube { l, .. } | Topology::FreeCube { l, .. } => Some(l + 1),
            Topology::Torus { l, .. } => Some(l),
            Topology::Explicit => None,
        }
    }
}

/// Sorted, duplicate-free list of vertex indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet(Vec<usize>);

/// Sorted, duplicate-free list of edge indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeSet(Vec<usize>);

macro_rules! index_set {
    ($name:ident) => {
        impl $name {
            pub fn new(mut items: Vec<usize>) -> Self {
                items.sort_unstable();
                items.dedup();
                Self(items)
            }

            pub fn empty() -> Self {
                Self(Vec::new())
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn contains(&self, x: usize) -> bool {
                self.0.binary_search(&x).is_ok()
            }

            pub fn as_slice(&self) -> &[usize] {
                &self.0
            }

            pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
                self.0.iter().copied()
            }

            pub fn into_vec(self) -> Vec<usize> {
                self.0
            }
        }

        impl FromIterator<usize> for $name {
            fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
                Self::new(iter.into_iter().collect())
            }
        }
    };
}

index_set!(VertexSet);
index_set!(EdgeSet);

/// A finite, simple, connected graph with a boundary set `B` and connected,
/// nonempty interior `V° = V \ B`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    boundary: VertexSet,
    interior: VertexSet,
    is_boundary: Vec<bool>,
    topology: Topology,
    /// CSR adjacency: neighbors of `v` are `adj[offsets[v]..offsets[v + 1]]` as `(neighbor, edge)`.
    offsets: Vec<usize>,
    adj: Vec<(usize, usize)>,
    max_degree: usize,
}

impl LatticeGraph {
    /// Builds a cube or torus with nearest-neighbor edges.
    pub fn cube(topology: Topology) -> Result<Self> {
        let (d, l) = match topology {
            Topology::OpenCube { d, l } | Topology::FreeCube { d, l } | Topology::Torus { d, l } => (d, l),
            Topology::Explicit => return Err(Error::InvalidTopology("explicit graphs are built from an edge list")),
        };
        if d == 0 {
            return Err(Error::InvalidTopology("dimension must be at least 1"));
        }
        if l == 0 {
            return Err(Error::InvalidTopology("side length must be at least 1"));
        }
        if matches!(topology, Topology::Torus { .. }) && l < 3 {
            return Err(Error::TorusTooSmall(l));
        }
        let side = topology.points_per_axis().unwrap_or(0);
        let n = side
            .checked_pow(d as u32)
            .filter(|&n| n <= u32::MAX as usize)
            .ok_or(Error::InvalidTopology("cube has too many vertices"))?;

        let torus = matches!(topology, Topology::Torus { .. });
        let mut edges = Vec::with_capacity(n * d);
        let mut stride = 1;
        let mut strides = vec![0; d];
        for axis in (0..d).rev() {
            strides[axis] = stride;
            stride *= side;
        }
        let mut coords = vec![0usize; d];
        for v in 0..n {
            for axis in 0..d {
                if coords[axis] + 1 < side {
                    edges.push((v, v + strides[axis]));
                } else if torus {
                    let w = v - coords[axis] * strides[axis];
                    edges.push((w.min(v), w.max(v)));
                }
            }
            increment(&mut coords, side);
        }

        let boundary: Vec<usize> = match topology {
            Topology::OpenCube { .. } => {
                let mut coords = vec![0usize; d];
                let mut out = Vec::new();
                for v in 0..n {
                    if coords.iter().any(|&c| c == 0 || c == l) {
                        out.push(v);
                    }
                    increment(&mut coords, side);
                }
                out
            }
            _ => Vec::new(),
        };
        Self::assemble(n, edges, VertexSet::new(boundary), topology)
    }

    /// Validates and builds a graph from an explicit edge list.
    pub fn explicit(n: usize, edges: &[(usize, usize)], boundary: VertexSet) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(Error::NotSimple(u, v));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        if let Some(&b) = boundary.as_slice().last() {
            if b >= n {
                return Err(Error::VertexOutOfRange { vertex: b, n });
            }
        }
        Self::assemble(n, normalized, boundary, Topology::Explicit)
    }

    fn assemble(n: usize, mut edges: Vec<(usize, usize)>, boundary: VertexSet, topology: Topology) -> Result<Self> {
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::NotSimple(w[0].0, w[0].1));
        }
        if edges.len() < 2 {
            return Err(Error::TooFewEdges(edges.len()));
        }
        let mut is_boundary = vec![false; n];
        for b in boundary.iter() {
            is_boundary[b] = true;
        }
        let interior: VertexSet = (0..n).filter(|&v| !is_boundary[v]).collect();
        if interior.is_empty() {
            return Err(Error::EmptyInterior);
        }

        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut fill = offsets.clone();
        let mut adj = vec![(0, 0); 2 * edges.len()];
        for (e, &(u, v)) in edges.iter().enumerate() {
            adj[fill[u]] = (v, e);
            fill[u] += 1;
            adj[fill[v]] = (u, e);
            fill[v] += 1;
        }
        let max_degree = degree.iter().copied().max().unwrap_or(0);

        let g = Self { n, edges, boundary, interior, is_boundary, topology, offsets, adj, max_degree };
        if !g.is_connected_within(|_| true) {
            return Err(Error::Disconnected);
        }
        if !g.is_connected_within(|v| !g.is_boundary[v]) {
            return Err(Error::InteriorDisconnected);
        }
        Ok(g)
    }

    fn is_connected_within(&self, keep: impl Fn(usize) -> bool) -> bool {
        let Some(start) = (0..self.n).find(|&v| keep(v)) else {
            return true;
        };
        let mut seen = vec![false; self.n];
        seen[start] = true;
        let mut stack = vec![start];
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(w, _) in self.neighbors(v) {
                if !seen[w] && keep(w) {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == (0..self.n).filter(|&v| keep(v)).count()
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// Index of the edge `{u, v}`, if present.
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        if u >= self.n || v >= self.n {
            return None;
        }
        self.edges.binary_search(&(u.min(v), u.max(v))).ok()
    }

    pub fn boundary(&self) -> &VertexSet {
        &self.boundary
    }

    pub fn interior(&self) -> &VertexSet {
        &self.interior
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// `(neighbor, edge index)` pairs incident to `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Coordinates of a cube or torus vertex, first coordinate most significant.
    pub fn coordinates(&self, v: usize) -> Option<Vec<usize>> {
        let d = self.topology.dimension()?;
        let side = self.topology.points_per_axis()?;
        let mut out = vec![0; d];
        let mut rest = v;
        for axis in (0..d).rev() {
            out[axis] = rest % side;
            rest /= side;
        }
        Some(out)
    }

    /// Breadth-first distances from `sources` (`None` where unreachable).
    pub fn bfs_from(&self, sources: &[usize]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].unwrap_or(0);
            for &(w, _) in self.neighbors(v) {
                if dist[w].is_none() {
                    dist[w] = Some(dv + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Shortest-path length between `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> usize {
        if i == j {
            return 0;
        }
        // connected by construction
        self.bfs_from(&[i])[j].unwrap_or(usize::MAX)
    }

    /// `min_{k in B} d(i, k)`, or `None` (infinity) when `B` is empty.
    pub fn distance_to_boundary(&self, i: usize) -> Option<usize> {
        if self.boundary.is_empty() {
            return None;
        }
        self.boundary_distances()[i]
    }

    /// Distance to the boundary for every vertex; all `None` when `B` is empty.
    pub fn boundary_distances(&self) -> Vec<Option<usize>> {
        self.bfs_from(self.boundary.as_slice())
    }

    /// Edges with exactly one endpoint in `region`.
    pub fn edge_boundary(&self, region: &VertexSet) -> EdgeSet {
        let mut inside = vec![false; self.n];
        for v in region.iter().filter(|&v| v < self.n) {
            inside[v] = true;
        }
        self.edge_boundary_of_mask(&inside)
    }

    pub(crate) fn edge_boundary_of_mask(&self, inside: &[bool]) -> EdgeSet {
        EdgeSet(
            self.edges
                .iter()
                .enumerate()
                .filter(|(_, &(u, v))| inside[u] != inside[v])
                .map(|(e, _)| e)
                .collect(),
        )
    }
}

fn increment(coords: &mut [usize], side: usize) {
    for c in coords.iter_mut().rev() {
        *c += 1;
        if *c < side {
            return;
        }
        *c = 0;
    }
}

/// All-pairs distance table for small graphs.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    n: usize,
    dist: Vec<u32>,
    to_boundary: Vec<Option<usize>>,
}

impl DistanceTable {
    pub const MAX_VERTICES: usize = 10_000;

    pub fn new(g: &LatticeGraph) -> Result<Self> {
        let n = g.n_vertices();
        if n > Self::MAX_VERTICES {
            return Err(Error::TooLarge { free_spins: n, cap: Self::MAX_VERTICES });
        }
        let mut dist = Vec::with_capacity(n * n);
        for i in 0..n {
            dist.extend(g.bfs_from(&[i]).into_iter().map(|d| d.map_or(u32::MAX, |d| d as u32)));
        }
        Ok(Self { n, dist, to_boundary: g.boundary_distances() })
    }

    pub fn distance(&self, i: usize, j: usize) -> usize {
        self.dist[i * self.n + j] as usize
    }

    pub fn distance_to_boundary(&self, i: usize) -> Option<usize> {
        self.to_boundary[i]
    }

    /// `min{d(i,j), d(i,B) + d(j,B)}`, the exponent in the pair-correlation bound.
    pub fn chaos_exponent(&self, i: usize, j: usize) -> usize {
        let direct = self.distance(i, j);
        match (self.to_boundary[i], self.to_boundary[j]) {
            (Some(a), Some(b)) => direct.min(a + b),
            _ => direct,
        }
    }
}
